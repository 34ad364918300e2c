#pragma once

// Full-reference image quality: PSNR and Gaussian-window SSIM. Peak and dynamic range come
// from the reference image.

#include "error.hpp"
#include "tensor.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <limits>

namespace mocosim {

namespace detail {

inline void check_same_shape(RealImage const &a, RealImage const &b, char const *what)
{
  if (!a.same_shape(b)) {
    throw InvalidArgument(
      std::string(what) + ": dimension mismatch " + std::to_string(a.height()) + "x" + std::to_string(a.width()) +
      " vs " + std::to_string(b.height()) + "x" + std::to_string(b.width()));
  }
}

inline double reference_peak(RealImage const &ref, char const *what)
{
  double peak = 0.0;
  for (double v : ref.data()) {
    peak = std::max(peak, std::abs(v));
  }
  if (!(peak > 0.0)) {
    throw InvalidArgument(std::string(what) + ": reference image is all zero, peak undefined");
  }
  return peak;
}

} // namespace detail

/// 10 log10(peak^2 / MSE) with peak = max |reference|. Identical images give +infinity.
inline double psnr(RealImage const &reference, RealImage const &test)
{
  detail::check_same_shape(reference, test, "psnr");
  double const peak = detail::reference_peak(reference, "psnr");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    double const d = reference[i] - test[i];
    sse += d * d;
  }
  if (sse == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  double const mse = sse / static_cast<double>(reference.size());
  return 10.0 * std::log10(peak * peak / mse);
}

struct SsimParams
{
  static constexpr std::size_t kWindow = 11;
  static constexpr double kSigma = 1.5;
  static constexpr double kK1 = 0.01;
  static constexpr double kK2 = 0.03;
};

/// Normalized 1D Gaussian taps; the 2D window is their outer product.
inline std::array<double, SsimParams::kWindow> ssim_gaussian_taps()
{
  std::array<double, SsimParams::kWindow> taps{};
  double sum = 0.0;
  int const half = static_cast<int>(SsimParams::kWindow / 2);
  for (int i = -half; i <= half; ++i) {
    double const v = std::exp(-(i * i) / (2.0 * SsimParams::kSigma * SsimParams::kSigma));
    taps[static_cast<std::size_t>(i + half)] = v;
    sum += v;
  }
  for (auto &t : taps) {
    t /= sum;
  }
  return taps;
}

namespace detail {

/// Separable Gaussian filter keeping only windows fully inside the image.
inline RealImage filter_valid(RealImage const &in, std::array<double, SsimParams::kWindow> const &taps)
{
  std::size_t const k = SsimParams::kWindow;
  std::size_t const h = in.height(), w = in.width();
  RealImage rows(h, w - k + 1);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c + k <= w; ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += taps[t] * in(r, c + t);
      }
      rows(r, c) = acc;
    }
  }
  RealImage out(h - k + 1, w - k + 1);
  for (std::size_t r = 0; r + k <= h; ++r) {
    for (std::size_t c = 0; c < rows.width(); ++c) {
      double acc = 0.0;
      for (std::size_t t = 0; t < k; ++t) {
        acc += taps[t] * rows(r + t, c);
      }
      out(r, c) = acc;
    }
  }
  return out;
}

} // namespace detail

/// Mean SSIM over all 11x11 windows lying inside the image (Gaussian weights, sigma 1.5,
/// K1 = 0.01, K2 = 0.03, dynamic range = max |reference|).
inline double ssim(RealImage const &reference, RealImage const &test)
{
  detail::check_same_shape(reference, test, "ssim");
  std::size_t const k = SsimParams::kWindow;
  if (reference.height() < k || reference.width() < k) {
    throw InvalidArgument("ssim: images must be at least 11x11");
  }
  double const range = detail::reference_peak(reference, "ssim");
  double const c1 = std::pow(SsimParams::kK1 * range, 2);
  double const c2 = std::pow(SsimParams::kK2 * range, 2);
  auto const taps = ssim_gaussian_taps();

  std::size_t const n = reference.size();
  RealImage xx(reference.height(), reference.width()), yy = xx, xy = xx;
  for (std::size_t i = 0; i < n; ++i) {
    xx[i] = reference[i] * reference[i];
    yy[i] = test[i] * test[i];
    xy[i] = reference[i] * test[i];
  }
  RealImage const mu_x = detail::filter_valid(reference, taps);
  RealImage const mu_y = detail::filter_valid(test, taps);
  RealImage const e_xx = detail::filter_valid(xx, taps);
  RealImage const e_yy = detail::filter_valid(yy, taps);
  RealImage const e_xy = detail::filter_valid(xy, taps);

  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    double const mx = mu_x[i], my = mu_y[i];
    double const vx = e_xx[i] - mx * mx;
    double const vy = e_yy[i] - my * my;
    double const cov = e_xy[i] - mx * my;
    total += ((2.0 * mx * my + c1) * (2.0 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

/// Mean metrics for one bucket of image pairs.
struct MetricReport
{
  double degree = 0.0;
  double psnr_db = 0.0;
  double ssim = 0.0;
  std::size_t n_images = 0;
};

/// Infinite PSNR (identical images) serializes as null.
inline nlohmann::json to_json(MetricReport const &m)
{
  nlohmann::json j{{"degree", m.degree}, {"psnr_db", nullptr}, {"ssim", m.ssim}, {"n_images", m.n_images}};
  if (std::isfinite(m.psnr_db)) {
    j["psnr_db"] = m.psnr_db;
  }
  return j;
}

} // namespace mocosim
