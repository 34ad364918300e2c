#pragma once

#include "error.hpp"
#include "random.hpp"
#include "tensor.hpp"

#include <limits>
#include <numbers>

namespace mocosim {

/// Receive-coil sensitivities, C x H x W, normalized so that sum_c |S_c(p)|^2 = 1 at every pixel.
class SensitivityMaps
{
public:
  static constexpr double kSosTolerance = 1e-12;

  /// Wraps a rank-3 tensor. Throws unless the maps are finite and SOS-normalized.
  explicit SensitivityMaps(Tensor<cx> maps)
    : maps_(std::move(maps))
  {
    if (maps_.rank() != 3 || maps_.dim(0) == 0) {
      throw InvalidArgument("sensitivity maps must be a rank-3 tensor with C >= 1, got " + dims_string(maps_.dims()));
    }
    if (!all_finite<cx>(maps_.data())) {
      throw InvalidArgument("sensitivity maps contain non-finite values");
    }
    if (double const dev = sos_deviation(); dev > kSosTolerance) {
      throw InvalidArgument("sensitivity maps are not sum-of-squares normalized (max deviation " + std::to_string(dev) + ")");
    }
  }

  /// Rescales arbitrary maps pixelwise to unit sum of squares. Pixels where every coil is zero
  /// cannot be normalized and are rejected.
  static SensitivityMaps normalized(Tensor<cx> raw)
  {
    if (raw.rank() != 3 || raw.dim(0) == 0) {
      throw InvalidArgument("sensitivity maps must be a rank-3 tensor with C >= 1, got " + dims_string(raw.dims()));
    }
    std::size_t const n = raw.dim(1) * raw.dim(2);
    for (std::size_t p = 0; p < n; ++p) {
      double sos = 0.0;
      for (std::size_t c = 0; c < raw.dim(0); ++c) {
        sos += std::norm(raw[c * n + p]);
      }
      if (!(sos > 0.0) || !std::isfinite(sos)) {
        throw InvalidArgument("cannot normalize sensitivity maps: zero or non-finite coil energy at pixel " + std::to_string(p));
      }
      double const inv = 1.0 / std::sqrt(sos);
      for (std::size_t c = 0; c < raw.dim(0); ++c) {
        raw[c * n + p] *= inv;
      }
    }
    return SensitivityMaps(std::move(raw));
  }

  std::size_t num_coils() const { return maps_.dim(0); }
  std::size_t height() const { return maps_.dim(1); }
  std::size_t width() const { return maps_.dim(2); }

  std::span<cx const> coil(std::size_t c) const { return maps_.slab(c); }
  Tensor<cx> const &tensor() const noexcept { return maps_; }

  double sos_deviation() const
  {
    std::size_t const n = maps_.dim(1) * maps_.dim(2);
    double worst = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      double sos = 0.0;
      for (std::size_t c = 0; c < maps_.dim(0); ++c) {
        sos += std::norm(maps_[c * n + p]);
      }
      worst = std::max(worst, std::abs(sos - 1.0));
    }
    return worst;
  }

private:
  Tensor<cx> maps_;
};

/// Synthetic birdcage-like maps. Coil c is a Gaussian bump centred where the ray from the image
/// centre at angle 2*pi*c/C leaves the grid, with standard deviation sigma_fraction * min(H, W),
/// times a seeded linear phase ramp. The stack is SOS-normalized.
inline SensitivityMaps gen_gaussian_maps(
  std::size_t num_coils, std::size_t height, std::size_t width, double sigma_fraction, std::uint64_t seed)
{
  if (num_coils == 0) {
    throw InvalidArgument("coil count must be at least 1");
  }
  if (!(sigma_fraction > 0.0 && sigma_fraction <= 2.0)) {
    throw InvalidArgument("sigma_fraction must lie in (0, 2]");
  }
  if (height == 0 || width == 0) {
    throw InvalidArgument("coil map dimensions must be positive");
  }
  std::size_t const n = height * width;
  double const cy = static_cast<double>(height / 2), cx0 = static_cast<double>(width / 2);
  double const half_h = height / 2.0, half_w = width / 2.0;
  double const sigma = sigma_fraction * static_cast<double>(std::min(height, width));

  struct Coil
  {
    double row, col, ramp_row, ramp_col, offset;
  };
  std::vector<Coil> coils(num_coils);
  SplitMix64 rng(seed);
  for (std::size_t c = 0; c < num_coils; ++c) {
    double const phi = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(num_coils);
    double const dx = std::cos(phi), dy = std::sin(phi);
    double t = std::numeric_limits<double>::infinity();
    if (std::abs(dx) > 1e-12) {
      t = std::min(t, half_w / std::abs(dx));
    }
    if (std::abs(dy) > 1e-12) {
      t = std::min(t, half_h / std::abs(dy));
    }
    coils[c].row = cy - t * dy;
    coils[c].col = cx0 + t * dx;
    // At most half a cycle of phase across the field of view.
    coils[c].ramp_row = rng.uniform(-std::numbers::pi, std::numbers::pi);
    coils[c].ramp_col = rng.uniform(-std::numbers::pi, std::numbers::pi);
    coils[c].offset = rng.uniform(-std::numbers::pi, std::numbers::pi);
  }

  // Magnitudes are handled in the log domain and shifted by the per-pixel maximum so that a very
  // narrow sigma cannot underflow every coil to zero before normalization.
  Tensor<cx> raw({num_coils, height, width});
  std::vector<double> log_mag(num_coils);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t col = 0; col < width; ++col) {
      double peak = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < num_coils; ++c) {
        double const d2 = std::pow(r - coils[c].row, 2) + std::pow(col - coils[c].col, 2);
        log_mag[c] = -d2 / (2.0 * sigma * sigma);
        peak = std::max(peak, log_mag[c]);
      }
      for (std::size_t c = 0; c < num_coils; ++c) {
        double const phase = coils[c].offset + coils[c].ramp_row * (r - cy) / static_cast<double>(height) +
                             coils[c].ramp_col * (col - cx0) / static_cast<double>(width);
        raw[c * n + r * width + col] = std::polar(std::exp(log_mag[c] - peak), phase);
      }
    }
  }
  return SensitivityMaps::normalized(std::move(raw));
}

} // namespace mocosim
