#pragma once

#include "error.hpp"
#include "random.hpp"
#include "tensor.hpp"

#include <array>
#include <numbers>

namespace mocosim {

/// One ellipse of an analytic phantom, in canonical coordinates where the field of view is [-1, 1]^2
/// with y pointing up.
struct Ellipse
{
  double intensity;
  double semi_x;
  double semi_y;
  double center_x;
  double center_y;
  double angle_deg;

  bool contains(double x, double y) const
  {
    double const phi = angle_deg * std::numbers::pi / 180.0;
    double const c = std::cos(phi), s = std::sin(phi);
    double const dx = x - center_x, dy = y - center_y;
    double const u = (dx * c + dy * s) / semi_x;
    double const v = (-dx * s + dy * c) / semi_y;
    return u * u + v * v <= 1.0;
  }
};

/// The original ten-ellipse Shepp-Logan table (skull intensity 2). After clamping to [0, 1] the
/// head interior saturates, leaving a sharp-edged uniform ellipse.
inline constexpr std::array<Ellipse, 10> kSheppLogan{{
  {2.00, 0.6900, 0.9200, 0.00, 0.0000, 0.0},
  {-0.98, 0.6624, 0.8740, 0.00, -0.0184, 0.0},
  {-0.02, 0.1100, 0.3100, 0.22, 0.0000, -18.0},
  {-0.02, 0.1600, 0.4100, -0.22, 0.0000, 18.0},
  {0.01, 0.2100, 0.2500, 0.00, 0.3500, 0.0},
  {0.01, 0.0460, 0.0460, 0.00, 0.1000, 0.0},
  {0.01, 0.0460, 0.0460, 0.00, -0.1000, 0.0},
  {0.01, 0.0460, 0.0230, -0.08, -0.6050, 0.0},
  {0.01, 0.0230, 0.0230, 0.00, -0.6060, 0.0},
  {0.01, 0.0230, 0.0460, 0.06, -0.6050, 0.0},
}};

/// Rasterizes ellipses onto an H x W grid. Pixel (floor(H/2), floor(W/2)) sits at the canonical origin.
template <std::size_t N>
RealImage rasterize_ellipses(std::size_t height, std::size_t width, std::array<Ellipse, N> const &ellipses)
{
  if (height < 8 || width < 8) {
    throw InvalidArgument("phantom dimensions must be at least 8x8");
  }
  RealImage out(height, width);
  double const row0 = static_cast<double>(height / 2), col0 = static_cast<double>(width / 2);
  double const hy = height / 2.0, hx = width / 2.0;
  for (std::size_t r = 0; r < height; ++r) {
    double const y = (row0 - static_cast<double>(r)) / hy;
    for (std::size_t c = 0; c < width; ++c) {
      double const x = (static_cast<double>(c) - col0) / hx;
      double v = 0.0;
      for (auto const &e : ellipses) {
        if (e.contains(x, y)) {
          v += e.intensity;
        }
      }
      out(r, c) = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

inline RealImage shepp_logan(std::size_t height, std::size_t width)
{
  return rasterize_ellipses(height, width, kSheppLogan);
}

/// A seeded perturbation of the Shepp-Logan geometry with visible interior structure: global
/// rotation (+-15 deg), scale (0.85-1.0) and shift (+-0.04); unit skull, brain intensity in
/// [0.3, 0.7] and feature contrasts of +-[0.05, 0.3]. Used wherever many distinct but comparable
/// slices are needed.
inline RealImage shepp_logan_variant(std::size_t height, std::size_t width, std::uint64_t seed)
{
  SplitMix64 rng(seed);
  double const rot = rng.uniform(-15.0, 15.0);
  double const scale = rng.uniform(0.85, 1.0);
  double const sx = rng.uniform(-0.04, 0.04);
  double const sy = rng.uniform(-0.04, 0.04);
  double const phi = rot * std::numbers::pi / 180.0;
  double const c = std::cos(phi), s = std::sin(phi);

  auto table = kSheppLogan;
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto &e = table[i];
    double const x = e.center_x * scale, y = e.center_y * scale;
    e.center_x = c * x - s * y + sx;
    e.center_y = s * x + c * y + sy;
    e.semi_x *= scale;
    e.semi_y *= scale;
    e.angle_deg += rot;
    if (i == 0) {
      e.intensity = 1.0;
    } else if (i == 1) {
      e.intensity = -rng.uniform(0.3, 0.7);
    } else {
      double const sign = rng.canonical() < 0.5 ? -1.0 : 1.0;
      e.intensity = sign * rng.uniform(0.05, 0.3);
    }
  }
  return rasterize_ellipses(height, width, table);
}

} // namespace mocosim
