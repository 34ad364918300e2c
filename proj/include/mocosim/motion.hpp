#pragma once

// Simulation of inter-shot rigid motion in a multishot Cartesian acquisition.

#include "encoding.hpp"

namespace mocosim {

/// Shot 0 is the reference pose; every later shot is rotated by `degree`.
inline MotionTrajectory make_trajectory(std::size_t num_shots, double degree)
{
  if (num_shots == 0) {
    throw InvalidArgument("trajectory needs at least one shot");
  }
  std::vector<MotionState> states(num_shots);
  for (std::size_t s = 1; s < num_shots; ++s) {
    states[s].rotation_deg = degree;
  }
  return MotionTrajectory(std::move(states));
}

/// Corrupted, shot-combined k-space (C x H x W) for a motion-free image:
///  1. fully sampled k-space of the object in each shot's pose, through every coil;
///  2. keep only the rows that shot acquires;
///  3. sum the segments over shots.
inline Tensor<cx> corrupt(
  RealImage const &x, SensitivityMaps const &maps, SamplingPattern const &pattern, MotionTrajectory const &traj)
{
  std::size_t const h = x.height(), w = x.width(), n = h * w;
  detail::check_geometry(h, w, maps, pattern, &traj);
  ComplexImage const object = to_complex(x);
  Tensor<cx> combined({maps.num_coils(), h, w});
  for (std::size_t s = 0; s < pattern.num_shots(); ++s) {
    ComplexImage const posed = apply_motion(object, traj[s]);
    for (std::size_t c = 0; c < maps.num_coils(); ++c) {
      ComplexImage const full = fft2c(detail::coil_weighted(posed, maps.coil(c)));
      for (std::size_t r = 0; r < h; ++r) {
        if (!pattern.samples(s, r)) {
          continue;
        }
        for (std::size_t col = 0; col < w; ++col) {
          combined[c * n + r * w + col] += full(r, col);
        }
      }
    }
  }
  return combined;
}

} // namespace mocosim
