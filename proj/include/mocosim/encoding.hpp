#pragma once

// Multishot SENSE encoding: per-shot rigid motion, coil weighting, centered FFT and
// interleaved row sampling, plus the matching adjoint.

#include "coils.hpp"
#include "error.hpp"
#include "fourier.hpp"
#include "tensor.hpp"

#include <numbers>

namespace mocosim {

/// Assignment of Cartesian k-space rows to shots. Every row belongs to exactly one shot.
class SamplingPattern
{
public:
  SamplingPattern(std::size_t num_shots, std::vector<std::size_t> shot_of_line)
    : num_shots_(num_shots)
    , shot_of_line_(std::move(shot_of_line))
  {
    if (num_shots_ == 0) {
      throw InvalidArgument("sampling pattern needs at least one shot");
    }
    for (std::size_t s : shot_of_line_) {
      if (s >= num_shots_) {
        throw InvalidArgument("row assigned to nonexistent shot " + std::to_string(s));
      }
    }
  }

  std::size_t num_shots() const noexcept { return num_shots_; }
  std::size_t height() const noexcept { return shot_of_line_.size(); }
  std::size_t shot_of(std::size_t row) const { return shot_of_line_.at(row); }
  std::span<std::size_t const> shot_of_line() const noexcept { return shot_of_line_; }

  bool samples(std::size_t shot, std::size_t row) const { return shot_of_line_.at(row) == shot; }

  /// Rows acquired by `shot`, ascending.
  std::vector<std::size_t> rows_of(std::size_t shot) const
  {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < shot_of_line_.size(); ++r) {
      if (shot_of_line_[r] == shot) {
        rows.push_back(r);
      }
    }
    return rows;
  }

private:
  std::size_t num_shots_;
  std::vector<std::size_t> shot_of_line_;
};

/// Row l is acquired by shot l mod S.
inline SamplingPattern interleaved_pattern(std::size_t num_shots, std::size_t height)
{
  if (num_shots == 0 || num_shots > height) {
    throw InvalidArgument(
      "shot count " + std::to_string(num_shots) + " must lie in [1, height=" + std::to_string(height) + "]");
  }
  std::vector<std::size_t> shots(height);
  for (std::size_t l = 0; l < height; ++l) {
    shots[l] = l % num_shots;
  }
  return SamplingPattern(num_shots, std::move(shots));
}

/// Rigid in-plane pose of the object during one shot. Translation is in pixels, x along columns.
struct MotionState
{
  double rotation_deg = 0.0;
  double shift_x = 0.0;
  double shift_y = 0.0;

  bool is_identity() const noexcept { return rotation_deg == 0.0 && shift_x == 0.0 && shift_y == 0.0; }
  MotionState inverse_parameters() const noexcept { return {-rotation_deg, -shift_x, -shift_y}; }
  bool operator==(MotionState const &) const = default;
};

class MotionTrajectory
{
public:
  explicit MotionTrajectory(std::vector<MotionState> states)
    : states_(std::move(states))
  {
    for (auto const &s : states_) {
      if (!std::isfinite(s.rotation_deg) || !std::isfinite(s.shift_x) || !std::isfinite(s.shift_y)) {
        throw InvalidArgument("motion parameters must be finite");
      }
      if (std::abs(s.rotation_deg) >= 90.0) {
        throw InvalidArgument("rotation must satisfy |theta| < 90 degrees");
      }
    }
  }

  static MotionTrajectory still(std::size_t num_shots) { return MotionTrajectory(std::vector<MotionState>(num_shots)); }

  std::size_t num_shots() const noexcept { return states_.size(); }
  MotionState const &operator[](std::size_t s) const { return states_.at(s); }
  std::span<MotionState const> states() const noexcept { return states_; }

  bool is_still() const
  {
    return std::all_of(states_.begin(), states_.end(), [](auto const &s) { return s.is_identity(); });
  }

private:
  std::vector<MotionState> states_;
};

namespace detail {

/// sin/cos of an angle in degrees, exact at multiples of 90.
inline std::pair<double, double> sincos_deg(double deg)
{
  double const q = deg / 90.0;
  if (q == std::round(q)) {
    switch (((static_cast<long long>(q) % 4) + 4) % 4) {
    case 0: return {0.0, 1.0};
    case 1: return {1.0, 0.0};
    case 2: return {0.0, -1.0};
    default: return {-1.0, 0.0};
    }
  }
  double const rad = deg * std::numbers::pi / 180.0;
  return {std::sin(rad), std::cos(rad)};
}

} // namespace detail

/// Rigid transform by bilinear interpolation about pixel (floor(H/2), floor(W/2)): rotate by
/// `rotation_deg`, then shift. Samples that fall outside the grid read as zero. No bound on the
/// angle; most callers want rotate_image.
///
/// Positive angles map pixel offset (dr, dc) to (dc, -dr) at 90 degrees, i.e. (i, j) -> (j, 2c - i).
template <typename T>
Image<T> rigid_transform(Image<T> const &x, double rotation_deg, double shift_x, double shift_y)
{
  std::size_t const h = x.height(), w = x.width();
  Image<T> out(h, w);
  auto const [s, c] = detail::sincos_deg(rotation_deg);
  double const cr = static_cast<double>(h / 2), cc = static_cast<double>(w / 2);
  auto const sample = [&](long r, long col) -> T {
    if (r < 0 || col < 0 || r >= static_cast<long>(h) || col >= static_cast<long>(w)) {
      return T{};
    }
    return x(static_cast<std::size_t>(r), static_cast<std::size_t>(col));
  };
  for (std::size_t r = 0; r < h; ++r) {
    double const dr = static_cast<double>(r) - cr - shift_y;
    for (std::size_t col = 0; col < w; ++col) {
      double const dc = static_cast<double>(col) - cc - shift_x;
      // Inverse map: source offset = R(-theta) applied to destination offset.
      double const src_r = cr + c * dr - s * dc;
      double const src_c = cc + s * dr + c * dc;
      double const fr = std::floor(src_r), fc = std::floor(src_c);
      double const ar = src_r - fr, ac = src_c - fc;
      long const r0 = static_cast<long>(fr), c0 = static_cast<long>(fc);
      T v{};
      if (ar == 0.0 && ac == 0.0) {
        v = sample(r0, c0);
      } else {
        v = (1.0 - ar) * ((1.0 - ac) * sample(r0, c0) + ac * sample(r0, c0 + 1)) +
            ar * ((1.0 - ac) * sample(r0 + 1, c0) + ac * sample(r0 + 1, c0 + 1));
      }
      out(r, col) = v;
    }
  }
  return out;
}

/// Rigid transform restricted to |theta| < 90 degrees.
template <typename T>
Image<T> rotate_image(Image<T> const &x, double rotation_deg, double shift_x = 0.0, double shift_y = 0.0)
{
  if (!(std::abs(rotation_deg) < 90.0)) {
    throw InvalidArgument("rotate_image requires |theta| < 90 degrees");
  }
  return rigid_transform(x, rotation_deg, shift_x, shift_y);
}

template <typename T>
Image<T> apply_motion(Image<T> const &x, MotionState const &m)
{
  if (m.is_identity()) {
    return x;
  }
  return rotate_image(x, m.rotation_deg, m.shift_x, m.shift_y);
}

/// Per-shot, per-coil k-space, S x C x H x W. Entries off a shot's rows are zero.
class MultishotKSpace
{
public:
  explicit MultishotKSpace(Tensor<cx> data)
    : data_(std::move(data))
  {
    if (data_.rank() != 4) {
      throw InvalidArgument("multishot k-space must be rank 4 (S x C x H x W), got " + dims_string(data_.dims()));
    }
  }

  std::size_t num_shots() const { return data_.dim(0); }
  std::size_t num_coils() const { return data_.dim(1); }
  std::size_t height() const { return data_.dim(2); }
  std::size_t width() const { return data_.dim(3); }

  std::span<cx> slice(std::size_t shot, std::size_t coil)
  {
    std::size_t const n = height() * width();
    return data_.data().subspan((shot * num_coils() + coil) * n, n);
  }
  std::span<cx const> slice(std::size_t shot, std::size_t coil) const
  {
    std::size_t const n = height() * width();
    return data_.data().subspan((shot * num_coils() + coil) * n, n);
  }

  Tensor<cx> const &tensor() const noexcept { return data_; }

  /// Sums the shot axis into C x H x W combined k-space.
  Tensor<cx> combine_shots() const
  {
    std::size_t const n = height() * width();
    Tensor<cx> out({num_coils(), height(), width()});
    for (std::size_t s = 0; s < num_shots(); ++s) {
      for (std::size_t c = 0; c < num_coils(); ++c) {
        auto const src = slice(s, c);
        for (std::size_t i = 0; i < n; ++i) {
          out[c * n + i] += src[i];
        }
      }
    }
    return out;
  }

private:
  Tensor<cx> data_;
};

namespace detail {

inline void check_geometry(
  std::size_t h, std::size_t w, SensitivityMaps const &maps, SamplingPattern const &pattern,
  MotionTrajectory const *traj)
{
  if (maps.height() != h || maps.width() != w) {
    throw InvalidArgument(
      "image is " + std::to_string(h) + "x" + std::to_string(w) + " but maps are " + std::to_string(maps.height()) +
      "x" + std::to_string(maps.width()));
  }
  if (pattern.height() != h) {
    throw InvalidArgument("sampling pattern covers " + std::to_string(pattern.height()) + " rows, image has " + std::to_string(h));
  }
  if (traj && traj->num_shots() != pattern.num_shots()) {
    throw InvalidArgument(
      "trajectory has " + std::to_string(traj->num_shots()) + " states for " + std::to_string(pattern.num_shots()) + " shots");
  }
}

inline ComplexImage coil_weighted(ComplexImage const &x, std::span<cx const> map)
{
  ComplexImage out(x.height(), x.width());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = map[i] * x[i];
  }
  return out;
}

} // namespace detail

/// y[s, c] = M_s . fft2c(S_c . move_s(x)). The object moves; coils stay in the scanner frame.
inline MultishotKSpace forward(
  ComplexImage const &x, SensitivityMaps const &maps, SamplingPattern const &pattern, MotionTrajectory const &traj)
{
  std::size_t const h = x.height(), w = x.width();
  detail::check_geometry(h, w, maps, pattern, &traj);
  MultishotKSpace y(Tensor<cx>({pattern.num_shots(), maps.num_coils(), h, w}));
  for (std::size_t s = 0; s < pattern.num_shots(); ++s) {
    ComplexImage const moved = apply_motion(x, traj[s]);
    auto const rows = pattern.rows_of(s);
    for (std::size_t c = 0; c < maps.num_coils(); ++c) {
      ComplexImage const k = fft2c(detail::coil_weighted(moved, maps.coil(c)));
      auto dst = y.slice(s, c);
      for (std::size_t r : rows) {
        std::copy_n(k.data().begin() + r * w, w, dst.begin() + r * w);
      }
    }
  }
  return y;
}

/// x = sum_s move_s^{-1}( sum_c conj(S_c) . ifft2c(M_s . y[s, c]) ), with the inverse motion
/// realized as a transform by the negated parameters. Exact adjoint of forward for a still trajectory.
inline ComplexImage adjoint(
  MultishotKSpace const &y, SensitivityMaps const &maps, SamplingPattern const &pattern, MotionTrajectory const &traj)
{
  std::size_t const h = y.height(), w = y.width();
  detail::check_geometry(h, w, maps, pattern, &traj);
  if (y.num_shots() != pattern.num_shots() || y.num_coils() != maps.num_coils()) {
    throw InvalidArgument("k-space shot/coil counts do not match pattern and maps");
  }
  ComplexImage out(h, w);
  for (std::size_t s = 0; s < pattern.num_shots(); ++s) {
    auto const rows = pattern.rows_of(s);
    ComplexImage shot_image(h, w);
    for (std::size_t c = 0; c < maps.num_coils(); ++c) {
      ComplexImage masked(h, w);
      auto const src = y.slice(s, c);
      for (std::size_t r : rows) {
        std::copy_n(src.begin() + r * w, w, masked.data().begin() + r * w);
      }
      ComplexImage const img = ifft2c(masked);
      auto const map = maps.coil(c);
      for (std::size_t i = 0; i < img.size(); ++i) {
        shot_image[i] += std::conj(map[i]) * img[i];
      }
    }
    ComplexImage const unmoved = apply_motion(shot_image, traj[s].inverse_parameters());
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] += unmoved[i];
    }
  }
  return out;
}

/// Static-object SENSE operator on combined (shot-summed) k-space: y_c = M . fft2c(S_c . x) where
/// M keeps the acquired rows. For a complete sampling pattern M keeps every row.
class SenseOperator
{
public:
  SenseOperator(SensitivityMaps maps, SamplingPattern const &pattern)
    : maps_(std::move(maps))
    , acquired_(pattern.height(), true)
  {
    detail::check_geometry(maps_.height(), maps_.width(), maps_, pattern, nullptr);
  }

  /// Explicit row mask, e.g. for undersampled acquisitions.
  SenseOperator(SensitivityMaps maps, std::vector<bool> acquired_rows)
    : maps_(std::move(maps))
    , acquired_(std::move(acquired_rows))
  {
    if (acquired_.size() != maps_.height()) {
      throw InvalidArgument("row mask length does not match map height");
    }
  }

  std::size_t height() const { return maps_.height(); }
  std::size_t width() const { return maps_.width(); }
  std::size_t num_coils() const { return maps_.num_coils(); }
  SensitivityMaps const &maps() const noexcept { return maps_; }

  Tensor<cx> forward(ComplexImage const &x) const
  {
    check_image(x);
    std::size_t const h = height(), w = width(), n = h * w;
    Tensor<cx> y({num_coils(), h, w});
    for (std::size_t c = 0; c < num_coils(); ++c) {
      ComplexImage const k = fft2c(detail::coil_weighted(x, maps_.coil(c)));
      for (std::size_t r = 0; r < h; ++r) {
        if (acquired_[r]) {
          std::copy_n(k.data().begin() + r * w, w, y.data().begin() + c * n + r * w);
        }
      }
    }
    return y;
  }

  ComplexImage adjoint(Tensor<cx> const &y) const
  {
    check_kspace(y);
    std::size_t const h = height(), w = width(), n = h * w;
    ComplexImage out(h, w);
    for (std::size_t c = 0; c < num_coils(); ++c) {
      ComplexImage masked(h, w);
      for (std::size_t r = 0; r < h; ++r) {
        if (acquired_[r]) {
          std::copy_n(y.data().begin() + c * n + r * w, w, masked.data().begin() + r * w);
        }
      }
      ComplexImage const img = ifft2c(masked);
      auto const map = maps_.coil(c);
      for (std::size_t i = 0; i < n; ++i) {
        out[i] += std::conj(map[i]) * img[i];
      }
    }
    return out;
  }

  ComplexImage normal(ComplexImage const &x) const { return adjoint(forward(x)); }

  void check_kspace(Tensor<cx> const &y) const
  {
    if (y.rank() != 3 || y.dim(0) != num_coils() || y.dim(1) != height() || y.dim(2) != width()) {
      throw InvalidArgument(
        "combined k-space dims " + dims_string(y.dims()) + " do not match maps " + dims_string(maps_.tensor().dims()));
    }
  }

private:
  void check_image(ComplexImage const &x) const
  {
    if (x.height() != height() || x.width() != width()) {
      throw InvalidArgument("image dims do not match the SENSE operator");
    }
  }

  SensitivityMaps maps_;
  std::vector<bool> acquired_;
};

} // namespace mocosim
