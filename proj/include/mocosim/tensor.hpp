#pragma once

#include "error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace mocosim {

using cx = std::complex<double>;

inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(float v) { return std::isfinite(v); }
inline bool is_finite(cx const &v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

template <typename T>
bool all_finite(std::span<T const> values)
{
  return std::all_of(values.begin(), values.end(), [](T const &v) { return is_finite(v); });
}

inline std::size_t product(std::span<std::size_t const> dims)
{
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string dims_string(std::span<std::size_t const> dims)
{
  std::string s = "[";
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (i) {
      s += "x";
    }
    s += std::to_string(dims[i]);
  }
  return s + "]";
}

/// Dense row-major array of arbitrary rank. The last dimension varies fastest.
template <typename T>
class Tensor
{
public:
  using value_type = T;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims))
    , data_(product(dims_), T{})
  {
  }

  Tensor(std::vector<std::size_t> dims, std::vector<T> data)
    : dims_(std::move(dims))
    , data_(std::move(data))
  {
    if (data_.size() != product(dims_)) {
      throw InvalidArgument(
        "tensor data length " + std::to_string(data_.size()) + " does not match dims " +
        dims_string(dims_));
    }
  }

  std::vector<std::size_t> const &dims() const noexcept { return dims_; }
  std::size_t rank() const noexcept { return dims_.size(); }
  std::size_t dim(std::size_t i) const { return dims_.at(i); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<T> data() noexcept { return data_; }
  std::span<T const> data() const noexcept { return data_; }

  T &operator[](std::size_t i) { return data_[i]; }
  T const &operator[](std::size_t i) const { return data_[i]; }

  /// Contiguous slab for a fixed leading index, i.e. element [i, ...].
  std::span<T> slab(std::size_t i)
  {
    std::size_t const n = data_.size() / dims_.at(0);
    return std::span<T>(data_).subspan(i * n, n);
  }
  std::span<T const> slab(std::size_t i) const
  {
    std::size_t const n = data_.size() / dims_.at(0);
    return std::span<T const>(data_).subspan(i * n, n);
  }

  bool operator==(Tensor const &) const = default;

private:
  std::vector<std::size_t> dims_;
  std::vector<T> data_;
};

/// A single H x W slice, row-major.
template <typename T>
class Image
{
public:
  using value_type = T;

  Image() = default;

  Image(std::size_t height, std::size_t width)
    : height_(height)
    , width_(width)
    , data_(height * width, T{})
  {
  }

  Image(std::size_t height, std::size_t width, std::vector<T> data)
    : height_(height)
    , width_(width)
    , data_(std::move(data))
  {
    if (data_.size() != height_ * width_) {
      throw InvalidArgument(
        "image data length " + std::to_string(data_.size()) + " does not match " +
        std::to_string(height_) + "x" + std::to_string(width_));
    }
    if (!all_finite<T>(data_)) {
      throw InvalidArgument("image contains non-finite values");
    }
  }

  static Image from_tensor(Tensor<T> const &t)
  {
    if (t.rank() != 2) {
      throw InvalidArgument("expected a rank-2 tensor, got dims " + dims_string(t.dims()));
    }
    return Image(t.dim(0), t.dim(1), std::vector<T>(t.data().begin(), t.data().end()));
  }

  Tensor<T> to_tensor() const { return Tensor<T>({height_, width_}, data_); }

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return data_.size(); }

  T &operator()(std::size_t row, std::size_t col) { return data_[row * width_ + col]; }
  T const &operator()(std::size_t row, std::size_t col) const { return data_[row * width_ + col]; }

  T &operator[](std::size_t i) { return data_[i]; }
  T const &operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() noexcept { return data_; }
  std::span<T const> data() const noexcept { return data_; }

  bool same_shape(Image const &o) const noexcept { return height_ == o.height_ && width_ == o.width_; }

  Image transposed() const
  {
    Image out(width_, height_);
    for (std::size_t r = 0; r < height_; ++r) {
      for (std::size_t c = 0; c < width_; ++c) {
        out(c, r) = (*this)(r, c);
      }
    }
    return out;
  }

  bool operator==(Image const &) const = default;

private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> data_;
};

using RealImage = Image<double>;
using ComplexImage = Image<cx>;

inline ComplexImage to_complex(RealImage const &x)
{
  ComplexImage out(x.height(), x.width());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(), [](double v) { return cx(v); });
  return out;
}

inline RealImage magnitude(ComplexImage const &x)
{
  RealImage out(x.height(), x.width());
  std::transform(x.data().begin(), x.data().end(), out.data().begin(), [](cx const &v) { return std::abs(v); });
  return out;
}

// Inner products follow the physics convention <a, b> = sum conj(a) * b.

inline cx dot(std::span<cx const> a, std::span<cx const> b)
{
  cx acc{0.0, 0.0};
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += std::conj(a[i]) * b[i];
  }
  return acc;
}

inline double squared_norm(std::span<cx const> a)
{
  double acc = 0.0;
  for (auto const &v : a) {
    acc += std::norm(v);
  }
  return acc;
}

inline double norm(std::span<cx const> a) { return std::sqrt(squared_norm(a)); }

inline double norm(std::span<double const> a)
{
  double acc = 0.0;
  for (double v : a) {
    acc += v * v;
  }
  return std::sqrt(acc);
}

/// ||a - b|| / ||b||; returns ||a|| when b is zero.
template <typename T>
double relative_error(std::span<T const> a, std::span<T const> b)
{
  if (a.size() != b.size()) {
    throw InvalidArgument("relative_error: length mismatch");
  }
  std::vector<T> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
  }
  double const num = norm(std::span<T const>(diff));
  double const den = norm(b);
  return den > 0.0 ? num / den : num;
}

template <typename T>
double relative_error(Image<T> const &a, Image<T> const &b)
{
  return relative_error<T>(a.data(), b.data());
}

} // namespace mocosim
