#pragma once

// Centered, orthonormal 2D DFT. The DC sample lives at (floor(H/2), floor(W/2)) in both
// domains and both directions scale by 1/sqrt(HW), so fft2c is unitary and ifft2c is its adjoint.

#include "tensor.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace mocosim {

namespace detail {

struct FftwBuffer
{
  explicit FftwBuffer(std::size_t n)
    : ptr(fftw_alloc_complex(n))
  {
    if (!ptr) {
      throw std::bad_alloc();
    }
  }
  ~FftwBuffer() { fftw_free(ptr); }
  FftwBuffer(FftwBuffer const &) = delete;
  FftwBuffer &operator=(FftwBuffer const &) = delete;

  fftw_complex *ptr;
};

/// FFTW planning is not thread-safe; plans are created once per (H, W, direction) under a lock.
/// Execution through fftw_execute_dft on fresh aligned buffers is.
class PlanCache
{
public:
  static PlanCache &instance()
  {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(std::size_t h, std::size_t w, int sign)
  {
    std::lock_guard lock(mutex_);
    auto key = std::make_tuple(h, w, sign);
    if (auto it = plans_.find(key); it != plans_.end()) {
      return it->second;
    }
    FftwBuffer tmp(h * w);
    fftw_plan p = fftw_plan_dft_2d(
      static_cast<int>(h), static_cast<int>(w), tmp.ptr, tmp.ptr, sign, FFTW_ESTIMATE | FFTW_DESTROY_INPUT);
    if (!p) {
      throw Error("FFTW failed to create a plan");
    }
    plans_.emplace(key, p);
    return p;
  }

  ~PlanCache()
  {
    for (auto &[key, p] : plans_) {
      fftw_destroy_plan(p);
    }
  }

private:
  PlanCache() = default;
  std::mutex mutex_;
  std::map<std::tuple<std::size_t, std::size_t, int>, fftw_plan> plans_;
};

/// Unshift into the buffer (centre -> origin), transform in place, shift back out with scaling.
inline ComplexImage centered_transform(ComplexImage const &in, int sign)
{
  std::size_t const h = in.height(), w = in.width();
  ComplexImage out(h, w);
  if (in.size() == 0) {
    return out;
  }
  fftw_plan plan = PlanCache::instance().get(h, w, sign);
  FftwBuffer buf(h * w);
  std::size_t const sh = h / 2, sw = w / 2;
  for (std::size_t r = 0; r < h; ++r) {
    std::size_t const rr = (r + h - sh) % h;
    for (std::size_t c = 0; c < w; ++c) {
      std::size_t const cc = (c + w - sw) % w;
      cx const v = in(r, c);
      buf.ptr[rr * w + cc][0] = v.real();
      buf.ptr[rr * w + cc][1] = v.imag();
    }
  }
  fftw_execute_dft(plan, buf.ptr, buf.ptr);
  double const scale = 1.0 / std::sqrt(static_cast<double>(h * w));
  for (std::size_t r = 0; r < h; ++r) {
    std::size_t const rr = (r + sh) % h;
    for (std::size_t c = 0; c < w; ++c) {
      std::size_t const cc = (c + sw) % w;
      out(rr, cc) = cx(buf.ptr[r * w + c][0], buf.ptr[r * w + c][1]) * scale;
    }
  }
  return out;
}

} // namespace detail

inline ComplexImage fft2c(ComplexImage const &image) { return detail::centered_transform(image, FFTW_FORWARD); }

inline ComplexImage ifft2c(ComplexImage const &kspace) { return detail::centered_transform(kspace, FFTW_BACKWARD); }

} // namespace mocosim
