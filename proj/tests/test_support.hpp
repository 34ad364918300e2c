#pragma once

#include <mocosim/mocosim.hpp>

#include <filesystem>
#include <string>

namespace mocosim::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(std::string const &tag)
  {
    static std::uint64_t counter = 0;
    SplitMix64 g(reinterpret_cast<std::uintptr_t>(this) ^ ++counter);
    path_ = std::filesystem::temp_directory_path() / ("mocosim-" + tag + "-" + std::to_string(g.next() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(TempDir const &) = delete;
  TempDir &operator=(TempDir const &) = delete;

  std::filesystem::path const &path() const { return path_; }
  std::filesystem::path operator/(std::string const &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline ComplexImage random_complex(std::size_t h, std::size_t w, std::uint64_t seed)
{
  SplitMix64 g(seed);
  ComplexImage x(h, w);
  for (auto &v : x.data()) {
    v = cx(g.normal(), g.normal());
  }
  return x;
}

inline RealImage random_real(std::size_t h, std::size_t w, std::uint64_t seed)
{
  SplitMix64 g(seed);
  RealImage x(h, w);
  for (auto &v : x.data()) {
    v = g.canonical();
  }
  return x;
}

inline Tensor<cx> random_tensor(std::vector<std::size_t> dims, std::uint64_t seed)
{
  SplitMix64 g(seed);
  Tensor<cx> t(std::move(dims));
  for (auto &v : t.data()) {
    v = cx(g.normal(), g.normal());
  }
  return t;
}

/// Zeroes every entry of per-shot k-space that lies off the shot's rows.
inline MultishotKSpace random_multishot(SamplingPattern const &pattern, std::size_t coils, std::size_t w, std::uint64_t seed)
{
  std::size_t const h = pattern.height();
  MultishotKSpace y(random_tensor({pattern.num_shots(), coils, h, w}, seed));
  for (std::size_t s = 0; s < pattern.num_shots(); ++s) {
    for (std::size_t c = 0; c < coils; ++c) {
      auto slice = y.slice(s, c);
      for (std::size_t r = 0; r < h; ++r) {
        if (!pattern.samples(s, r)) {
          std::fill_n(slice.begin() + r * w, w, cx{});
        }
      }
    }
  }
  return y;
}

} // namespace mocosim::test
