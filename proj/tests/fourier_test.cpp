#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

using namespace mocosim;
using mocosim::test::random_complex;

namespace {

/// Direct O(N^2) centered DFT: K(u, v) = 1/sqrt(HW) sum x(r, c) exp(-2 pi i ((u-cu)(r-cr)/H + (v-cv)(c-cc)/W)).
ComplexImage brute_force_centered_dft(ComplexImage const &x, double sign)
{
  std::size_t const h = x.height(), w = x.width();
  double const cr = static_cast<double>(h / 2), cc = static_cast<double>(w / 2);
  ComplexImage out(h, w);
  for (std::size_t u = 0; u < h; ++u) {
    for (std::size_t v = 0; v < w; ++v) {
      cx acc{};
      for (std::size_t r = 0; r < h; ++r) {
        for (std::size_t c = 0; c < w; ++c) {
          double const phase = sign * 2.0 * std::numbers::pi *
                               ((u - cr) * (r - cr) / static_cast<double>(h) + (v - cc) * (c - cc) / static_cast<double>(w));
          acc += x(r, c) * std::polar(1.0, phase);
        }
      }
      out(u, v) = acc / std::sqrt(static_cast<double>(h * w));
    }
  }
  return out;
}

} // namespace

TEST_CASE("fft2c of a centred impulse is constant 1/sqrt(HW)", "[fourier]")
{
  ComplexImage delta(8, 8);
  delta(4, 4) = 1.0;
  ComplexImage const k = fft2c(delta);
  for (auto const &v : k.data()) {
    CHECK(std::abs(v - cx(0.125, 0.0)) < 1e-15);
  }
  // and back
  ComplexImage const back = ifft2c(k);
  CHECK(relative_error(back, delta) < 1e-15);
}

TEST_CASE("ifft2c of a constant grid is a centred impulse", "[fourier]")
{
  ComplexImage ones(6, 10, std::vector<cx>(60, cx(1.0, 0.0)));
  ComplexImage const x = ifft2c(ones);
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 10; ++c) {
      cx const expected = (r == 3 && c == 5) ? cx(std::sqrt(60.0)) : cx(0.0);
      CHECK(std::abs(x(r, c) - expected) < 1e-13);
    }
  }
}

TEST_CASE("fft2c matches a brute-force centred DFT on odd and even grids", "[fourier]")
{
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{6, 5}, {7, 8}, {4, 4}, {9, 3}}) {
    ComplexImage const x = random_complex(h, w, h * 100 + w);
    CHECK(relative_error(fft2c(x), brute_force_centered_dft(x, -1.0)) < 1e-12);
    CHECK(relative_error(ifft2c(x), brute_force_centered_dft(x, +1.0)) < 1e-12);
  }
}

TEST_CASE("centred FFT invariants", "[fourier][property]")
{
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    SplitMix64 g(seed);
    std::size_t const h = 1 + g.below(40), w = 1 + g.below(40);
    ComplexImage const x = random_complex(h, w, seed);
    ComplexImage const k = fft2c(x);
    INFO("size " << h << "x" << w);
    // Parseval
    CHECK(std::abs(norm(k.data()) - norm(x.data())) / norm(x.data()) < 1e-12);
    // inverse pair
    CHECK(relative_error(ifft2c(k), x) < 1e-12);
    CHECK(relative_error(fft2c(ifft2c(x)), x) < 1e-12);
    // linearity
    ComplexImage const y = random_complex(h, w, seed + 1000);
    cx const a(0.3, -1.2), b(-2.0, 0.5);
    ComplexImage combo(h, w), expect(h, w);
    ComplexImage const iy = ifft2c(y), ix = ifft2c(x);
    for (std::size_t i = 0; i < combo.size(); ++i) {
      combo[i] = a * x[i] + b * y[i];
      expect[i] = a * ix[i] + b * iy[i];
    }
    CHECK(relative_error(ifft2c(combo), expect) < 1e-12);
  }
}

TEST_CASE("zero image transforms to zero", "[fourier]")
{
  ComplexImage const z(16, 12);
  CHECK(fft2c(z) == z);
  CHECK(ifft2c(z) == z);
}

TEST_CASE("concurrent transforms agree with sequential ones", "[fourier]")
{
  std::vector<ComplexImage> inputs, expected;
  for (std::uint64_t s = 0; s < 8; ++s) {
    inputs.push_back(random_complex(24 + s, 17, s));
    expected.push_back(fft2c(inputs.back()));
  }
  std::vector<ComplexImage> got(inputs.size());
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    pool.emplace_back([&, i] { got[i] = fft2c(inputs[i]); });
  }
  for (auto &t : pool) {
    t.join();
  }
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    CHECK(got[i] == expected[i]);
  }
}
