#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace mocosim;

TEST_CASE("single coil normalizes to unit magnitude", "[coils]")
{
  auto const maps = gen_gaussian_maps(1, 20, 24, 0.5, 3);
  for (auto const &v : maps.coil(0)) {
    CHECK(std::abs(std::abs(v) - 1.0) < 1e-12);
  }
}

TEST_CASE("generated maps are SOS-normalized", "[coils][property]")
{
  for (std::size_t c : {1, 2, 3, 4, 8, 12}) {
    for (double sigma : {0.01, 0.2, 0.5, 2.0}) {
      auto const maps = gen_gaussian_maps(c, 32, 21, sigma, c * 7);
      INFO("C=" << c << " sigma=" << sigma);
      CHECK(maps.num_coils() == c);
      CHECK(maps.sos_deviation() <= 1e-12);
      CHECK(all_finite<cx>(maps.tensor().data()));
    }
  }
}

TEST_CASE("maps are deterministic given the seed", "[coils]")
{
  auto const a = gen_gaussian_maps(4, 64, 64, 0.5, 42);
  auto const b = gen_gaussian_maps(4, 64, 64, 0.5, 42);
  CHECK(a.tensor() == b.tensor());
  auto const c = gen_gaussian_maps(4, 64, 64, 0.5, 43);
  CHECK_FALSE(a.tensor() == c.tensor());
}

TEST_CASE("each coil peaks near its boundary anchor and carries phase", "[coils]")
{
  auto const maps = gen_gaussian_maps(4, 64, 64, 0.3, 1);
  // Coil 0 sits at angle 0 (right edge), coil 1 at 90 degrees (top edge).
  auto const at = [&](std::size_t c, std::size_t r, std::size_t col) { return std::abs(maps.coil(c)[r * 64 + col]); };
  CHECK(at(0, 32, 63) > at(0, 32, 0));
  CHECK(at(1, 0, 32) > at(1, 63, 32));
  bool complex_valued = false;
  for (auto const &v : maps.coil(2)) {
    complex_valued |= std::abs(v.imag()) > 1e-3;
  }
  CHECK(complex_valued);
}

TEST_CASE("invalid coil requests are rejected", "[coils]")
{
  CHECK_THROWS_AS(gen_gaussian_maps(0, 8, 8, 0.5, 0), InvalidArgument);
  CHECK_THROWS_AS(gen_gaussian_maps(2, 8, 8, 0.0, 0), InvalidArgument);
  CHECK_THROWS_AS(gen_gaussian_maps(2, 8, 8, 2.5, 0), InvalidArgument);
  Tensor<cx> bad({2, 2, 2}, std::vector<cx>(8, cx(1.0)));
  CHECK_THROWS_AS(SensitivityMaps(bad), InvalidArgument);
  CHECK(SensitivityMaps::normalized(bad).sos_deviation() < 1e-15);
  CHECK_THROWS_AS(SensitivityMaps::normalized(Tensor<cx>({2, 2, 2})), InvalidArgument);
}
