#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "tcoh/rng.hpp"

using namespace tcoh::rng;

TEST_SUITE("rng") {

// Reference vectors from the Random123 distribution (philox4x32, 10 rounds),
// cross-checked against an independent reimplementation.
TEST_CASE("philox4x32-10 known answers") {
  auto expect = [](U32x4 got, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                   std::uint32_t d) {
    CHECK(got.v[0] == a);
    CHECK(got.v[1] == b);
    CHECK(got.v[2] == c);
    CHECK(got.v[3] == d);
  };
  const std::uint32_t zeros[4] = {0, 0, 0, 0};
  expect(philox4x32(zeros, 0), 0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
         0x9b00dbd8u);
  const std::uint32_t ones[4] = {0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu,
                                 0xFFFFFFFFu};
  expect(philox4x32(ones, 0xFFFFFFFFFFFFFFFFull), 0x408f276du, 0x41c83b0eu,
         0xa20bc7c6u, 0x6d5451fdu);
  const std::uint32_t pi_digits[4] = {0x243F6A88u, 0x85A308D3u, 0x13198A2Eu,
                                      0x03707344u};
  expect(philox4x32(pi_digits, 0x299F31D0A4093822ull), 0xd16cfe09u,
         0x94fdccebu, 0x5001e420u, 0x24126ea1u);
}

TEST_CASE("philox_at counter/stream packing known answers") {
  auto expect = [](U32x4 got, std::uint32_t a, std::uint32_t b, std::uint32_t c,
                   std::uint32_t d) {
    CHECK(got.v[0] == a);
    CHECK(got.v[1] == b);
    CHECK(got.v[2] == c);
    CHECK(got.v[3] == d);
  };
  expect(philox_at(0, 0, 0), 0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
         0x9b00dbd8u);
  expect(philox_at(1, 2, 3), 0xde08bf52u, 0x663eff4fu, 0x8759c4e2u,
         0xbdd5e548u);
  expect(philox_at(0xDEADBEEFCAFEBABEull, 42, 7), 0xef1ad8cfu, 0xd61eba79u,
         0xaea05b7du, 0x7b6dbd8eu);
  expect(philox_at(~0ull, ~0ull, ~0ull), 0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
         0x6d5451fdu);
  expect(philox_at(0x243F6A8885A308D3ull, 0, 1), 0xd5461dd6u, 0xb95c1713u,
         0xf5311ba0u, 0xda6995a8u);
}

TEST_CASE("derived variates are frozen") {
  CHECK(uniform01(0, 0, 0) == 0.88052019788861435);
  double z0, z1;
  normal_pair(42, 1, 5, &z0, &z1);
  CHECK(z0 == 0.045916984137608828);
  CHECK(z1 == -0.25816056058402648);
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
  CHECK(splitmix64(1) == 0x910A2DEC89025CC1ull);
}

TEST_CASE("to_unit stays inside the open interval") {
  CHECK(to_unit(0) > 0.0);
  CHECK(to_unit(~0ull) < 1.0);
  CHECK(to_unit(0) == 0.5 * 0x1p-53);
}

TEST_CASE("normal() splits pairs consistently") {
  for (std::uint64_t i = 0; i < 32; ++i) {
    double z0, z1;
    normal_pair(7, 3, i >> 1, &z0, &z1);
    CHECK(normal(7, 3, i) == ((i & 1) ? z1 : z0));
  }
}

TEST_CASE("normal_fill equals per-index normal() for any alignment") {
  for (std::uint64_t start : {0ull, 1ull, 5ull}) {
    for (std::int64_t count : {1, 2, 3, 7, 64}) {
      std::vector<double> dst(static_cast<std::size_t>(count));
      normal_fill(11, 4, start, count, dst.data());
      for (std::int64_t k = 0; k < count; ++k)
        CHECK(dst[static_cast<std::size_t>(k)] ==
              normal(11, 4, start + static_cast<std::uint64_t>(k)));
    }
  }
}

TEST_CASE("moments of uniform and normal streams") {
  const std::int64_t m = 200000;
  double su = 0.0, su2 = 0.0, sn = 0.0, sn2 = 0.0;
  for (std::int64_t i = 0; i < m; ++i) {
    const double u = uniform01(123, 9, static_cast<std::uint64_t>(i));
    su += u;
    su2 += u * u;
    const double z = normal(123, 10, static_cast<std::uint64_t>(i));
    sn += z;
    sn2 += z * z;
  }
  const double dm = static_cast<double>(m);
  CHECK(su / dm == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / dm - (su / dm) * (su / dm) ==
        doctest::Approx(1.0 / 12.0).epsilon(0.02));
  CHECK(sn / dm == doctest::Approx(0.0).scale(1).epsilon(0.01));
  CHECK(sn2 / dm == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("streams do not collide") {
  // Same counter, different streams / seeds give different blocks.
  const U32x4 a = philox_at(5, 1, 9);
  const U32x4 b = philox_at(5, 2, 9);
  const U32x4 c = philox_at(6, 1, 9);
  CHECK((a.v[0] != b.v[0] || a.v[1] != b.v[1]));
  CHECK((a.v[0] != c.v[0] || a.v[1] != c.v[1]));
}

}  // TEST_SUITE
