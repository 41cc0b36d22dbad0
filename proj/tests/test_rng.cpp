#include <cmath>
#include <vector>

#include "doctest.h"
#include "subloo/errors.hpp"
#include "subloo/rng.hpp"

using namespace subloo;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Published counter/key test vectors for the 10-round 4x32 variant.
  {
    const auto out = Rng::philox4x32_10({0u, 0u, 0u, 0u}, {0u, 0u});
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    const auto out = Rng::philox4x32_10(
        {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
        {0xa4093822u, 0x299f31d0u});
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("streams are reproducible and distinct") {
  Rng a1(42, 7), a2(42, 7), b(42, 8);
  bool any_diff = false;
  for (int i = 0; i < 64; ++i) {
    const std::uint64_t x = a1.next_u64();
    CHECK(x == a2.next_u64());
    any_diff = any_diff || (x != b.next_u64());
  }
  CHECK(any_diff);
}

TEST_CASE("derive separates replicates and purpose tags") {
  Rng a = Rng::derive(1, 0, "plan");
  Rng b = Rng::derive(1, 1, "plan");
  Rng c = Rng::derive(1, 0, "noise");
  const std::uint64_t xa = a.next_u64();
  CHECK(xa != b.next_u64());
  CHECK(xa != c.next_u64());
  Rng a_again = Rng::derive(1, 0, "plan");
  CHECK(xa == a_again.next_u64());
}

TEST_CASE("next_double lies in [0,1) with the right mean") {
  Rng rng(9, 0);
  double acc = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    acc += u;
  }
  CHECK(acc / 100000.0 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("next_below is unbiased over a small range") {
  Rng rng(10, 0);
  std::vector<int> counts(10, 0);
  const int reps = 100000;
  for (int i = 0; i < reps; ++i)
    ++counts[static_cast<std::size_t>(rng.next_below(10))];
  for (const int c : counts)
    CHECK(static_cast<double>(c) / reps == doctest::Approx(0.1).epsilon(0.15));
  CHECK_THROWS_AS(rng.next_below(0), ValidationError);
}

TEST_CASE("next_normal has standard moments") {
  Rng rng(11, 0);
  const int reps = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double z = rng.next_normal();
    s1 += z;
    s2 += z * z;
  }
  const double mean = s1 / reps;
  const double var = s2 / reps - mean * mean;
  CHECK(mean == doctest::Approx(0.0).epsilon(1.0).scale(0.01));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("next_gamma has the right mean and variance") {
  Rng rng(12, 0);
  const double shape = 3.5;
  const int reps = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < reps; ++i) {
    const double g = rng.next_gamma(shape);
    REQUIRE(g > 0.0);
    s1 += g;
    s2 += g * g;
  }
  const double mean = s1 / reps;
  const double var = s2 / reps - mean * mean;
  CHECK(mean == doctest::Approx(shape).epsilon(0.02));
  CHECK(var == doctest::Approx(shape).epsilon(0.05));
  CHECK_THROWS_AS(rng.next_gamma(0.5), ValidationError);
}
