#include <random>

#include "doctest.h"
#include "treatsim/belief.hpp"
#include "treatsim/error.hpp"
#include "treatsim/utility.hpp"

using namespace treatsim;

TEST_CASE("cpuc on both branches") {
  CHECK(cpuc(800, 4, 100) == 200.0);
  CHECK(cpuc(300, 0, 100) == 400.0);
  CHECK(cpuc(300, -1, 100) == 500.0);
  CHECK(cpuc(300, 1, 100) == 300.0);
  CHECK(cpuc(0, 0, 100) == 100.0);
}

TEST_CASE("cpuc is continuous at one and non-increasing in delta") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> cost(0.0, 2000.0);
  std::uniform_real_distribution<double> delta(-20.0, 30.0);
  for (int i = 0; i < 5000; ++i) {
    const double c = cost(rng);
    CHECK(cpuc(c, std::nextafter(1.0, 0.0), 100) == doctest::Approx(c).epsilon(1e-9));
    const double a = delta(rng), b = delta(rng);
    if (a <= b) REQUIRE(cpuc(c, a, 100) >= cpuc(c, b, 100));
  }
}

TEST_CASE("osf_adjust") {
  CHECK(osf_adjust(200, 10, 10, 5) == 200.0);
  CHECK(osf_adjust(200, 5, 10, 3) == doctest::Approx(201.5));
  CHECK(osf_adjust(123.4, 2, 20, 0) == 123.4);
  CHECK(osf_adjust(100, -5, 10, 2) == doctest::Approx(103.0));
  CHECK_THROWS_AS(osf_adjust(100, 0, 0, 1), Error);
  CHECK_THROWS_AS(osf_adjust(100, 0, -1, 1), Error);
  CHECK_THROWS_AS(osf_adjust(100, 0, 10, -1), Error);
  CHECK_THROWS_AS(osf_adjust(100, 11, 10, 1), Error);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double dmax = 1.0 + 39.0 * u(rng);
    const double d = dmax * u(rng);
    const double o1 = 15.0 * u(rng), o2 = 15.0 * u(rng);
    const double term = osf_adjust(0.0, d, dmax, o1);
    REQUIRE(term >= 0.0);
    REQUIRE(term <= o1 + 1e-12);
    if (o1 <= o2) REQUIRE(osf_adjust(50, d, dmax, o1) <= osf_adjust(50, d, dmax, o2));
    REQUIRE(osf_adjust(50, dmax, dmax, o1) == 50.0);
  }
}

TEST_CASE("delta_max_for uses the ceiling with a floor") {
  const ScaleConfig cfg;
  CHECK(delta_max_for(Belief::at_intake(OutcomeScore{20}), cfg) == 20.0);
  CHECK(delta_max_for(Belief::at_intake(OutcomeScore{40}), cfg) == 1.0);
  CHECK(delta_max_for(Belief::at_intake(OutcomeScore{0}), cfg) == 40.0);
  CHECK(delta_max_for(Belief::at_intake(OutcomeScore{39.5}), cfg, 2.0) == 2.0);
}
