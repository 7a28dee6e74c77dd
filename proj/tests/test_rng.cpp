#include <doctest.h>

#include <cmath>

#include "rsjd/rng.hpp"

using rsjd::CounterRng;

// Known-answer vectors of Philox4x32-10.
TEST_CASE("philox known answers") {
  CounterRng zero(0, 0, 0);
  CHECK(zero() == 0x6627e8d5e169c58dULL);
  CHECK(zero() == 0xbc57ac4c9b00dbd8ULL);

  CounterRng pi(0x299f31d0a4093822ULL, 0x0370734413198a2eULL, 0x85a308d3243f6a88ULL);
  CHECK(pi() == 0xd16cfe0994fdccebULL);
  CHECK(pi() == 0x5001e42024126ea1ULL);
}

TEST_CASE("streams are reproducible and distinct") {
  CounterRng a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int k = 0; k < 100; ++k) {
    const auto x = a();
    CHECK(x == b());
    differs = differs || x != c();
  }
  CHECK(differs);
}

TEST_CASE("uniform and normal moments") {
  CounterRng r(1, 0);
  double su = 0, sn = 0, sn2 = 0;
  bool open = true;
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const double u = r.uniform();
    open = open && u > 0.0 && u < 1.0;
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(open);
  CHECK(std::abs(su / n - 0.5) < 3 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 3 / std::sqrt(double(n)));
  CHECK(std::abs(sn2 / n - 1.0) < 3 * std::sqrt(2.0 / n));
}
