#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <gpdiscrim/rng.hpp>
#include <vector>

using gpdiscrim::CounterRng;

TEST_CASE("same seed reproduces the same stream") {
  CounterRng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a() == b());
}

TEST_CASE("different seeds and substreams decorrelate") {
  CounterRng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (a() == b()) ++equal;
  CHECK(equal == 0);

  CounterRng root(7);
  CounterRng s0 = root.split(0), s1 = root.split(1);
  equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (s0() == s1()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("split is independent of the parent's consumption") {
  CounterRng a(9);
  CounterRng b(9);
  for (int i = 0; i < 17; ++i) (void)b();  // advance one copy only
  CounterRng sa = a.split(3), sb = b.split(3);
  for (int i = 0; i < 100; ++i) CHECK(sa() == sb());
}

TEST_CASE("uniform lands in [0,1) with the right mean") {
  CounterRng rng(123);
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("normal has zero mean and unit variance") {
  CounterRng rng(321);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(static_cast<double>(n)));
  CHECK(var == doctest::Approx(1.0).epsilon(0.02));
}
