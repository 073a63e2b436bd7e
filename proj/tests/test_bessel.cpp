#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <gpdiscrim/bessel.hpp>
#include <stdexcept>

#ifdef GPDISCRIM_HAVE_BOOST_MATH
#include <boost/math/special_functions/bessel.hpp>
#endif

using gpdiscrim::bessel_k;
using gpdiscrim::log_bessel_k;

namespace {
// Half-integer orders have elementary closed forms.
double k_half(double x) { return std::sqrt(M_PI / (2 * x)) * std::exp(-x); }
double k_3half(double x) { return k_half(x) * (1.0 + 1.0 / x); }
double k_5half(double x) { return k_half(x) * (1.0 + 3.0 / x + 3.0 / (x * x)); }
}  // namespace

TEST_CASE("half-integer closed forms") {
  for (double x : {0.05, 0.3, 1.0, 1.99, 2.0, 2.5, 7.0, 40.0}) {
    CHECK(bessel_k(0.5, x) == doctest::Approx(k_half(x)).epsilon(1e-13));
    CHECK(bessel_k(1.5, x) == doctest::Approx(k_3half(x)).epsilon(1e-13));
    CHECK(bessel_k(2.5, x) == doctest::Approx(k_5half(x)).epsilon(1e-13));
  }
}

TEST_CASE("frozen high-precision reference values") {
  // (nu, x, log K_nu(x)) from a 40-digit mpmath evaluation
  const struct {
    double nu, x, log_k;
  } cases[] = {
      {0.1, 0.05, 1.1589991497398515219},
      {0.1, 1.0, -0.86140976163042263353},
      {0.1, 3.0, -3.3584214887938401915},
      {0.5, 0.5, 0.072364942924700087072},
      {0.5, 2.5, -2.7323540132923501002},
      {1.5, 0.01, 7.133496962480032536},
      {1.5, 1.0, -0.08106146679532725822},
      {1.5, 19.0, -20.195134842550942264},
      {2.5, 0.3, 4.319514594361339596},
      {3.3, 4.2, -3.5818727591091200138},
      {7.7, 0.7, 15.298770125133376109},
      {12.0, 12.0, -7.585410925858570189},
      {25.0, 0.1, 128.98478488997136383},
      {25.0, 60.0, -56.72622016405454461},
      {49.5, 2.0, 141.9035215562403061},
      {50.0, 0.001, 523.91771973778701692},
      {50.0, 900.0, -901.78778233943654585},
      {0.75, 150.0, -152.2784880782212098},
  };
  for (const auto& c : cases)
    CHECK(log_bessel_k(c.nu, c.x) ==
          doctest::Approx(c.log_k).epsilon(1e-13));
}

#ifdef GPDISCRIM_HAVE_BOOST_MATH
TEST_CASE("agrees with boost::math over a grid") {
  for (double nu : {0.25, 0.5, 1.0, 1.5, 2.5, 4.9, 9.5, 17.0, 33.3}) {
    for (double x : {0.01, 0.2, 1.0, 1.999, 2.0, 2.001, 5.0, 25.0, 90.0}) {
      const double reference = boost::math::cyl_bessel_k(nu, x);
      if (!std::isfinite(reference) || reference == 0.0) continue;
      CHECK(log_bessel_k(nu, x) ==
            doctest::Approx(std::log(reference)).epsilon(1e-12));
    }
  }
}
#endif

TEST_CASE("recurrence self-consistency in log scale") {
  // K_{nu+1}(x) = K_{nu-1}(x) + (2 nu / x) K_nu(x)
  for (double nu : {1.3, 6.8, 20.4}) {
    for (double x : {0.4, 3.0, 55.0}) {
      const double km = bessel_k(nu - 1.0, x);
      const double k0 = bessel_k(nu, x);
      const double kp =
          std::exp(log_bessel_k(nu + 1.0, x) - log_bessel_k(nu, x)) * k0;
      CHECK(kp == doctest::Approx(km + 2.0 * nu / x * k0).epsilon(1e-11));
    }
  }
}

TEST_CASE("domain limits are enforced") {
  CHECK_THROWS_AS(log_bessel_k(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_bessel_k(-1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_bessel_k(50.5, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(log_bessel_k(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(log_bessel_k(1.0, -2.0), std::invalid_argument);
  CHECK_THROWS_AS(log_bessel_k(1.0, 2.0e4), std::invalid_argument);
}
