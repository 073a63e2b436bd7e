#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <gpdiscrim/errors.hpp>
#include <gpdiscrim/kernels.hpp>
#include <gpdiscrim/rng.hpp>

#ifdef GPDISCRIM_HAVE_BOOST_MATH
#include <boost/math/special_functions/bessel.hpp>
#endif

using namespace gpdiscrim;

namespace {
Vector pt(double x) {
  Vector v(1);
  v(0) = x;
  return v;
}

Matrix random_points(int n, int dim, std::uint64_t seed, double scale = 3.0) {
  CounterRng rng(seed);
  Matrix pts(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) pts(i, j) = scale * rng.uniform();
  return pts;
}
}  // namespace

TEST_CASE("diagonal values") {
  CHECK(kernel_value(KernelSpec::matern32(1.0), 0.0) == 1.0);
  CHECK(kernel_value(KernelSpec::matern52(2.0, 3.0), 0.0) == 3.0);
  CHECK(kernel_value(KernelSpec::exponential_scaled(2.0), 0.0) == 0.5);
}

TEST_CASE("general Matern matches the fixed-nu closed forms") {
  for (double theta : {0.5, 1.0, 1.7}) {
    const KernelSpec g32 = KernelSpec::matern_general(theta, 1.5);
    const KernelSpec g52 = KernelSpec::matern_general(theta, 2.5);
    const KernelSpec m32 = KernelSpec::matern32(theta);
    const KernelSpec m52 = KernelSpec::matern52(theta);
    for (double r : {0.01, 0.1, 0.5, 1.0, 3.0, 8.0}) {
      CHECK(kernel_value(g32, r) ==
            doctest::Approx(kernel_value(m32, r)).epsilon(1e-10));
      CHECK(kernel_value(g52, r) ==
            doctest::Approx(kernel_value(m52, r)).epsilon(1e-10));
    }
  }
}

#ifdef GPDISCRIM_HAVE_BOOST_MATH
TEST_CASE("general Matern against an independent Bessel evaluation") {
  for (double nu : {0.7, 1.5, 3.1}) {
    const KernelSpec spec = KernelSpec::matern_general(1.3, nu, 2.0);
    for (double r : {0.1, 1.0, 3.0}) {
      const double z = std::sqrt(2.0 * nu) * 1.3 * r;
      const double expected = 2.0 * std::pow(2.0, 1.0 - nu) /
                              std::tgamma(nu) * std::pow(z, nu) *
                              boost::math::cyl_bessel_k(nu, z);
      CHECK(kernel_value(spec, r) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}
#endif

TEST_CASE("monotone decay in distance") {
  for (const KernelSpec& spec :
       {KernelSpec::matern32(1.0), KernelSpec::matern52(0.7),
        KernelSpec::matern_general(1.1, 2.2), KernelSpec::exponential(2.0),
        KernelSpec::exponential_scaled(3.0)}) {
    double prev = kernel_value(spec, 0.0);
    for (int i = 1; i <= 60; ++i) {
      const double v = kernel_value(spec, 0.1 * i);
      CHECK(v <= prev + 1e-15);
      prev = v;
    }
  }
}

TEST_CASE("kernel_eval is symmetric and validates input") {
  const KernelSpec spec = KernelSpec::matern52(1.2);
  CounterRng rng(5);
  for (int i = 0; i < 50; ++i) {
    Vector a(3), b(3);
    for (int j = 0; j < 3; ++j) {
      a(j) = rng.uniform();
      b(j) = rng.uniform();
    }
    CHECK(kernel_eval(spec, a, b) == kernel_eval(spec, b, a));
  }
  Vector bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(kernel_eval(spec, bad, bad), std::invalid_argument);
}

TEST_CASE("invalid parameters are rejected") {
  KernelSpec s = KernelSpec::matern32(1.0);
  s.theta = -1.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  s = KernelSpec::matern_general(1.0, 1.5);
  s.nu = 0.0;
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  CHECK_THROWS_AS(KernelSpec::exponential(-2.0), std::invalid_argument);
}

TEST_CASE("kernel_matrix basics") {
  const KernelSpec spec = KernelSpec::matern32(1.0, 2.5);
  Matrix one(1, 1);
  one << 0.7;
  const Matrix k1 = kernel_matrix(spec, one);
  CHECK(k1.rows() == 1);
  CHECK(k1(0, 0) == 2.5);

  Matrix dup(2, 1);
  dup << 0.3, 0.3;
  const Matrix kd = kernel_matrix(spec, dup);
  CHECK(kd.determinant() == doctest::Approx(0.0).epsilon(1e-12));

  Matrix two(2, 1);
  two << 0.0, 0.5;
  const Matrix k2 = kernel_matrix(KernelSpec::matern32(1.0), two);
  const double expected =
      (1.0 + std::sqrt(3.0) * 0.5) * std::exp(-std::sqrt(3.0) * 0.5);
  CHECK(k2(0, 1) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(k2(1, 0) == k2(0, 1));
}

TEST_CASE("kernel matrices are PSD on random designs") {
  for (std::uint64_t seed : {11u, 22u, 33u}) {
    const Matrix pts = random_points(12, 2, seed);
    for (const KernelSpec& spec :
         {KernelSpec::matern32(0.8), KernelSpec::matern_general(1.0, 3.7),
          KernelSpec::exponential(1.5)}) {
      const Matrix k = kernel_matrix(spec, pts);
      CHECK((k - k.transpose()).norm() == 0.0);  // assembled symmetric
      Eigen::SelfAdjointEigenSolver<Matrix> es(k);
      CHECK(es.eigenvalues().minCoeff() >= -1e-8 * k.trace());
    }
  }
}

TEST_CASE("kernel_vector matches matrix columns") {
  const KernelSpec spec = KernelSpec::matern52(1.3, 1.7);
  const Matrix pts = random_points(6, 2, 77);
  const Matrix k = kernel_matrix(spec, pts);
  for (int j = 0; j < 6; ++j) {
    const Vector col = kernel_vector(spec, pts, pts.row(j).transpose());
    CHECK((col - k.col(j)).norm() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(col(j) == 1.7);
  }
  Matrix empty(0, 2);
  CHECK_THROWS_AS(kernel_vector(spec, empty, pts.row(0).transpose()),
                  std::invalid_argument);
}

TEST_CASE("partial derivatives: diagonal zero, finite-difference oracle") {
  const KernelSpec spec = KernelSpec::matern_general(1.0, 1.5);
  const Matrix pts = random_points(5, 1, 3);
  const Matrix dth = kernel_partial(spec, pts, KernelParam::kTheta);
  const Matrix dnu = kernel_partial(spec, pts, KernelParam::kNu);
  for (int i = 0; i < 5; ++i) {
    CHECK(dth(i, i) == 0.0);
    CHECK(dnu(i, i) == 0.0);
  }

  // Independent central differences with a different step.
  auto fd = [&](double r, KernelParam which, double h) {
    KernelSpec lo = spec, hi = spec;
    if (which == KernelParam::kTheta) {
      lo.theta -= h;
      hi.theta += h;
    } else {
      lo.nu -= h;
      hi.nu += h;
    }
    return (kernel_value(hi, r) - kernel_value(lo, r)) / (2 * h);
  };
  const double r = 1.0;
  CHECK(kernel_value_partial(spec, r, KernelParam::kTheta) ==
        doctest::Approx(fd(r, KernelParam::kTheta, 1e-5)).epsilon(1e-5));
  CHECK(kernel_value_partial(spec, r, KernelParam::kNu) ==
        doctest::Approx(fd(r, KernelParam::kNu, 1e-4)).epsilon(1e-4));

  CHECK_THROWS_AS(kernel_partial(KernelSpec::matern32(1.0), pts,
                                 KernelParam::kTheta),
                  std::invalid_argument);
}

TEST_CASE("psi and find_delta") {
  // psi(0) = 0 when the diagonals agree
  ModelPair pair{KernelSpec::matern32(1.0), KernelSpec::matern52(1.07)};
  CHECK(psi_value(pair, 0.0) == 0.0);

  SUBCASE("paper values for Delta") {
    CHECK(find_delta(pair).delta == doctest::Approx(1.92).epsilon(0.006));
    ModelPair same_theta{KernelSpec::matern32(1.0), KernelSpec::matern52(1.0)};
    CHECK(find_delta(same_theta).delta == doctest::Approx(0.7).epsilon(0.015));
    ModelPair exp_vs_m52{KernelSpec::exponential(1.0),
                         KernelSpec::matern52(1.0)};
    CHECK(find_delta(exp_vs_m52).delta ==
          doctest::Approx(0.53).epsilon(0.01));
  }

  SUBCASE("identical kernels have no maximiser") {
    ModelPair same{KernelSpec::matern32(1.0), KernelSpec::matern32(1.0)};
    CHECK_THROWS_AS(find_delta(same), numeric_error);
  }

  SUBCASE("swap invariance") {
    const double d1 = find_delta(pair).delta;
    const double d2 = find_delta(pair.swapped()).delta;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-9));
  }
}

TEST_CASE("design space grids") {
  const DesignSpace space = DesignSpace::cube(2, 0.0, 10.0);
  const Matrix g = space.grid(25);
  CHECK(g.rows() == 625);
  CHECK(g.col(0).minCoeff() == 0.0);
  CHECK(g.col(1).maxCoeff() == 10.0);

  const auto [qp, qw] = space.midpoint_quadrature(10);
  CHECK(qp.rows() == 100);
  CHECK(qw.sum() == doctest::Approx(100.0).epsilon(1e-12));  // box volume

  CHECK(space.contains(pt(5.0).replicate(2, 1)));
  CHECK_FALSE(space.contains(Vector::Constant(2, 11.0)));

  DesignSpace bad;
  bad.lower = Vector::Constant(2, 1.0);
  bad.upper = Vector::Constant(2, 1.0);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
