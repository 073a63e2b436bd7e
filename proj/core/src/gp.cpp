#include "gpdiscrim/gp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "gpdiscrim/errors.hpp"

namespace gpdiscrim {

namespace {
constexpr double kLog2Pi = 1.8378770664093454836;
}

void Design::validate() const {
  if (!points.allFinite())
    throw std::invalid_argument("Design: non-finite coordinates");
  if (y && y->size() != points.rows())
    throw std::invalid_argument(
        "Design: observation count does not match point count");
}

void Design::append(const Eigen::Ref<const Vector>& x) {
  if (y)
    throw std::invalid_argument(
        "Design::append: design with observations needs a value for the new "
        "point");
  if (points.rows() > 0 && points.cols() != x.size())
    throw std::invalid_argument("Design::append: dimension mismatch");
  points.conservativeResize(points.rows() + 1,
                            points.rows() == 0 ? x.size() : points.cols());
  points.row(points.rows() - 1) = x.transpose();
}

void Design::append(const Eigen::Ref<const Vector>& x, double obs) {
  if (points.rows() == 0) {
    points.resize(1, x.size());
    points.row(0) = x.transpose();
    y = Vector::Constant(1, obs);
    return;
  }
  if (!y) throw std::invalid_argument("Design::append: no observation vector");
  if (points.cols() != x.size())
    throw std::invalid_argument("Design::append: dimension mismatch");
  points.conservativeResize(points.rows() + 1, points.cols());
  points.row(points.rows() - 1) = x.transpose();
  y->conservativeResize(y->size() + 1);
  (*y)(y->size() - 1) = obs;
}

Matrix cholesky(const Eigen::Ref<const Matrix>& k) {
  Eigen::LLT<Matrix> llt(k);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  // Re-run a plain right-looking factorization to locate the bad pivot.
  const Eigen::Index n = k.rows();
  Matrix l = k;
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = l(j, j);
    for (Eigen::Index t = 0; t < j; ++t) d -= l(j, t) * l(j, t);
    if (!(d > 0.0) || !std::isfinite(d))
      throw factorization_error(
          "cholesky: matrix is not positive definite at pivot " +
              std::to_string(j) + " (duplicate or near-duplicate points?)",
          static_cast<int>(j));
    l(j, j) = std::sqrt(d);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double s = l(i, j);
      for (Eigen::Index t = 0; t < j; ++t) s -= l(i, t) * l(j, t);
      l(i, j) = s / l(j, j);
    }
  }
  throw factorization_error("cholesky: factorization failed", -1);
}

Predictor::Predictor(const KernelSpec& spec, const Design& design)
    : spec_(spec), points_(design.points) {
  design.validate();
  spec_.validate();
  if (design.n() == 0) return;  // no-data state: prior mean and variance
  k_ = kernel_matrix(spec_, points_);
  l_ = cholesky(k_);
  if (design.y) {
    y_ = *design.y;
    Vector w = *design.y;
    l_.triangularView<Eigen::Lower>().solveInPlace(w);
    l_.triangularView<Eigen::Lower>().transpose().solveInPlace(w);
    weights_ = std::move(w);
  }
}

Vector Predictor::solve(const Eigen::Ref<const Vector>& rhs) const {
  Vector v = rhs;
  l_.triangularView<Eigen::Lower>().solveInPlace(v);
  l_.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
  return v;
}

double Predictor::mean(const Eigen::Ref<const Vector>& x) const {
  if (!weights_)
    throw std::invalid_argument("Predictor::mean: no observations attached");
  return kernel_vector(spec_, points_, x).dot(*weights_);
}

double Predictor::variance(const Eigen::Ref<const Vector>& x) const {
  if (points_.rows() == 0) return kernel_value(spec_, 0.0);
  const Vector k = kernel_vector(spec_, points_, x);
  Vector v = k;
  l_.triangularView<Eigen::Lower>().solveInPlace(v);
  const double kxx = kernel_value(spec_, 0.0);
  double rho2 = kxx - v.squaredNorm();
  if (rho2 < 0.0) {
    if (rho2 < -1e-12 * kxx)
      throw numeric_error("Predictor::variance: negative predictive variance "
                          "beyond round-off tolerance");
    rho2 = 0.0;
  }
  return rho2;
}

Predictor::MeanVar Predictor::mean_and_variance(
    const Eigen::Ref<const Vector>& x) const {
  if (!weights_)
    throw std::invalid_argument(
        "Predictor::mean_and_variance: no observations attached");
  const Vector k = kernel_vector(spec_, points_, x);
  Vector v = k;
  l_.triangularView<Eigen::Lower>().solveInPlace(v);
  const double kxx = kernel_value(spec_, 0.0);
  double rho2 = kxx - v.squaredNorm();
  if (rho2 < 0.0) rho2 = std::max(rho2, 0.0);
  return MeanVar{k.dot(*weights_), rho2};
}

double Predictor::log_det() const {
  return 2.0 * l_.diagonal().array().log().sum();
}

double cross_mse(const Predictor& truth, const Predictor& predictor,
                 const Eigen::Ref<const Vector>& x) {
  if (predictor.n() == 0) return kernel_value(truth.spec(), 0.0);
  const Vector kp = kernel_vector(predictor.spec(), predictor.points(), x);
  const Vector kt = kernel_vector(truth.spec(), truth.points(), x);
  const Vector u = predictor.solve(kp);  // K_p^{-1} k_p(x)
  const double ktxx = kernel_value(truth.spec(), 0.0);
  double mse = ktxx + u.dot(truth.matrix() * u) - 2.0 * u.dot(kt);
  if (mse < 0.0) {
    if (mse < -1e-12 * ktxx)
      throw numeric_error(
          "cross_mse: negative value beyond round-off tolerance");
    mse = 0.0;
  }
  return mse;
}

double cross_mse(const ModelPair& pair, const Design& design, int truth,
                 int predictor, const Eigen::Ref<const Vector>& x) {
  pair.validate();
  const Predictor p0(pair.k0, design);
  const Predictor p1(pair.k1, design);
  const Predictor& t = truth == 0 ? p0 : p1;
  const Predictor& p = predictor == 0 ? p0 : p1;
  return cross_mse(t, p, x);
}

double log_likelihood(const KernelSpec& spec, const Design& design) {
  if (!design.y)
    throw std::invalid_argument("log_likelihood: design has no observations");
  const Predictor pred(spec, design);
  Vector v = *design.y;
  pred.chol().triangularView<Eigen::Lower>().solveInPlace(v);
  const double n = static_cast<double>(design.n());
  return -0.5 * n * kLog2Pi - 0.5 * pred.log_det() - 0.5 * v.squaredNorm();
}

Vector sample_gp(const KernelSpec& spec, const Eigen::Ref<const Matrix>& points,
                 CounterRng& rng) {
  Matrix k = kernel_matrix(spec, points);
  Matrix l;
  try {
    l = cholesky(k);
  } catch (const factorization_error&) {
    k.diagonal().array() += 1e-10 * spec.variance();
    l = cholesky(k);  // propagates if the jittered matrix still fails
  }
  Vector z(points.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
  return l.triangularView<Eigen::Lower>() * z;
}

MlFit ml_fit_theta(const KernelSpec& family_template, const Design& design,
                   double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("ml_fit_theta: need 0 < lo < hi");
  if (!design.y)
    throw std::invalid_argument("ml_fit_theta: design has no observations");
  if (family_template.family == KernelFamily::kExponentialScaled)
    throw std::invalid_argument(
        "ml_fit_theta: the scaled exponential family ties the variance to "
        "alpha; profile fitting is not defined for it");
  const double n = static_cast<double>(design.n());

  // Profile log-likelihood: sigma2 concentrated out as Y' C^{-1} Y / n.
  auto profile = [&](double log_theta) -> double {
    const KernelSpec spec = family_template.with_inverse_length(
        std::exp(log_theta)).with_sigma2(1.0);
    try {
      const Predictor pred(spec, design);
      Vector v = *design.y;
      pred.chol().triangularView<Eigen::Lower>().solveInPlace(v);
      const double q = v.squaredNorm();
      if (!(q > 0.0)) return -std::numeric_limits<double>::infinity();
      const double sigma2 = q / n;
      const double ll = -0.5 * n * (kLog2Pi + std::log(sigma2) + 1.0) -
                        0.5 * pred.log_det();
      return std::isfinite(ll) ? ll
                               : -std::numeric_limits<double>::infinity();
    } catch (const numeric_error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  // Coarse scan to bracket the maximiser, then golden-section refinement.
  const double la = std::log(lo), lb = std::log(hi);
  const int scan_n = 32;
  int best_i = -1;
  double best_v = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= scan_n; ++i) {
    const double t = la + (lb - la) * i / scan_n;
    const double v = profile(t);
    if (v > best_v) {
      best_v = v;
      best_i = i;
    }
  }
  if (best_i < 0 || !std::isfinite(best_v))
    throw numeric_error(
        "ml_fit_theta: likelihood non-finite over the whole interval");
  double a = la + (lb - la) * std::max(best_i - 1, 0) / scan_n;
  double b = la + (lb - la) * std::min(best_i + 1, scan_n) / scan_n;

  const double gr = 0.61803398874989484820;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = profile(x1), f2 = profile(x2);
  const double tol = 1e-5;
  while (b - a > tol * std::max(1.0, std::fabs(a) + std::fabs(b))) {
    if (f1 > f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = profile(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = profile(x2);
    }
  }
  const double log_theta = 0.5 * (a + b);
  const double theta = std::exp(log_theta);

  const KernelSpec spec =
      family_template.with_inverse_length(theta).with_sigma2(1.0);
  const Predictor pred(spec, design);
  Vector v = *design.y;
  pred.chol().triangularView<Eigen::Lower>().solveInPlace(v);
  const double sigma2 = v.squaredNorm() / n;
  MlFit fit;
  fit.theta = theta;
  fit.sigma2 = sigma2;
  fit.log_lik = profile(log_theta);
  fit.at_boundary = (log_theta - la < 2.0 * tol) || (lb - log_theta < 2.0 * tol);
  return fit;
}

}  // namespace gpdiscrim
