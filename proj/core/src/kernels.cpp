#include "gpdiscrim/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "gpdiscrim/bessel.hpp"
#include "gpdiscrim/errors.hpp"

namespace gpdiscrim {

namespace {
constexpr double kSqrt3 = 1.7320508075688772935;
constexpr double kSqrt5 = 2.2360679774997896964;

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw std::invalid_argument(std::string("KernelSpec: ") + name +
                                " must be positive and finite");
}
}  // namespace

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::kMatern32: return "matern32";
    case KernelFamily::kMatern52: return "matern52";
    case KernelFamily::kMaternGeneral: return "matern";
    case KernelFamily::kExponential: return "exponential";
    case KernelFamily::kExponentialScaled: return "exponential-scaled";
  }
  throw std::invalid_argument("family_name: unknown family");
}

KernelFamily parse_family(const std::string& name) {
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  if (name == "matern") return KernelFamily::kMaternGeneral;
  if (name == "exponential") return KernelFamily::kExponential;
  if (name == "exponential-scaled") return KernelFamily::kExponentialScaled;
  throw std::invalid_argument(
      "parse_family: unknown kernel family '" + name +
      "' (expected matern32, matern52, matern, exponential, "
      "exponential-scaled)");
}

KernelSpec KernelSpec::matern32(double theta, double sigma2) {
  KernelSpec s;
  s.family = KernelFamily::kMatern32;
  s.sigma2 = sigma2;
  s.theta = theta;
  s.validate();
  return s;
}

KernelSpec KernelSpec::matern52(double theta, double sigma2) {
  KernelSpec s;
  s.family = KernelFamily::kMatern52;
  s.sigma2 = sigma2;
  s.theta = theta;
  s.validate();
  return s;
}

KernelSpec KernelSpec::matern_general(double theta, double nu, double sigma2) {
  KernelSpec s;
  s.family = KernelFamily::kMaternGeneral;
  s.sigma2 = sigma2;
  s.theta = theta;
  s.nu = nu;
  s.validate();
  return s;
}

KernelSpec KernelSpec::exponential(double alpha, double sigma2) {
  KernelSpec s;
  s.family = KernelFamily::kExponential;
  s.sigma2 = sigma2;
  s.alpha = alpha;
  s.validate();
  return s;
}

KernelSpec KernelSpec::exponential_scaled(double alpha) {
  KernelSpec s;
  s.family = KernelFamily::kExponentialScaled;
  s.sigma2 = 1.0;
  s.alpha = alpha;
  s.validate();
  return s;
}

void KernelSpec::validate() const {
  switch (family) {
    case KernelFamily::kMatern32:
    case KernelFamily::kMatern52:
      require_positive(sigma2, "sigma2");
      require_positive(theta, "theta");
      break;
    case KernelFamily::kMaternGeneral:
      require_positive(sigma2, "sigma2");
      require_positive(theta, "theta");
      require_positive(nu, "nu");
      if (nu > 50.0)
        throw std::invalid_argument(
            "KernelSpec: nu outside supported range (0, 50]");
      break;
    case KernelFamily::kExponential:
      require_positive(sigma2, "sigma2");
      require_positive(alpha, "alpha");
      break;
    case KernelFamily::kExponentialScaled:
      require_positive(alpha, "alpha");
      break;
  }
}

double KernelSpec::variance() const {
  return family == KernelFamily::kExponentialScaled ? 1.0 / alpha : sigma2;
}

double KernelSpec::inverse_length() const {
  switch (family) {
    case KernelFamily::kExponential:
    case KernelFamily::kExponentialScaled:
      return alpha;
    default:
      return theta;
  }
}

KernelSpec KernelSpec::with_inverse_length(double value) const {
  KernelSpec s = *this;
  switch (family) {
    case KernelFamily::kExponential:
    case KernelFamily::kExponentialScaled:
      s.alpha = value;
      break;
    default:
      s.theta = value;
      break;
  }
  s.validate();
  return s;
}

KernelSpec KernelSpec::with_sigma2(double value) const {
  KernelSpec s = *this;
  s.sigma2 = value;
  s.validate();
  return s;
}

double kernel_value(const KernelSpec& spec, double r) {
  if (!(r >= 0.0) || !std::isfinite(r))
    throw std::invalid_argument("kernel_value: distance must be finite, >= 0");
  if (r == 0.0) return spec.variance();
  switch (spec.family) {
    case KernelFamily::kMatern32: {
      const double u = kSqrt3 * spec.theta * r;
      return spec.sigma2 * (1.0 + u) * std::exp(-u);
    }
    case KernelFamily::kMatern52: {
      const double u = kSqrt5 * spec.theta * r;
      return spec.sigma2 * (1.0 + u + u * u / 3.0) * std::exp(-u);
    }
    case KernelFamily::kMaternGeneral: {
      const double rt = r * spec.theta;
      if (rt > 100.0)
        throw std::invalid_argument(
            "kernel_value: r*theta outside supported range (0, 100]");
      const double z = std::sqrt(2.0 * spec.nu) * rt;
      // 2^{1-nu}/Gamma(nu) z^nu K_nu(z), assembled in log space.
      const double log_c = (1.0 - spec.nu) * M_LN2 - std::lgamma(spec.nu) +
                           spec.nu * std::log(z) + log_bessel_k(spec.nu, z);
      return spec.sigma2 * std::exp(log_c);
    }
    case KernelFamily::kExponential:
      return spec.sigma2 * std::exp(-spec.alpha * r);
    case KernelFamily::kExponentialScaled:
      return std::exp(-spec.alpha * r) / spec.alpha;
  }
  throw std::invalid_argument("kernel_value: unknown family");
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& xp) {
  if (x.size() != xp.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  if (!x.allFinite() || !xp.allFinite())
    throw std::invalid_argument("kernel_eval: non-finite coordinates");
  return kernel_value(spec, (x - xp).norm());
}

Matrix kernel_matrix(const KernelSpec& spec,
                     const Eigen::Ref<const Matrix>& points) {
  const Eigen::Index n = points.rows();
  if (n < 1) throw std::invalid_argument("kernel_matrix: empty point set");
  if (!points.allFinite())
    throw std::invalid_argument("kernel_matrix: non-finite coordinates");
  Matrix k(n, n);
  const double diag = spec.variance();
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = diag;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_value(spec, (points.row(i) - points.row(j)).norm());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Vector kernel_vector(const KernelSpec& spec,
                     const Eigen::Ref<const Matrix>& points,
                     const Eigen::Ref<const Vector>& x) {
  const Eigen::Index n = points.rows();
  if (n < 1) throw std::invalid_argument("kernel_vector: empty point set");
  if (points.cols() != x.size())
    throw std::invalid_argument("kernel_vector: dimension mismatch");
  if (!x.allFinite())
    throw std::invalid_argument("kernel_vector: non-finite coordinates");
  Vector k(n);
  for (Eigen::Index i = 0; i < n; ++i)
    k(i) = kernel_value(spec, (points.row(i).transpose() - x).norm());
  return k;
}

double kernel_value_partial(const KernelSpec& spec, double r,
                            KernelParam which) {
  if (spec.family != KernelFamily::kMaternGeneral)
    throw std::invalid_argument(
        "kernel_value_partial: parameter derivatives are only provided for "
        "the general Matern family");
  KernelSpec lo = spec, hi = spec;
  double h;
  if (which == KernelParam::kTheta) {
    h = 1e-6 * std::max(1.0, spec.theta);
    lo.theta -= h;
    hi.theta += h;
  } else {
    h = 1e-6 * std::max(1.0, spec.nu);
    lo.nu -= h;
    hi.nu += h;
  }
  return (kernel_value(hi, r) - kernel_value(lo, r)) / (2.0 * h);
}

Matrix kernel_partial(const KernelSpec& spec,
                      const Eigen::Ref<const Matrix>& points,
                      KernelParam which) {
  if (spec.family != KernelFamily::kMaternGeneral)
    throw std::invalid_argument(
        "kernel_partial: parameter derivatives are only provided for the "
        "general Matern family");
  const Eigen::Index n = points.rows();
  if (n < 1) throw std::invalid_argument("kernel_partial: empty point set");
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;  // variance does not depend on theta or nu
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_value_partial(
          spec, (points.row(i) - points.row(j)).norm(), which);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

void ModelPair::validate() const {
  k0.validate();
  k1.validate();
  if (!(prior0 >= 0.0) || !(prior1 >= 0.0) ||
      std::fabs(prior0 + prior1 - 1.0) > 1e-12)
    throw std::invalid_argument(
        "ModelPair: priors must be nonnegative and sum to one");
}

double psi_value(const ModelPair& pair, double t) {
  return std::fabs(kernel_value(pair.k1, t) - kernel_value(pair.k0, t));
}

DeltaResult find_delta(const ModelPair& pair, double t_max) {
  pair.validate();
  if (t_max <= 0.0)
    t_max = 5.0 / std::min(pair.k0.inverse_length(), pair.k1.inverse_length());

  // Global grid scan first; psi is unimodal in the cases of interest but we
  // do not assume it.
  const int grid_n = 10000;
  double best_t = t_max, best_v = -1.0;
  for (int i = 1; i <= grid_n; ++i) {
    const double t = t_max * static_cast<double>(i) / grid_n;
    const double v = psi_value(pair, t);
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  const double scale =
      std::max(pair.k0.variance(), pair.k1.variance());
  if (best_v <= 1e-14 * scale)
    throw numeric_error(
        "find_delta: psi is flat, no discrimination possible");

  // Golden-section refinement around the grid maximiser.
  const double step = t_max / grid_n;
  double a = std::max(best_t - step, step * 1e-3);
  double b = std::min(best_t + step, t_max);
  const double gr = 0.61803398874989484820;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = psi_value(pair, x1), f2 = psi_value(pair, x2);
  while (b - a > 1e-8) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = psi_value(pair, x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = psi_value(pair, x1);
    }
  }
  const double delta = 0.5 * (a + b);
  return DeltaResult{delta, psi_value(pair, delta)};
}

DesignSpace DesignSpace::box(const Vector& lower, const Vector& upper) {
  DesignSpace s;
  s.lower = lower;
  s.upper = upper;
  s.validate();
  return s;
}

DesignSpace DesignSpace::cube(int dim, double lo, double hi) {
  DesignSpace s;
  s.lower = Vector::Constant(dim, lo);
  s.upper = Vector::Constant(dim, hi);
  s.validate();
  return s;
}

void DesignSpace::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size())
    throw std::invalid_argument("DesignSpace: inconsistent bounds");
  for (Eigen::Index i = 0; i < lower.size(); ++i)
    if (!(lower(i) < upper(i)))
      throw std::invalid_argument("DesignSpace: lower must be < upper");
  for (int r : grid_resolution)
    if (r < 2)
      throw std::invalid_argument("DesignSpace: grid resolution must be >= 2");
}

Matrix DesignSpace::grid(int res) const {
  const int d = dim();
  std::vector<int> resolution(d, res);
  if (res <= 0) {
    if (static_cast<int>(grid_resolution.size()) != d)
      throw std::invalid_argument("DesignSpace::grid: no resolution given");
    resolution = grid_resolution;
  }
  long total = 1;
  for (int r : resolution) total *= r;
  Matrix out(total, d);
  std::vector<int> idx(d, 0);
  for (long row = 0; row < total; ++row) {
    for (int j = 0; j < d; ++j)
      out(row, j) = lower(j) + (upper(j) - lower(j)) * idx[j] /
                                   static_cast<double>(resolution[j] - 1);
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < resolution[j]) break;
      idx[j] = 0;
    }
  }
  return out;
}

std::pair<Matrix, Vector> DesignSpace::midpoint_quadrature(int res) const {
  if (res < 1)
    throw std::invalid_argument("midpoint_quadrature: resolution must be >= 1");
  const int d = dim();
  long total = 1;
  for (int j = 0; j < d; ++j) total *= res;
  Matrix pts(total, d);
  double cell = 1.0;
  for (int j = 0; j < d; ++j) cell *= (upper(j) - lower(j)) / res;
  std::vector<int> idx(d, 0);
  for (long row = 0; row < total; ++row) {
    for (int j = 0; j < d; ++j)
      pts(row, j) =
          lower(j) + (upper(j) - lower(j)) * (idx[j] + 0.5) / res;
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[j] < res) break;
      idx[j] = 0;
    }
  }
  return {pts, Vector::Constant(total, cell)};
}

bool DesignSpace::contains(const Eigen::Ref<const Vector>& x,
                           double tol) const {
  if (x.size() != lower.size()) return false;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (x(i) < lower(i) - tol || x(i) > upper(i) + tol) return false;
  return true;
}

}  // namespace gpdiscrim
