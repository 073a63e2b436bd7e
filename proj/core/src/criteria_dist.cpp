#include "gpdiscrim/criteria_dist.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "gpdiscrim/errors.hpp"
#include "gpdiscrim/gp.hpp"
#include "gpdiscrim/parallel.hpp"

namespace gpdiscrim {

namespace {

double entrywise_power_sum(const Matrix& diff, double p) {
  if (p == 2.0) return diff.array().square().sum();
  if (p == 1.0) return diff.array().abs().sum();
  return diff.array().abs().pow(p).sum();
}

// Symmetric PSD square root; eigenvalues in [-1e-10 tr, 0) are clipped,
// anything lower is an error.
Matrix psd_sqrt(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success)
    throw numeric_error(std::string(what) + ": eigendecomposition failed");
  const double floor = -1e-10 * m.trace();
  Vector lam = es.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam(i) < floor)
      throw numeric_error(std::string(what) +
                          ": matrix is not positive semidefinite");
    lam(i) = std::sqrt(std::max(lam(i), 0.0));
  }
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

double trace_of_psd_sqrt(const Matrix& m, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es;
  es.compute(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error(std::string(what) + ": eigendecomposition failed");
  const double floor = -1e-10 * m.trace();
  double sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double lam = es.eigenvalues()(i);
    if (lam < floor)
      throw numeric_error(std::string(what) +
                          ": matrix is not positive semidefinite");
    sum += std::sqrt(std::max(lam, 0.0));
  }
  return sum;
}

struct KlTraces {
  double tr01;     // tr(K0 K1^{-1})
  double tr10;     // tr(K1 K0^{-1})
  double logdet0;  // log det K0
  double logdet1;  // log det K1
};

KlTraces kl_traces(const ModelPair& pair,
                   const Eigen::Ref<const Matrix>& points) {
  const Matrix k0 = kernel_matrix(pair.k0, points);
  const Matrix k1 = kernel_matrix(pair.k1, points);
  const Matrix l0 = cholesky(k0);
  const Matrix l1 = cholesky(k1);
  auto solve_trace = [](const Matrix& l, const Matrix& rhs) {
    Matrix v = rhs;
    l.triangularView<Eigen::Lower>().solveInPlace(v);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
    return v.trace();
  };
  KlTraces t;
  t.tr01 = solve_trace(l1, k0);
  t.tr10 = solve_trace(l0, k1);
  t.logdet0 = 2.0 * l0.diagonal().array().log().sum();
  t.logdet1 = 2.0 * l1.diagonal().array().log().sum();
  return t;
}

}  // namespace

std::string CriterionId::name() const {
  switch (kind) {
    case Kind::kPhiKl: return "Phi-KL";
    case Kind::kPhiF: return "Phi-F";
    case Kind::kPhiP:
      if (p == 1.0) return "Phi-1";
      if (p == 2.0) return "Phi-2";
      return "Phi-p(" + std::to_string(p) + ")";
    case Kind::kPhiDs: return "Phi-Ds";
    case Kind::kPhiU: return "Phi-U";
    case Kind::kPhiGamma: return "Phi-Gamma";
    case Kind::kPhiA: return "phi-a";
    case Kind::kPhiB: return "phi-b";
    case Kind::kPhiKlInc: return "phi-kl";
    case Kind::kSequential: return "seq";
  }
  throw std::invalid_argument("CriterionId::name: unknown kind");
}

CriterionId CriterionId::parse(const std::string& name) {
  if (name == "Phi-KL") return {Kind::kPhiKl, 0.0};
  if (name == "Phi-F") return {Kind::kPhiF, 0.0};
  if (name == "Phi-1") return {Kind::kPhiP, 1.0};
  if (name == "Phi-2") return {Kind::kPhiP, 2.0};
  if (name == "Phi-p") return {Kind::kPhiP, 2.0};  // exponent set via --p
  if (name == "Phi-Ds") return {Kind::kPhiDs, 0.0};
  if (name == "Phi-U") return {Kind::kPhiU, 0.0};
  if (name == "Phi-Gamma") return {Kind::kPhiGamma, 0.0};
  if (name == "phi-a") return {Kind::kPhiA, 0.0};
  if (name == "phi-b") return {Kind::kPhiB, 0.0};
  if (name == "phi-kl") return {Kind::kPhiKlInc, 0.0};
  if (name == "seq") return {Kind::kSequential, 0.0};
  std::string known;
  for (const auto& k : known_names()) known += " " + k;
  throw std::invalid_argument("unknown criterion '" + name +
                              "'; valid ids:" + known);
}

std::vector<std::string> CriterionId::known_names() {
  return {"Phi-KL", "Phi-F",  "Phi-1", "Phi-2",  "Phi-p", "Phi-Ds",
          "Phi-U",  "Phi-Gamma", "phi-a", "phi-b", "phi-kl", "seq"};
}

double phi_kl_design(const ModelPair& pair,
                     const Eigen::Ref<const Matrix>& points) {
  pair.validate();
  const KlTraces t = kl_traces(pair, points);
  return 0.5 * (t.tr01 + t.tr10) - static_cast<double>(points.rows());
}

double phi_frechet(const ModelPair& pair,
                   const Eigen::Ref<const Matrix>& points) {
  pair.validate();
  const Matrix k0 = kernel_matrix(pair.k0, points);
  const Matrix k1 = kernel_matrix(pair.k1, points);
  const Matrix s0 = psd_sqrt(k0, "phi_frechet");
  const double cross = trace_of_psd_sqrt(s0 * k1 * s0, "phi_frechet");
  return k0.trace() + k1.trace() - 2.0 * cross;
}

double phi_p_design(const ModelPair& pair,
                    const Eigen::Ref<const Matrix>& points, double p) {
  pair.validate();
  if (!(p > 0.0)) throw std::invalid_argument("phi_p_design: p must be > 0");
  const Matrix diff =
      kernel_matrix(pair.k1, points) - kernel_matrix(pair.k0, points);
  return entrywise_power_sum(diff, p);
}

double phi_ds(const KernelSpec& matern_general,
              const Eigen::Ref<const Matrix>& points) {
  if (matern_general.family != KernelFamily::kMaternGeneral)
    throw std::invalid_argument("phi_ds: requires the general Matern kernel");
  const Matrix k = kernel_matrix(matern_general, points);
  const Matrix l = cholesky(k);
  auto solve_mat = [&l](const Matrix& rhs) {
    Matrix v = rhs;
    l.triangularView<Eigen::Lower>().solveInPlace(v);
    l.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
    return v;
  };
  const Matrix a = solve_mat(kernel_partial(matern_general, points,
                                            KernelParam::kTheta));
  const Matrix b = solve_mat(kernel_partial(matern_general, points,
                                            KernelParam::kNu));
  const double m_tt = 0.5 * a.cwiseProduct(a.transpose()).sum();
  const double m_tn = 0.5 * a.cwiseProduct(b.transpose()).sum();
  const double m_nn = 0.5 * b.cwiseProduct(b.transpose()).sum();
  if (!(m_tt > 0.0) || !std::isfinite(m_tt))
    throw numeric_error("phi_ds: parameters locally unidentifiable "
                        "(no information about theta)");
  return (m_tt * m_nn - m_tn * m_tn) / m_tt;
}

double phi_upper(const ModelPair& pair,
                 const Eigen::Ref<const Matrix>& points) {
  pair.validate();
  const KlTraces t = kl_traces(pair, points);
  const double n = static_cast<double>(points.rows());
  return 0.5 * pair.prior0 * pair.prior1 * (t.tr01 + t.tr10 - 2.0 * n);
}

double phi_gamma(const ModelPair& pair,
                 const Eigen::Ref<const Matrix>& points) {
  pair.validate();
  const KlTraces t = kl_traces(pair, points);
  const double n = static_cast<double>(points.rows());
  const double g01 = t.tr01 - (t.logdet0 - t.logdet1) - n;
  const double g10 = t.tr10 - (t.logdet1 - t.logdet0) - n;
  const double p0 = pair.prior0, p1 = pair.prior1;
  return -p0 * std::log(p0 + p1 * std::exp(-0.5 * g01)) -
         p1 * std::log(p1 + p0 * std::exp(-0.5 * g10));
}

double criterion_value(const CriterionId& id, const ModelPair& pair,
                       const Eigen::Ref<const Matrix>& points,
                       const std::optional<KernelSpec>& ds_spec) {
  switch (id.kind) {
    case CriterionId::Kind::kPhiKl: return phi_kl_design(pair, points);
    case CriterionId::Kind::kPhiF: return phi_frechet(pair, points);
    case CriterionId::Kind::kPhiP: return phi_p_design(pair, points, id.p);
    case CriterionId::Kind::kPhiU: return phi_upper(pair, points);
    case CriterionId::Kind::kPhiGamma: return phi_gamma(pair, points);
    case CriterionId::Kind::kPhiDs:
      if (!ds_spec)
        throw std::invalid_argument(
            "criterion_value: Phi-Ds needs local Matern parameters");
      return phi_ds(*ds_spec, points);
    default:
      throw std::invalid_argument(
          "criterion_value: '" + id.name() +
          "' is a pointwise score, not a design criterion");
  }
}

double phi_p_weighted(const ModelPair& pair, const WeightedPoints& mu,
                      double p) {
  pair.validate();
  if (mu.points.rows() == 0)
    throw std::invalid_argument("phi_p_weighted: empty point set");
  const Eigen::Index m = mu.points.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const double t = (mu.points.row(i) - mu.points.row(j)).norm();
      total += 2.0 * mu.weights(i) * mu.weights(j) *
               std::pow(psi_value(pair, t), p);
    }
    total += mu.weights(i) * mu.weights(i) *
             std::pow(psi_value(pair, 0.0), p);
  }
  return total;
}

namespace {

// Minimisation of a criterion over theta_1 with everything else fixed:
// log-spaced grid scan (parallel) then golden-section refinement.
CalibrationResult minimise_over_theta(
    const std::function<double(double)>& value, double lo, double hi) {
  if (!(lo > 0.0) || !(hi > lo))
    throw std::invalid_argument("calibrate: need 0 < lo < hi");
  const int grid_n = 200;
  const double lla = std::log(lo), llb = std::log(hi);
  std::vector<double> thetas(grid_n), values(grid_n);
  for (int i = 0; i < grid_n; ++i)
    thetas[i] = std::exp(lla + (llb - lla) * i / (grid_n - 1));
  parallel_for(grid_n, [&](std::size_t i) { values[i] = value(thetas[i]); },
               4);
  int best = 0;
  for (int i = 1; i < grid_n; ++i)
    if (values[i] < values[best]) best = i;

  double a = thetas[std::max(best - 1, 0)];
  double b = thetas[std::min(best + 1, grid_n - 1)];
  const double gr = 0.61803398874989484820;
  double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
  double f1 = value(x1), f2 = value(x2);
  while (b - a > 1e-4) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - gr * (b - a);
      f1 = value(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + gr * (b - a);
      f2 = value(x2);
    }
  }
  CalibrationResult result;
  result.theta1 = 0.5 * (a + b);
  result.value = value(result.theta1);
  result.at_boundary = (best == 0 || best == grid_n - 1);
  return result;
}

// Per-criterion evaluator for theta_1 sweeps with the K0 side cached.
class ThetaSweep {
public:
  ThetaSweep(const ModelPair& pair, const CriterionId& id,
             const Eigen::Ref<const Matrix>& points)
      : pair_(pair), id_(id), points_(points) {
    pair_.validate();
    const Eigen::Index n = points_.rows();
    dist_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      dist_(i, i) = 0.0;
      for (Eigen::Index j = 0; j < i; ++j) {
        dist_(i, j) = (points_.row(i) - points_.row(j)).norm();
        dist_(j, i) = dist_(i, j);
      }
    }
    k0_ = kernel_matrix(pair_.k0, points_);
    switch (id_.kind) {
      case CriterionId::Kind::kPhiKl:
      case CriterionId::Kind::kPhiU:
      case CriterionId::Kind::kPhiGamma: {
        const Matrix l0 = cholesky(k0_);
        logdet0_ = 2.0 * l0.diagonal().array().log().sum();
        Matrix inv = Matrix::Identity(n, n);
        l0.triangularView<Eigen::Lower>().solveInPlace(inv);
        l0.triangularView<Eigen::Lower>().transpose().solveInPlace(inv);
        k0inv_ = std::move(inv);
        break;
      }
      case CriterionId::Kind::kPhiF:
        s0_ = psd_sqrt(k0_, "calibrate");
        break;
      case CriterionId::Kind::kPhiP:
        break;
      default:
        throw std::invalid_argument("calibrate: criterion '" + id_.name() +
                                    "' has no free theta_1 to calibrate");
    }
  }

  Matrix k1_matrix(double theta1) const {
    const KernelSpec k1 = pair_.k1.with_inverse_length(theta1);
    const Eigen::Index n = points_.rows();
    Matrix k(n, n);
    const double diag = k1.variance();
    for (Eigen::Index i = 0; i < n; ++i) {
      k(i, i) = diag;
      for (Eigen::Index j = 0; j < i; ++j) {
        k(i, j) = kernel_value(k1, dist_(i, j));
        k(j, i) = k(i, j);
      }
    }
    return k;
  }

  double operator()(double theta1) const {
    const Matrix k1 = k1_matrix(theta1);
    const Eigen::Index n = points_.rows();
    switch (id_.kind) {
      case CriterionId::Kind::kPhiKl:
      case CriterionId::Kind::kPhiU:
      case CriterionId::Kind::kPhiGamma: {
        const Matrix l1 = cholesky(k1);
        Matrix v = k0_;
        l1.triangularView<Eigen::Lower>().solveInPlace(v);
        l1.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
        const double tr01 = v.trace();
        const double tr10 = k1.cwiseProduct(k0inv_).sum();
        if (id_.kind == CriterionId::Kind::kPhiKl)
          return 0.5 * (tr01 + tr10) - static_cast<double>(n);
        if (id_.kind == CriterionId::Kind::kPhiU)
          return 0.5 * pair_.prior0 * pair_.prior1 *
                 (tr01 + tr10 - 2.0 * static_cast<double>(n));
        const double logdet1 = 2.0 * l1.diagonal().array().log().sum();
        const double g01 = tr01 - (logdet0_ - logdet1) - n;
        const double g10 = tr10 - (logdet1 - logdet0_) - n;
        return -pair_.prior0 *
                   std::log(pair_.prior0 +
                            pair_.prior1 * std::exp(-0.5 * g01)) -
               pair_.prior1 *
                   std::log(pair_.prior1 +
                            pair_.prior0 * std::exp(-0.5 * g10));
      }
      case CriterionId::Kind::kPhiF:
        return k0_.trace() + k1.trace() -
               2.0 * trace_of_psd_sqrt(s0_ * k1 * s0_, "calibrate");
      case CriterionId::Kind::kPhiP:
        return entrywise_power_sum(k1 - k0_, id_.p);
      default:
        throw std::invalid_argument("calibrate: unsupported criterion");
    }
  }

private:
  ModelPair pair_;
  CriterionId id_;
  Matrix points_;
  Matrix dist_;
  Matrix k0_;
  Matrix k0inv_;
  Matrix s0_;
  double logdet0_ = 0.0;
};

}  // namespace

CalibrationResult calibrate_on_design(const ModelPair& pair_template,
                                      const CriterionId& criterion,
                                      const Eigen::Ref<const Matrix>& points,
                                      double lo, double hi) {
  const ThetaSweep sweep(pair_template, criterion, points);
  return minimise_over_theta([&](double t) { return sweep(t); }, lo, hi);
}

CalibrationResult calibrate_on_measure(const ModelPair& pair_template,
                                       double p, const WeightedPoints& mu,
                                       double lo, double hi) {
  if (!(p > 0.0))
    throw std::invalid_argument("calibrate_on_measure: p must be > 0");
  ModelPair pair = pair_template;
  auto value = [&](double theta1) {
    ModelPair adjusted = pair;
    adjusted.k1 = pair.k1.with_inverse_length(theta1);
    return phi_p_weighted(adjusted, mu, p);
  };
  return minimise_over_theta(value, lo, hi);
}

std::vector<std::pair<double, double>> criterion_sweep(
    const ModelPair& pair_template, const CriterionId& criterion,
    const Eigen::Ref<const Matrix>& points, double lo, double hi, int count) {
  if (count < 2) throw std::invalid_argument("criterion_sweep: count >= 2");
  const ThetaSweep sweep(pair_template, criterion, points);
  std::vector<std::pair<double, double>> out(count);
  std::vector<double> thetas(count);
  const double lla = std::log(lo), llb = std::log(hi);
  for (int i = 0; i < count; ++i)
    thetas[i] = std::exp(lla + (llb - lla) * i / (count - 1));
  parallel_for(count, [&](std::size_t i) {
    out[i] = {thetas[i], sweep(thetas[i])};
  }, 4);
  return out;
}

}  // namespace gpdiscrim
