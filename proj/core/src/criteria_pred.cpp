#include "gpdiscrim/criteria_pred.hpp"

#include <cmath>
#include <stdexcept>

#include "gpdiscrim/errors.hpp"

namespace gpdiscrim {

namespace {
constexpr double kDegenerate = 1e-12;  // relative variance floor
}

PredictiveScores::PredictiveScores(const ModelPair& pair, const Design& design)
    : pair_(pair), p0_(pair.k0, design), p1_(pair.k1, design) {
  pair_.validate();
}

bool PredictiveScores::at_design_point(
    const Eigen::Ref<const Vector>& x) const {
  const Matrix& pts = p0_.points();
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    if ((pts.row(i).transpose() - x).norm() == 0.0) return true;
  return false;
}

PredictiveScores::MseQuartet PredictiveScores::quartet(
    const Eigen::Ref<const Vector>& x) const {
  const Vector k0 = kernel_vector(pair_.k0, p0_.points(), x);
  const Vector k1 = kernel_vector(pair_.k1, p1_.points(), x);
  const Vector u0 = p0_.solve(k0);
  const Vector u1 = p1_.solve(k1);
  const double v0 = pair_.k0.variance();
  const double v1 = pair_.k1.variance();
  MseQuartet q;
  q.e00 = v0 - k0.dot(u0);
  q.e11 = v1 - k1.dot(u1);
  q.e01 = v0 + u1.dot(p0_.matrix() * u1) - 2.0 * u1.dot(k0);
  q.e10 = v1 + u0.dot(p1_.matrix() * u0) - 2.0 * u0.dot(k1);
  return q;
}

double PredictiveScores::phi_a(const Eigen::Ref<const Vector>& x) const {
  if (at_design_point(x)) return 0.0;
  const MseQuartet q = quartet(x);
  return (q.e01 - q.e00) + (q.e10 - q.e11);
}

double PredictiveScores::phi_b(const Eigen::Ref<const Vector>& x) const {
  if (at_design_point(x)) return 0.0;
  const MseQuartet q = quartet(x);
  const double s0 = kDegenerate * pair_.k0.variance();
  const double s1 = kDegenerate * pair_.k1.variance();
  if (q.e00 < s0 || q.e11 < s1) {
    if (q.e00 < s0 && q.e11 < s1 && q.e01 < s0 && q.e10 < s1) return 0.0;
    throw numeric_error("phi_b: degenerate predictive variance at x");
  }
  return q.e01 / q.e00 + q.e10 / q.e11 - 2.0;
}

double PredictiveScores::phi_kl(const Eigen::Ref<const Vector>& x) const {
  if (at_design_point(x)) return 0.0;
  const MseQuartet q = quartet(x);
  const double s0 = kDegenerate * pair_.k0.variance();
  const double s1 = kDegenerate * pair_.k1.variance();
  if (q.e00 < s0 || q.e11 < s1) {
    if (q.e00 < s0 && q.e11 < s1 && q.e01 < s0 && q.e10 < s1) return 0.0;
    throw numeric_error("phi_kl: degenerate predictive variance at x");
  }
  return 0.5 * (q.e10 / q.e00 + q.e01 / q.e11) - 1.0;
}

double PredictiveScores::seq_score(const Eigen::Ref<const Vector>& x,
                                   SeqVariant variant) const {
  const auto mv0 = p0_.mean_and_variance(x);
  const auto mv1 = p1_.mean_and_variance(x);
  const double s0 = kDegenerate * pair_.k0.variance();
  const double s1 = kDegenerate * pair_.k1.variance();
  if (mv0.variance < s0 || mv1.variance < s1)
    throw numeric_error("seq_score: degenerate predictive variance at x");
  const double d2 = (mv1.mean - mv0.mean) * (mv1.mean - mv0.mean);
  switch (variant) {
    case SeqVariant::kSymKl:
      return mv0.variance / mv1.variance + mv1.variance / mv0.variance +
             d2 * (1.0 / mv0.variance + 1.0 / mv1.variance);
    case SeqVariant::kDiff:
      return d2;
    case SeqVariant::kNormDiff:
      return d2 / (mv0.variance + mv1.variance);
    case SeqVariant::kWeightedDiff:
      return d2 * (1.0 / mv0.variance + 1.0 / mv1.variance);
  }
  throw std::invalid_argument("seq_score: unknown variant");
}

double phi_a(const ModelPair& pair, const Design& design,
             const Eigen::Ref<const Vector>& x) {
  return PredictiveScores(pair, design).phi_a(x);
}

double phi_b(const ModelPair& pair, const Design& design,
             const Eigen::Ref<const Vector>& x) {
  return PredictiveScores(pair, design).phi_b(x);
}

double phi_kl_point(const ModelPair& pair, const Design& design,
                    const Eigen::Ref<const Vector>& x) {
  return PredictiveScores(pair, design).phi_kl(x);
}

double seq_score(const ModelPair& pair, const Design& design,
                 const Eigen::Ref<const Vector>& x, SeqVariant variant) {
  return PredictiveScores(pair, design).seq_score(x, variant);
}

double integrated_phi_a(const ModelPair& pair, const Design& design,
                        const WeightedPoints& mu) {
  pair.validate();
  if (mu.points.rows() == 0)
    throw std::invalid_argument("integrated_phi_a: empty quadrature set");
  if (mu.points.rows() != mu.weights.size())
    throw std::invalid_argument(
        "integrated_phi_a: weight count does not match point count");
  const Predictor p0(pair.k0, design);
  const Predictor p1(pair.k1, design);
  const Eigen::Index n = design.n();
  const Eigen::Index m = mu.points.rows();

  Matrix c0(n, m), c1(n, m);  // columns k_i(x_k)
  for (Eigen::Index k = 0; k < m; ++k) {
    const Vector x = mu.points.row(k).transpose();
    c0.col(k) = kernel_vector(pair.k0, design.points, x);
    c1.col(k) = kernel_vector(pair.k1, design.points, x);
  }
  const Matrix c0w = c0 * mu.weights.asDiagonal();
  const Matrix a0 = c0w * c0.transpose();
  const Matrix a1 = (c1 * mu.weights.asDiagonal()) * c1.transpose();
  const Matrix a01 = c0w * c1.transpose();  // int k0 k1' dmu

  auto solve_mat = [](const Predictor& p, const Matrix& rhs) {
    Matrix v = rhs;
    p.chol().triangularView<Eigen::Lower>().solveInPlace(v);
    p.chol().triangularView<Eigen::Lower>().transpose().solveInPlace(v);
    return v;
  };

  const Matrix k0inv_a0 = solve_mat(p0, a0);
  const Matrix k1inv_a1 = solve_mat(p1, a1);
  const Matrix k0inv_k1 = solve_mat(p0, p1.matrix());
  const Matrix k1inv_k0 = solve_mat(p1, p0.matrix());
  const Matrix k0inv_a01 = solve_mat(p0, a01);
  const Matrix k1inv_a01 = solve_mat(p1, a01);

  const double t0 = k0inv_a0.trace() +
                    (k1inv_k0 * k1inv_a1).trace() -
                    2.0 * k1inv_a01.trace();
  const double t1 = k1inv_a1.trace() +
                    (k0inv_k1 * k0inv_a0).trace() -
                    2.0 * k0inv_a01.trace();
  return t0 + t1;
}

}  // namespace gpdiscrim
