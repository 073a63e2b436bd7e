#ifndef GPDISCRIM_CRITERIA_PRED_HPP
#define GPDISCRIM_CRITERIA_PRED_HPP

#include "gpdiscrim/gp.hpp"
#include "gpdiscrim/kernels.hpp"

namespace gpdiscrim {

// Weighted point set standing in for a measure mu on the design space
// (grid quadrature or Monte Carlo). Weights need not sum to one.
struct WeightedPoints {
  Matrix points;
  Vector weights;
};

// Variants of the sequential (observation-dependent) score. kSymKl is the
// symmetric KL divergence between the two predictive normals; the other
// three are the simpler alternatives, in their order of appearance.
enum class SeqVariant { kSymKl, kDiff, kNormDiff, kWeightedDiff };

// Shared factorizations for scoring many candidate points against one
// design: both models are factorized once at construction. All queries are
// const and safe to call concurrently.
class PredictiveScores {
public:
  PredictiveScores(const ModelPair& pair, const Design& design);

  // phi_A(x) = E0{(e1-e0)^2} + E1{(e1-e0)^2}; zero at design points.
  double phi_a(const Eigen::Ref<const Vector>& x) const;

  // phi_B(x) = E0{e1^2}/E0{e0^2} + E1{e0^2}/E1{e1^2} - 2.
  double phi_b(const Eigen::Ref<const Vector>& x) const;

  // phi_KL(x) = (1/2)[E1{e0^2}/E0{e0^2} + E0{e1^2}/E1{e1^2}] - 1,
  // the increment of the static Phi_KL criterion when x joins the design.
  double phi_kl(const Eigen::Ref<const Vector>& x) const;

  // Observation-dependent scores; throw numeric_error at (or numerically at)
  // design points, where the predictive variances vanish.
  double seq_score(const Eigen::Ref<const Vector>& x, SeqVariant variant) const;

  const Predictor& predictor0() const { return p0_; }
  const Predictor& predictor1() const { return p1_; }

private:
  // e[t][p] = E_t{e_p^2(x)} for t, p in {0, 1}.
  struct MseQuartet {
    double e00, e01, e10, e11;
  };
  MseQuartet quartet(const Eigen::Ref<const Vector>& x) const;
  bool at_design_point(const Eigen::Ref<const Vector>& x) const;

  ModelPair pair_;
  Predictor p0_;
  Predictor p1_;
};

// One-shot conveniences; factorize per call.
double phi_a(const ModelPair& pair, const Design& design,
             const Eigen::Ref<const Vector>& x);
double phi_b(const ModelPair& pair, const Design& design,
             const Eigen::Ref<const Vector>& x);
double phi_kl_point(const ModelPair& pair, const Design& design,
                    const Eigen::Ref<const Vector>& x);
double seq_score(const ModelPair& pair, const Design& design,
                 const Eigen::Ref<const Vector>& x, SeqVariant variant);

// Integral of phi_A against mu, assembled through the moment matrices
// A_i(mu) = sum_k w_k k_i(x_k) k_i(x_k)' and A_01(mu), as
//   tr[K0^{-1}A0 + K1^{-1}K0K1^{-1}A1 - 2 K1^{-1}A01]
// + tr[K1^{-1}A1 + K0^{-1}K1K0^{-1}A0 - 2 K0^{-1}A01].
// Agrees with sum_k w_k phi_A(x_k) to quadrature round-off.
double integrated_phi_a(const ModelPair& pair, const Design& design,
                        const WeightedPoints& mu);

}  // namespace gpdiscrim

#endif
