#ifndef GPDISCRIM_CRITERIA_DIST_HPP
#define GPDISCRIM_CRITERIA_DIST_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gpdiscrim/criteria_pred.hpp"
#include "gpdiscrim/kernels.hpp"

namespace gpdiscrim {

// Identifier for every criterion the toolkit can dispatch on, both the
// distance-based design criteria (capital Phi) and the prediction-based
// incremental scores (lowercase phi, plus the sequential score).
struct CriterionId {
  enum class Kind {
    kPhiKl,      // "Phi-KL"
    kPhiF,       // "Phi-F"
    kPhiP,       // "Phi-p" with exponent p ("Phi-1", "Phi-2" as shorthands)
    kPhiDs,      // "Phi-Ds"
    kPhiU,       // "Phi-U"
    kPhiGamma,   // "Phi-Gamma"
    kPhiA,       // "phi-a"
    kPhiB,       // "phi-b"
    kPhiKlInc,   // "phi-kl"
    kSequential  // "seq"
  };

  Kind kind = Kind::kPhiKl;
  double p = 2.0;  // exponent, kPhiP only

  static CriterionId phi_kl() { return {Kind::kPhiKl, 0.0}; }
  static CriterionId phi_f() { return {Kind::kPhiF, 0.0}; }
  static CriterionId phi_p(double p) { return {Kind::kPhiP, p}; }
  static CriterionId phi_ds() { return {Kind::kPhiDs, 0.0}; }
  static CriterionId phi_u() { return {Kind::kPhiU, 0.0}; }
  static CriterionId phi_gamma() { return {Kind::kPhiGamma, 0.0}; }

  bool is_distance_based() const {
    return kind == Kind::kPhiKl || kind == Kind::kPhiF ||
           kind == Kind::kPhiP || kind == Kind::kPhiDs ||
           kind == Kind::kPhiU || kind == Kind::kPhiGamma;
  }
  bool is_prediction_based() const { return !is_distance_based(); }

  std::string name() const;
  static CriterionId parse(const std::string& name);
  static std::vector<std::string> known_names();
};

// Phi_KL(X) = (1/2)[tr(K0 K1^{-1}) + tr(K1 K0^{-1})] - n, twice the
// symmetric KL divergence between the two zero-mean Gaussians on X.
// Singularity is reported, never regularized.
double phi_kl_design(const ModelPair& pair,
                     const Eigen::Ref<const Matrix>& points);

// Frechet covariance distance tr[K0 + K1 - 2 (K0 K1)^{1/2}] with the cross
// term computed as tr((K0^{1/2} K1 K0^{1/2})^{1/2}) through symmetric
// eigendecompositions. Inner-product eigenvalues below -1e-10 * trace are an
// error; small negatives are clipped to zero.
double phi_frechet(const ModelPair& pair,
                   const Eigen::Ref<const Matrix>& points);

// Entrywise criterion Phi_p(X) = sum_ij |{K1 - K0}_ij|^p, p > 0.
double phi_p_design(const ModelPair& pair,
                    const Eigen::Ref<const Matrix>& points, double p);

// D_s criterion for the general Matern kernel: smoothness nu is of interest,
// theta is the nuisance. M_ab = (1/2) tr(K^{-1} dK/da K^{-1} dK/db) over
// {theta, nu}; returns det(M) / M_thetatheta. Throws numeric_error when the
// information about theta vanishes (e.g. a single-point design).
double phi_ds(const KernelSpec& matern_general,
              const Eigen::Ref<const Matrix>& points);

// Bayesian bounds with zero means and the pair's prior probabilities:
//   Phi_U = (1/2) p0 p1 [tr(K0 K1^{-1}) + tr(K1 K0^{-1}) - 2n]
//   Phi_Gamma = -sum_i p_i log( sum_j p_j exp(-Gamma_ij / 2) ),
//   Gamma_ij = tr(K_i K_j^{-1}) - log det(K_i K_j^{-1}) - n.
double phi_upper(const ModelPair& pair,
                 const Eigen::Ref<const Matrix>& points);
double phi_gamma(const ModelPair& pair,
                 const Eigen::Ref<const Matrix>& points);

// Criterion value dispatch for the distance-based kinds. `ds_spec` supplies
// the local parameter values for Phi-Ds.
double criterion_value(const CriterionId& id, const ModelPair& pair,
                       const Eigen::Ref<const Matrix>& points,
                       const std::optional<KernelSpec>& ds_spec = {});

struct CalibrationResult {
  double theta1;
  double value;       // criterion at the minimiser
  bool at_boundary;   // minimum within one tolerance of a bound
};

// theta_1 minimising the criterion with theta_0 fixed (the worst-case
// calibration with Theta_1 unconstrained): 200-point log-spaced grid over
// [lo, hi], then golden-section to 1e-4. The pair's k1 inverse length is the
// free parameter; everything else stays at the template values.
CalibrationResult calibrate_on_design(const ModelPair& pair_template,
                                      const CriterionId& criterion,
                                      const Eigen::Ref<const Matrix>& points,
                                      double lo, double hi);

// Same search, for the measure version phi_p(mu) = int int |K1-K0|^p dmu dmu
// (kPhiP only).
CalibrationResult calibrate_on_measure(const ModelPair& pair_template,
                                       double p, const WeightedPoints& mu,
                                       double lo, double hi);

// phi_p of a (not necessarily probability) weighted point set, raw kernels.
double phi_p_weighted(const ModelPair& pair, const WeightedPoints& mu,
                      double p);

// (theta, value) sweep of a criterion over a log grid, for criterion-vs-theta
// exports. Values are NOT rescaled here.
std::vector<std::pair<double, double>> criterion_sweep(
    const ModelPair& pair_template, const CriterionId& criterion,
    const Eigen::Ref<const Matrix>& points, double lo, double hi, int count);

}  // namespace gpdiscrim

#endif
