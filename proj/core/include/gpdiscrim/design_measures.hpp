#ifndef GPDISCRIM_DESIGN_MEASURES_HPP
#define GPDISCRIM_DESIGN_MEASURES_HPP

#include <optional>
#include <vector>

#include "gpdiscrim/kernels.hpp"

namespace gpdiscrim {

// Probability measure with finite support: one row of `support` per point.
struct DesignMeasure {
  Matrix support;
  Vector weights;

  int size() const { return static_cast<int>(support.rows()); }
  int dim() const { return static_cast<int>(support.cols()); }
  void validate() const;  // weights >= 0 and summing to 1 within 1e-12
  void normalize();

  // Empirical measure of an exact design: mass 1/n per point.
  static DesignMeasure empirical(const Eigen::Ref<const Matrix>& points);
};

// The scalar kernel-difference function driving the phi_p measure criteria.
// Two modes:
//   from_kernels: psi(t) = |K1(t) - K0(t)|, optionally normalised so that
//     max psi = 1 (the maximiser Delta and psi(Delta) are cached).
//   idealised:    the spike psi_*(t) = 1 iff t = Delta (within 1e-9), else 0;
//     any exponent p leaves it unchanged.
class PsiFunction {
public:
  static PsiFunction from_kernels(const ModelPair& pair, bool normalised,
                                  double t_max = 0.0);
  static PsiFunction idealised(double delta);

  double operator()(double t) const;
  double pow_p(double t, double p) const;

  double delta() const { return delta_; }
  double psi_at_delta() const { return psi_at_delta_; }
  bool is_idealised() const { return idealised_; }
  bool is_normalised() const { return normalised_; }

  // Second derivative at t by central differences (step 1e-5); not defined
  // for the idealised spike.
  double second_derivative(double t) const;

private:
  PsiFunction() = default;
  bool idealised_ = false;
  bool normalised_ = false;
  std::optional<ModelPair> pair_;
  double delta_ = 0.0;
  double psi_at_delta_ = 1.0;
};

// phi_p(xi) = sum_ij w_i w_j psi^p(||x_i - x_j||).
double phi_p_measure(const PsiFunction& psi, const DesignMeasure& xi,
                     double p);

// Directional derivative toward a point mass at x:
// F_p(xi; delta_x) = 2 [ sum_j w_j psi^p(||x - x_j||) - phi_p(xi) ].
double directional_derivative(const PsiFunction& psi, const DesignMeasure& xi,
                              const Eigen::Ref<const Vector>& x, double p);

// delta_xi(x) = sum_j w_j psi^p(||x - x_j||) - phi_p(xi); must be <= 0
// everywhere at an optimal measure.
double delta_function(const PsiFunction& psi, const DesignMeasure& xi,
                      const Eigen::Ref<const Vector>& x, double p);

struct NecessaryConditionReport {
  double phi;            // phi_p(xi)
  double max_violation;  // max over the grid of delta_xi(x)
  Vector worst_point;
  bool pass;             // max_violation <= tol
  double tol;
};

// Checks the first-order necessary condition for optimality of xi over a
// candidate grid. PASS means no grid point improves xi to first order.
NecessaryConditionReport check_necessary_condition(
    const PsiFunction& psi, const DesignMeasure& xi,
    const Eigen::Ref<const Matrix>& grid, double p, double tol = 1e-6);

// Uniform measure on the vertices of a regular d-simplex with edge `delta`,
// translated by `anchor` (zero if empty) and rotated by `orientation`
// (identity if empty).
DesignMeasure simplex_measure(int d, double delta,
                              const std::optional<Vector>& anchor = {},
                              const std::optional<Matrix>& orientation = {});

// The d+2 point variant: vertex `k` of the simplex is split into the
// symmetric pair (x_k, x_*) with weights 1/[2(d+1)] each, where x_* is the
// reflection of x_k through the opposite face. ||x_k - x_*|| equals
// L = 2 delta sqrt((d+1)/(2d)).
DesignMeasure reflected_measure(int d, double delta,
                                const std::optional<Vector>& anchor = {},
                                const std::optional<Matrix>& orientation = {},
                                int k = 0);

double reflection_distance(int d, double delta);  // L above

// Fedorov-Wynn vertex-direction iteration on a fixed candidate grid with
// step sizes alpha_k = 1/(k+2). Weights below 1e-8 are pruned (with
// renormalization). `initial` defaults to a uniform measure on a random
// 3-point subset of the grid drawn from `seed`.
DesignMeasure fedorov_wynn(const PsiFunction& psi,
                           const Eigen::Ref<const Matrix>& grid, double p,
                           int iterations,
                           const std::optional<DesignMeasure>& initial = {},
                           std::uint64_t seed = 0);

struct RefineResult {
  DesignMeasure measure;
  double phi;
  bool improved;
  int iterations;
};

struct RefineOptions {
  int max_iterations = 400;
  double coordinate_step = 0.05;  // initial step, scaled by psi's delta
  double weight_step = 0.1;
  double tolerance = 1e-12;       // relative improvement cutoff
  std::optional<std::pair<Vector, Vector>> bounds;  // clamp support to a box
};

// Local ascent over support coordinates and weights: numerical gradients,
// step halving, weights re-projected onto the probability simplex after
// every step. Never returns a measure with a lower phi_p than the input.
RefineResult continuous_refine(const PsiFunction& psi,
                               const DesignMeasure& xi, double p,
                               const RefineOptions& options = {});

// Closed-form Hessian of delta_xi* at a simplex vertex:
//   1/(d+1) * p psi^{p-1}(Delta) psi''(Delta) / Delta^2
//     * sum_{i >= 2} (x_1 - x_i)(x_1 - x_i)'.
// Negative-definite when psi''(Delta) < 0 and p > 2. `concavity_ok` (when
// given) is set to false for p <= 2, where the own-point term the formula
// drops need not vanish.
Matrix vertex_hessian(const PsiFunction& psi, const DesignMeasure& simplex,
                      double p, bool* concavity_ok = nullptr);

struct SupportCluster {
  Vector centre;  // weight-averaged location
  double weight;
  int points;
};

// Merges support points within `radius` of each other (single-linkage) for
// reporting; points with weight <= weight_floor are ignored.
std::vector<SupportCluster> cluster_support(const DesignMeasure& xi,
                                            double radius,
                                            double weight_floor = 1e-6);

}  // namespace gpdiscrim

#endif
