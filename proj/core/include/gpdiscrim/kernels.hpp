#ifndef GPDISCRIM_KERNELS_HPP
#define GPDISCRIM_KERNELS_HPP

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace gpdiscrim {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelFamily {
  kMatern32,
  kMatern52,
  kMaternGeneral,
  kExponential,        // sigma2 * exp(-alpha r)
  kExponentialScaled,  // exp(-alpha r) / alpha
};

std::string family_name(KernelFamily family);
KernelFamily parse_family(const std::string& name);

// One isotropic covariance family with its parameters. Which parameters are
// meaningful depends on the family:
//   Matern32/Matern52:  sigma2, theta
//   MaternGeneral:      sigma2, theta, nu  (Bessel-function form)
//   Exponential:        sigma2, alpha
//   ExponentialScaled:  alpha             (variance is 1/alpha by construction)
struct KernelSpec {
  KernelFamily family = KernelFamily::kMatern32;
  double sigma2 = 1.0;
  double theta = 1.0;  // inverse correlation length (Matern families)
  double nu = 1.5;     // smoothness (MaternGeneral only)
  double alpha = 1.0;  // inverse correlation length (exponential families)

  static KernelSpec matern32(double theta, double sigma2 = 1.0);
  static KernelSpec matern52(double theta, double sigma2 = 1.0);
  static KernelSpec matern_general(double theta, double nu, double sigma2 = 1.0);
  static KernelSpec exponential(double alpha, double sigma2 = 1.0);
  static KernelSpec exponential_scaled(double alpha);

  void validate() const;

  double variance() const;        // K(x, x)
  double inverse_length() const;  // theta or alpha, per family

  // Spec with the inverse correlation length replaced (theta or alpha).
  KernelSpec with_inverse_length(double value) const;
  KernelSpec with_sigma2(double value) const;
};

// Isotropic kernel value at distance r >= 0. The r = 0 case is returned
// exactly as variance(); MaternGeneral is evaluated through the modified
// Bessel function in log space.
double kernel_value(const KernelSpec& spec, double r);

// K(x, x') with r = ||x - x'|| (Euclidean). Throws on non-finite coordinates.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const Vector>& xp);

// n x n kernel matrix of a point set (rows of `points` are the points).
// Assembled from the lower triangle, exactly symmetric. n >= 1 required;
// duplicate points are allowed and produce a singular matrix.
Matrix kernel_matrix(const KernelSpec& spec,
                     const Eigen::Ref<const Matrix>& points);

// Vector (K(x, x_1), ..., K(x, x_n)); errors on an empty point set.
Vector kernel_vector(const KernelSpec& spec,
                     const Eigen::Ref<const Matrix>& points,
                     const Eigen::Ref<const Vector>& x);

enum class KernelParam { kTheta, kNu };

// Entrywise d K / d theta or d K / d nu for the general Matern family,
// by central differences (step 1e-6 * max(1, parameter)). No closed form is
// used; the Bessel form makes finite differences both simple and checkable.
Matrix kernel_partial(const KernelSpec& spec,
                      const Eigen::Ref<const Matrix>& points,
                      KernelParam which);

// Scalar finite-difference derivative of kernel_value in theta or nu.
double kernel_value_partial(const KernelSpec& spec, double r,
                            KernelParam which);

// Rival kernels with prior model probabilities.
struct ModelPair {
  KernelSpec k0;
  KernelSpec k1;
  double prior0 = 0.5;
  double prior1 = 0.5;

  void validate() const;
  ModelPair swapped() const { return ModelPair{k1, k0, prior1, prior0}; }
};

// psi(t) = |K_1(t) - K_0(t)| as a function of inter-point distance.
double psi_value(const ModelPair& pair, double t);

struct DeltaResult {
  double delta;         // argmax of psi on (0, t_max]
  double psi_at_delta;  // psi(delta)
};

// Global maximiser of psi on (0, t_max]: 10,000-point grid scan followed by
// golden-section refinement to 1e-8. t_max <= 0 selects the default
// 5 / min(inverse lengths). Throws numeric_error when psi is flat
// (identical kernels: no discrimination possible).
DeltaResult find_delta(const ModelPair& pair, double t_max = 0.0);

// Compact box design space.
struct DesignSpace {
  Vector lower;
  Vector upper;
  std::vector<int> grid_resolution;  // optional, >= 2 per coordinate

  static DesignSpace box(const Vector& lower, const Vector& upper);
  static DesignSpace cube(int dim, double lo, double hi);

  void validate() const;
  int dim() const { return static_cast<int>(lower.size()); }

  // Tensor grid with `res` equally spaced points per coordinate (endpoints
  // included); res <= 0 uses the stored per-coordinate resolution.
  Matrix grid(int res = 0) const;

  // Midpoint-rule tensor grid: res^d cell centres, each with weight
  // vol(cell). Used as the default quadrature for measures on the space.
  std::pair<Matrix, Vector> midpoint_quadrature(int res) const;

  bool contains(const Eigen::Ref<const Vector>& x, double tol = 1e-12) const;
};

}  // namespace gpdiscrim

#endif
