#ifndef GPDISCRIM_GP_HPP
#define GPDISCRIM_GP_HPP

#include <Eigen/Dense>
#include <optional>

#include "gpdiscrim/kernels.hpp"
#include "gpdiscrim/rng.hpp"

namespace gpdiscrim {

// An ordered finite design, optionally with observations attached.
struct Design {
  Matrix points;  // n x d, one row per point
  std::optional<Vector> y;

  Design() = default;
  explicit Design(Matrix pts) : points(std::move(pts)) {}
  Design(Matrix pts, Vector obs) : points(std::move(pts)), y(std::move(obs)) {}

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  Vector point(int i) const { return points.row(i).transpose(); }
  bool has_observations() const { return y.has_value(); }

  void validate() const;
  void append(const Eigen::Ref<const Vector>& x);
  void append(const Eigen::Ref<const Vector>& x, double obs);
};

// Cholesky factor L (lower) of a symmetric positive definite matrix.
// Throws factorization_error naming the first non-positive pivot.
Matrix cholesky(const Eigen::Ref<const Matrix>& k);

// Immutable per-model predictive state: kernel matrix, its Cholesky factor,
// and (when observations are present) the solved weights K^{-1} Y.
// Construction factorizes once; queries are cheap and concurrency-safe.
class Predictor {
public:
  Predictor(const KernelSpec& spec, const Design& design);

  // BLUP k_n(x)' K_n^{-1} Y_n; requires observations.
  double mean(const Eigen::Ref<const Vector>& x) const;

  // rho_n^2(x) = K(x,x) - k_n(x)' K_n^{-1} k_n(x), clamped at zero when
  // round-off drives it below 1e-12 K(x,x). Does not need observations.
  double variance(const Eigen::Ref<const Vector>& x) const;

  // Both of the above from a single solve.
  struct MeanVar {
    double mean;
    double variance;
  };
  MeanVar mean_and_variance(const Eigen::Ref<const Vector>& x) const;

  Vector solve(const Eigen::Ref<const Vector>& rhs) const;  // K^{-1} rhs
  const Matrix& matrix() const { return k_; }
  const Matrix& chol() const { return l_; }
  const KernelSpec& spec() const { return spec_; }
  const Matrix& points() const { return points_; }
  int n() const { return static_cast<int>(points_.rows()); }
  double log_det() const;  // log det K, from the Cholesky diagonal

private:
  KernelSpec spec_;
  Matrix points_;
  Matrix k_;
  Matrix l_;
  std::optional<Vector> weights_;  // K^{-1} Y
  std::optional<Vector> y_;
};

// E_truth{ e_predictor^2 (x) }: mean squared error at x of the BLUP built
// under `predictor`'s model when `truth`'s model generates the data,
//   K_t(x,x) + k_p' K_p^{-1} K_t K_p^{-1} k_p - 2 k_p' K_p^{-1} k_t .
// Reduces to the predictive variance when truth == predictor.
double cross_mse(const Predictor& truth, const Predictor& predictor,
                 const Eigen::Ref<const Vector>& x);

// Convenience form; factorizes both models on each call.
double cross_mse(const ModelPair& pair, const Design& design, int truth,
                 int predictor, const Eigen::Ref<const Vector>& x);

// Gaussian log density of the attached observations under `spec`:
// -(n/2) log 2pi - (1/2) log det K - (1/2) Y' K^{-1} Y, via Cholesky.
double log_likelihood(const KernelSpec& spec, const Design& design);

// Zero-mean sample Y = L z with z iid standard normal from `rng`.
// A single diagonal jitter of 1e-10 * variance is added if the plain
// factorization fails; criteria never do this, sampling may.
Vector sample_gp(const KernelSpec& spec, const Eigen::Ref<const Matrix>& points,
                 CounterRng& rng);

struct MlFit {
  double theta;       // fitted inverse correlation length
  double sigma2;      // profiled variance  Y' C^{-1} Y / n
  double log_lik;     // profile log-likelihood at the optimum
  bool at_boundary;   // optimum within one tolerance of a search bound
};

// Maximum-likelihood fit of the inverse correlation length of `family`,
// with the variance profiled out analytically. Golden-section search on
// log(theta) over [lo, hi] to relative tolerance 1e-5, preceded by a coarse
// bracketing scan. Throws numeric_error when the likelihood is non-finite
// over the whole interval.
MlFit ml_fit_theta(const KernelSpec& family_template, const Design& design,
                   double lo, double hi);

}  // namespace gpdiscrim

#endif
