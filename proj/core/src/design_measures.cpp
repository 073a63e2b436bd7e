#include "gpdiscrim/design_measures.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "gpdiscrim/errors.hpp"
#include "gpdiscrim/parallel.hpp"
#include "gpdiscrim/rng.hpp"

namespace gpdiscrim {

void DesignMeasure::validate() const {
  if (support.rows() == 0)
    throw std::invalid_argument("DesignMeasure: empty support");
  if (support.rows() != weights.size())
    throw std::invalid_argument("DesignMeasure: weight/support size mismatch");
  if ((weights.array() < 0.0).any())
    throw std::invalid_argument("DesignMeasure: negative weight");
  if (std::fabs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("DesignMeasure: weights must sum to one");
  for (Eigen::Index i = 0; i < support.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if ((support.row(i) - support.row(j)).norm() <= 1e-10)
        throw std::invalid_argument(
            "DesignMeasure: support points closer than the 1e-10 merge "
            "radius");
}

void DesignMeasure::normalize() {
  const double s = weights.sum();
  if (!(s > 0.0))
    throw std::invalid_argument("DesignMeasure: cannot normalize zero mass");
  weights /= s;
}

DesignMeasure DesignMeasure::empirical(const Eigen::Ref<const Matrix>& points) {
  DesignMeasure xi;
  xi.support = points;
  xi.weights =
      Vector::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
  return xi;
}

PsiFunction PsiFunction::from_kernels(const ModelPair& pair, bool normalised,
                                      double t_max) {
  PsiFunction psi;
  psi.pair_ = pair;
  psi.normalised_ = normalised;
  try {
    const DeltaResult d = find_delta(pair, t_max);
    psi.delta_ = d.delta;
    psi.psi_at_delta_ = d.psi_at_delta;
  } catch (const numeric_error&) {
    // Flat psi (identical kernels): usable unnormalised, where every value
    // is zero; normalisation has nothing to divide by.
    if (normalised) throw;
    psi.delta_ = 0.0;
    psi.psi_at_delta_ = 1.0;
  }
  return psi;
}

PsiFunction PsiFunction::idealised(double delta) {
  if (!(delta > 0.0))
    throw std::invalid_argument("PsiFunction::idealised: delta must be > 0");
  PsiFunction psi;
  psi.idealised_ = true;
  psi.delta_ = delta;
  psi.psi_at_delta_ = 1.0;
  return psi;
}

double PsiFunction::operator()(double t) const {
  if (idealised_) return std::fabs(t - delta_) <= 1e-9 ? 1.0 : 0.0;
  const double v = psi_value(*pair_, t);
  return normalised_ ? v / psi_at_delta_ : v;
}

double PsiFunction::pow_p(double t, double p) const {
  if (idealised_) return (*this)(t);  // psi_*^p = psi_* for any p > 0
  const double v = (*this)(t);
  if (p == 1.0) return v;
  if (p == 2.0) return v * v;
  return std::pow(v, p);
}

double PsiFunction::second_derivative(double t) const {
  if (idealised_)
    throw std::invalid_argument(
        "PsiFunction::second_derivative: the idealised spike is not "
        "differentiable");
  const double h = 1e-5;
  return ((*this)(t + h) - 2.0 * (*this)(t) + (*this)(t - h)) / (h * h);
}

double phi_p_measure(const PsiFunction& psi, const DesignMeasure& xi,
                     double p) {
  if (!(p > 0.0)) throw std::invalid_argument("phi_p_measure: p must be > 0");
  const Eigen::Index m = xi.support.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < i; ++j)
      total += 2.0 * xi.weights(i) * xi.weights(j) *
               psi.pow_p((xi.support.row(i) - xi.support.row(j)).norm(), p);
    total += xi.weights(i) * xi.weights(i) * psi.pow_p(0.0, p);
  }
  return total;
}

double delta_function(const PsiFunction& psi, const DesignMeasure& xi,
                      const Eigen::Ref<const Vector>& x, double p) {
  double integral = 0.0;
  for (Eigen::Index j = 0; j < xi.support.rows(); ++j)
    integral += xi.weights(j) *
                psi.pow_p((xi.support.row(j).transpose() - x).norm(), p);
  return integral - phi_p_measure(psi, xi, p);
}

double directional_derivative(const PsiFunction& psi, const DesignMeasure& xi,
                              const Eigen::Ref<const Vector>& x, double p) {
  return 2.0 * delta_function(psi, xi, x, p);
}

NecessaryConditionReport check_necessary_condition(
    const PsiFunction& psi, const DesignMeasure& xi,
    const Eigen::Ref<const Matrix>& grid, double p, double tol) {
  if (grid.rows() == 0)
    throw std::invalid_argument("check_necessary_condition: empty grid");
  const double phi = phi_p_measure(psi, xi, p);
  const Eigen::Index g = grid.rows();
  std::vector<double> integral(g);
  parallel_for(g, [&](std::size_t i) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < xi.support.rows(); ++j)
      s += xi.weights(j) *
           psi.pow_p((grid.row(i) - xi.support.row(j)).norm(), p);
    integral[i] = s;
  }, 256);
  Eigen::Index worst = 0;
  for (Eigen::Index i = 1; i < g; ++i)
    if (integral[i] > integral[worst]) worst = i;
  NecessaryConditionReport report;
  report.phi = phi;
  report.max_violation = integral[worst] - phi;
  report.worst_point = grid.row(worst).transpose();
  report.tol = tol;
  report.pass = report.max_violation <= tol;
  return report;
}

namespace {

Matrix simplex_vertices(int d, double delta) {
  if (d < 1) throw std::invalid_argument("simplex: dimension must be >= 1");
  if (!(delta > 0.0))
    throw std::invalid_argument("simplex: edge length must be > 0");
  Matrix v = Matrix::Zero(d + 1, d);
  for (int k = 1; k <= d; ++k) {
    // New vertex above the centroid of those placed so far.
    Vector centroid = Vector::Zero(d);
    for (int i = 0; i < k; ++i) centroid += v.row(i).transpose();
    centroid /= k;
    v.row(k) = centroid.transpose();
    v(k, k - 1) = delta * std::sqrt((k + 1.0) / (2.0 * k));
  }
  return v;
}

Matrix place(const Matrix& vertices, const std::optional<Vector>& anchor,
             const std::optional<Matrix>& orientation) {
  Matrix out = vertices;
  if (orientation) {
    if (orientation->rows() != vertices.cols() ||
        orientation->cols() != vertices.cols())
      throw std::invalid_argument("simplex: orientation must be d x d");
    out = out * orientation->transpose();
  }
  if (anchor) {
    if (anchor->size() != vertices.cols())
      throw std::invalid_argument("simplex: anchor dimension mismatch");
    out.rowwise() += anchor->transpose();
  }
  return out;
}

}  // namespace

DesignMeasure simplex_measure(int d, double delta,
                              const std::optional<Vector>& anchor,
                              const std::optional<Matrix>& orientation) {
  DesignMeasure xi;
  xi.support = place(simplex_vertices(d, delta), anchor, orientation);
  xi.weights = Vector::Constant(d + 1, 1.0 / (d + 1.0));
  return xi;
}

double reflection_distance(int d, double delta) {
  return 2.0 * delta * std::sqrt((d + 1.0) / (2.0 * d));
}

DesignMeasure reflected_measure(int d, double delta,
                                const std::optional<Vector>& anchor,
                                const std::optional<Matrix>& orientation,
                                int k) {
  if (k < 0 || k > d)
    throw std::invalid_argument("reflected_measure: vertex index out of range");
  const Matrix vertices = place(simplex_vertices(d, delta), anchor, orientation);
  // Reflection of vertex k through the centroid of the opposite face.
  Vector centroid = Vector::Zero(vertices.cols());
  for (int i = 0; i <= d; ++i)
    if (i != k) centroid += vertices.row(i).transpose();
  centroid /= d;
  const Vector reflected = 2.0 * centroid - vertices.row(k).transpose();

  DesignMeasure xi;
  xi.support.resize(d + 2, vertices.cols());
  xi.weights.resize(d + 2);
  int row = 0;
  for (int i = 0; i <= d; ++i) {
    xi.support.row(row) = vertices.row(i);
    xi.weights(row) = (i == k) ? 1.0 / (2.0 * (d + 1.0)) : 1.0 / (d + 1.0);
    ++row;
  }
  xi.support.row(row) = reflected.transpose();
  xi.weights(row) = 1.0 / (2.0 * (d + 1.0));
  return xi;
}

DesignMeasure fedorov_wynn(const PsiFunction& psi,
                           const Eigen::Ref<const Matrix>& grid, double p,
                           int iterations,
                           const std::optional<DesignMeasure>& initial,
                           std::uint64_t seed) {
  const Eigen::Index g = grid.rows();
  if (g == 0) throw std::invalid_argument("fedorov_wynn: empty grid");
  if (iterations < 0)
    throw std::invalid_argument("fedorov_wynn: negative iteration count");

  std::vector<Vector> support;       // positions
  std::vector<double> weights;
  std::vector<Vector> columns;       // columns[j](i) = psi^p(|grid_i - x_j|)

  auto column_for = [&](const Vector& x) {
    Vector col(g);
    parallel_for(g, [&](std::size_t i) {
      col(i) = psi.pow_p((grid.row(i).transpose() - x).norm(), p);
    }, 512);
    return col;
  };

  if (initial) {
    initial->validate();
    for (int j = 0; j < initial->size(); ++j) {
      support.push_back(initial->support.row(j).transpose());
      weights.push_back(initial->weights(j));
      columns.push_back(column_for(support.back()));
    }
  } else {
    CounterRng rng(seed);
    std::vector<Eigen::Index> picked;
    const std::size_t want = static_cast<std::size_t>(std::min<Eigen::Index>(3, g));
    while (picked.size() < want) {
      const Eigen::Index idx =
          std::min<Eigen::Index>(static_cast<Eigen::Index>(rng.uniform() * g),
                                 g - 1);
      if (std::find(picked.begin(), picked.end(), idx) == picked.end())
        picked.push_back(idx);
    }
    for (Eigen::Index idx : picked) {
      support.push_back(grid.row(idx).transpose());
      weights.push_back(1.0 / picked.size());
      columns.push_back(column_for(support.back()));
    }
  }

  // s(i) = sum_j w_j psi^p(|grid_i - x_j|), maintained incrementally.
  Vector s = Vector::Zero(g);
  auto rebuild_s = [&]() {
    s.setZero();
    for (std::size_t j = 0; j < support.size(); ++j) s += weights[j] * columns[j];
  };
  rebuild_s();

  const double psi0 = psi.pow_p(0.0, p);
  auto phi_now = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < support.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j)
        total += 2.0 * weights[i] * weights[j] *
                 psi.pow_p((support[i] - support[j]).norm(), p);
      total += weights[i] * weights[i] * psi0;
    }
    return total;
  };

  for (int k = 0; k < iterations; ++k) {
    Eigen::Index star = 0;
    for (Eigen::Index i = 1; i < g; ++i)
      if (s(i) > s(star)) star = i;

    // The objective is exactly quadratic along the mixing segment:
    //   q(a) = phi + 2a (b - phi) + a^2 (phi - 2b + psi0),
    // with b the integral of psi^p against xi at the chosen point. The step
    // is the schedule value 1/(k+2) capped by the quadratic's maximiser, so
    // phi never decreases; when even the best candidate cannot improve,
    // the iteration has converged.
    const double phi = phi_now();
    const double b = s(star);
    const double cap = 1.0 / (k + 2.0);
    const double curv = phi - 2.0 * b + psi0;
    double alpha = cap;
    if (curv < 0.0) alpha = std::min(cap, std::max((b - phi) / -curv, 0.0));
    const double gain = 2.0 * alpha * (b - phi) + alpha * alpha * curv;
    if (!(gain > 0.0)) break;
    const Vector xstar = grid.row(star).transpose();

    for (double& w : weights) w *= (1.0 - alpha);
    std::size_t hit = support.size();
    for (std::size_t j = 0; j < support.size(); ++j)
      if ((support[j] - xstar).norm() <= 1e-10) {
        hit = j;
        break;
      }
    if (hit == support.size()) {
      support.push_back(xstar);
      weights.push_back(alpha);
      columns.push_back(column_for(xstar));
      s = (1.0 - alpha) * s + alpha * columns.back();
    } else {
      weights[hit] += alpha;
      s = (1.0 - alpha) * s + alpha * columns[hit];
    }

    // Prune negligible weights; the mass is renormalized away from them.
    bool pruned = false;
    for (std::size_t j = support.size(); j-- > 0;)
      if (weights[j] < 1e-8) {
        support.erase(support.begin() + j);
        weights.erase(weights.begin() + j);
        columns.erase(columns.begin() + j);
        pruned = true;
      }
    if (pruned) {
      double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (double& w : weights) w /= total;
      rebuild_s();
    }
  }

  DesignMeasure xi;
  xi.support.resize(support.size(), grid.cols());
  xi.weights.resize(support.size());
  for (std::size_t j = 0; j < support.size(); ++j) {
    xi.support.row(j) = support[j].transpose();
    xi.weights(j) = weights[j];
  }
  xi.normalize();
  return xi;
}

namespace {

// Euclidean projection onto the probability simplex.
Vector project_simplex(const Vector& v) {
  const Eigen::Index m = v.size();
  std::vector<double> u(v.data(), v.data() + m);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, rho_sum = 0.0;
  int rho = -1;
  for (Eigen::Index i = 0; i < m; ++i) {
    css += u[i];
    if (u[i] - (css - 1.0) / (i + 1.0) > 0.0) {
      rho = static_cast<int>(i);
      rho_sum = css;
    }
  }
  const double tau = (rho_sum - 1.0) / (rho + 1.0);
  Vector out(m);
  for (Eigen::Index i = 0; i < m; ++i) out(i) = std::max(v(i) - tau, 0.0);
  return out;
}

}  // namespace

RefineResult continuous_refine(const PsiFunction& psi, const DesignMeasure& xi,
                               double p, const RefineOptions& options) {
  xi.validate();
  const int m = xi.size();
  const int d = xi.dim();
  Matrix pos = xi.support;
  Vector w = xi.weights;

  auto clamp_positions = [&](Matrix& q) {
    if (!options.bounds) return;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j)
        q(i, j) = std::min(std::max(q(i, j), options.bounds->first(j)),
                           options.bounds->second(j));
  };

  auto phi_of = [&](const Matrix& q, const Vector& ww) {
    double total = 0.0;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < i; ++j)
        total += 2.0 * ww(i) * ww(j) *
                 psi.pow_p((q.row(i) - q.row(j)).norm(), p);
      total += ww(i) * ww(i) * psi.pow_p(0.0, p);
    }
    return total;
  };

  const double phi_in = phi_of(pos, w);
  double phi = phi_in;
  const double scale = psi.delta() > 0.0 ? psi.delta() : 1.0;
  double step_x = options.coordinate_step * scale;
  double step_w = options.weight_step;
  const double fd_x = 1e-6 * scale;
  const double fd_w = 1e-7;
  bool improved = false;
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    bool moved = false;
    const double phi_before = phi;

    // Coordinate ascent step with numerical gradient and halving.
    Matrix grad_x(m, d);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < d; ++j) {
        Matrix hi = pos, lo = pos;
        hi(i, j) += fd_x;
        lo(i, j) -= fd_x;
        grad_x(i, j) = (phi_of(hi, w) - phi_of(lo, w)) / (2.0 * fd_x);
      }
    const double gx_norm = grad_x.norm();
    if (gx_norm > 0.0) {
      double eta = step_x / gx_norm;
      for (int h = 0; h < 30; ++h, eta *= 0.5) {
        Matrix trial = pos + eta * grad_x;
        clamp_positions(trial);
        const double trial_phi = phi_of(trial, w);
        if (trial_phi > phi) {
          pos = trial;
          phi = trial_phi;
          moved = true;
          break;
        }
      }
    }

    // Weight ascent step, re-projected onto the simplex.
    Vector grad_w(m);
    for (int i = 0; i < m; ++i) {
      Vector hi = w, lo = w;
      hi(i) += fd_w;
      lo(i) -= fd_w;
      grad_w(i) = (phi_of(pos, hi) - phi_of(pos, lo)) / (2.0 * fd_w);
    }
    const double gw_norm = grad_w.norm();
    if (gw_norm > 0.0) {
      double eta = step_w / gw_norm;
      for (int h = 0; h < 30; ++h, eta *= 0.5) {
        const Vector trial = project_simplex(w + eta * grad_w);
        const double trial_phi = phi_of(pos, trial);
        if (trial_phi > phi) {
          w = trial;
          phi = trial_phi;
          moved = true;
          break;
        }
      }
    }

    if (!moved) break;
    improved = true;
    if (phi - phi_before <= options.tolerance * std::max(1.0, std::fabs(phi)))
      break;
  }

  if (!improved) {
    return RefineResult{xi, phi_in, false, iter};
  }
  DesignMeasure out;
  out.support = pos;
  out.weights = w;
  out.normalize();
  return RefineResult{out, phi, true, iter};
}

Matrix vertex_hessian(const PsiFunction& psi, const DesignMeasure& simplex,
                      double p, bool* concavity_ok) {
  if (simplex.size() < 2)
    throw std::invalid_argument("vertex_hessian: need a simplex measure");
  const int d = simplex.dim();
  const double delta =
      (simplex.support.row(0) - simplex.support.row(1)).norm();
  const double psi_d = psi(delta);
  const double psi_dd = psi.second_derivative(delta);
  const double coeff = (1.0 / (simplex.size())) * p *
                       std::pow(psi_d, p - 1.0) * psi_dd / (delta * delta);
  Matrix outer = Matrix::Zero(d, d);
  for (int i = 1; i < simplex.size(); ++i) {
    const Vector diff =
        (simplex.support.row(0) - simplex.support.row(i)).transpose();
    outer += diff * diff.transpose();
  }
  if (concavity_ok) *concavity_ok = p > 2.0;
  return coeff * outer;
}

std::vector<SupportCluster> cluster_support(const DesignMeasure& xi,
                                            double radius,
                                            double weight_floor) {
  const int m = xi.size();
  std::vector<int> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  std::vector<bool> keep(m);
  for (int i = 0; i < m; ++i) keep[i] = xi.weights(i) > weight_floor;
  for (int i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    for (int j = 0; j < i; ++j) {
      if (!keep[j]) continue;
      if ((xi.support.row(i) - xi.support.row(j)).norm() <= radius)
        parent[find(i)] = find(j);
    }
  }
  std::vector<SupportCluster> clusters;
  std::vector<int> root_of(m, -1);
  for (int i = 0; i < m; ++i) {
    if (!keep[i]) continue;
    const int r = find(i);
    if (root_of[r] < 0) {
      root_of[r] = static_cast<int>(clusters.size());
      clusters.push_back(SupportCluster{Vector::Zero(xi.dim()), 0.0, 0});
    }
    SupportCluster& c = clusters[root_of[r]];
    c.centre += xi.weights(i) * xi.support.row(i).transpose();
    c.weight += xi.weights(i);
    c.points += 1;
  }
  for (auto& c : clusters)
    if (c.weight > 0.0) c.centre /= c.weight;
  return clusters;
}

}  // namespace gpdiscrim
