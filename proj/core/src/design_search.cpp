#include "gpdiscrim/design_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "gpdiscrim/errors.hpp"
#include "gpdiscrim/parallel.hpp"

namespace gpdiscrim {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double min_positive_pair_distance(const Matrix& pts) {
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < pts.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      const double d = (pts.row(i) - pts.row(j)).norm();
      if (d > 0.0 && d < best) best = d;
    }
  return std::isfinite(best) ? best : 1.0;
}

// Precomputed kernel tables over the candidate set (plus any extra design
// points), so that greedy appends and exchange swaps reduce to gathers.
class GramCache {
public:
  GramCache(const CriterionId& id, const ModelPair& pair,
            const std::optional<KernelSpec>& ds_spec, const Matrix& candidates)
      : id_(id), pair_(pair), ds_(ds_spec), pts_(candidates) {
    pair_.validate();
    if (id_.kind == CriterionId::Kind::kPhiDs) {
      if (!ds_)
        throw std::invalid_argument(
            "design search: Phi-Ds needs local Matern parameters");
      ds_->validate();
      build_ds_tables();
    } else {
      k0_ = kernel_matrix(pair_.k0, pts_);
      k1_ = kernel_matrix(pair_.k1, pts_);
    }
  }

  const Matrix& points() const { return pts_; }

  // Index of x in the table, appending a new row/column when absent.
  int index_of(const Eigen::Ref<const Vector>& x) {
    for (Eigen::Index i = 0; i < pts_.rows(); ++i)
      if ((pts_.row(i).transpose() - x).norm() == 0.0)
        return static_cast<int>(i);
    const Eigen::Index n = pts_.rows();
    pts_.conservativeResize(n + 1, pts_.cols());
    pts_.row(n) = x.transpose();
    auto extend = [&](Matrix& m, const KernelSpec& spec) {
      if (m.size() == 0) return;
      m.conservativeResize(n + 1, n + 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v =
            kernel_value(spec, (pts_.row(i).transpose() - x).norm());
        m(i, n) = v;
        m(n, i) = v;
      }
      m(n, n) = kernel_value(spec, 0.0);
    };
    extend(k0_, pair_.k0);
    extend(k1_, pair_.k1);
    if (ds_) extend_ds(n);
    return static_cast<int>(n);
  }

  // Criterion value of the subset; -inf when the evaluation degenerates
  // (singular matrices, unidentifiable information).
  double value(const std::vector<int>& subset) const {
    try {
      if (id_.kind == CriterionId::Kind::kPhiDs) return ds_value(subset);
      return pair_value(subset);
    } catch (const numeric_error&) {
      return kNegInf;
    }
  }

private:
  static Matrix gather(const Matrix& table, const std::vector<int>& subset) {
    const int n = static_cast<int>(subset.size());
    Matrix out(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = table(subset[i], subset[j]);
    return out;
  }

  double pair_value(const std::vector<int>& subset) const {
    const int n = static_cast<int>(subset.size());
    const Matrix k0 = gather(k0_, subset);
    const Matrix k1 = gather(k1_, subset);
    switch (id_.kind) {
      case CriterionId::Kind::kPhiP: {
        const Matrix diff = k1 - k0;
        if (id_.p == 2.0) return diff.array().square().sum();
        if (id_.p == 1.0) return diff.array().abs().sum();
        return diff.array().abs().pow(id_.p).sum();
      }
      case CriterionId::Kind::kPhiF: {
        Eigen::SelfAdjointEigenSolver<Matrix> es0(k0);
        Vector lam = es0.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        const Matrix s0 =
            es0.eigenvectors() * lam.asDiagonal() * es0.eigenvectors().transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es;
        es.compute(s0 * k1 * s0, Eigen::EigenvaluesOnly);
        return k0.trace() + k1.trace() -
               2.0 * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
      }
      case CriterionId::Kind::kPhiKl:
      case CriterionId::Kind::kPhiU:
      case CriterionId::Kind::kPhiGamma: {
        const Matrix l0 = cholesky(k0);
        const Matrix l1 = cholesky(k1);
        Matrix v0 = k1, v1 = k0;
        l0.triangularView<Eigen::Lower>().solveInPlace(v0);
        l0.triangularView<Eigen::Lower>().transpose().solveInPlace(v0);
        l1.triangularView<Eigen::Lower>().solveInPlace(v1);
        l1.triangularView<Eigen::Lower>().transpose().solveInPlace(v1);
        const double tr10 = v0.trace();
        const double tr01 = v1.trace();
        if (id_.kind == CriterionId::Kind::kPhiKl)
          return 0.5 * (tr01 + tr10) - n;
        if (id_.kind == CriterionId::Kind::kPhiU)
          return 0.5 * pair_.prior0 * pair_.prior1 * (tr01 + tr10 - 2.0 * n);
        const double logdet0 = 2.0 * l0.diagonal().array().log().sum();
        const double logdet1 = 2.0 * l1.diagonal().array().log().sum();
        const double g01 = tr01 - (logdet0 - logdet1) - n;
        const double g10 = tr10 - (logdet1 - logdet0) - n;
        return -pair_.prior0 * std::log(pair_.prior0 +
                                        pair_.prior1 * std::exp(-0.5 * g01)) -
               pair_.prior1 * std::log(pair_.prior1 +
                                       pair_.prior0 * std::exp(-0.5 * g10));
      }
      default:
        throw std::invalid_argument("GramCache: not a distance criterion");
    }
  }

  double ds_value(const std::vector<int>& subset) const {
    const Matrix k = gather(kds_, subset);
    const Matrix dth = gather(dth_, subset);
    const Matrix dnu = gather(dnu_, subset);
    const Matrix l = cholesky(k);
    auto solve_mat = [&l](Matrix v) {
      l.triangularView<Eigen::Lower>().solveInPlace(v);
      l.triangularView<Eigen::Lower>().transpose().solveInPlace(v);
      return v;
    };
    const Matrix a = solve_mat(dth);
    const Matrix b = solve_mat(dnu);
    const double m_tt = 0.5 * a.cwiseProduct(a.transpose()).sum();
    const double m_tn = 0.5 * a.cwiseProduct(b.transpose()).sum();
    const double m_nn = 0.5 * b.cwiseProduct(b.transpose()).sum();
    if (!(m_tt > 0.0) || !std::isfinite(m_tt))
      throw numeric_error("phi_ds: no information about theta");
    return (m_tt * m_nn - m_tn * m_tn) / m_tt;
  }

  void build_ds_tables() {
    const Eigen::Index g = pts_.rows();
    kds_.resize(g, g);
    dth_.resize(g, g);
    dnu_.resize(g, g);
    std::vector<Eigen::Index> rows(g);
    for (Eigen::Index i = 0; i < g; ++i) rows[i] = i;
    parallel_for(g, [&](std::size_t i) {
      kds_(i, i) = ds_->variance();
      dth_(i, i) = 0.0;
      dnu_(i, i) = 0.0;
      for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(i); ++j) {
        const double r = (pts_.row(i) - pts_.row(j)).norm();
        kds_(i, j) = kernel_value(*ds_, r);
        dth_(i, j) = kernel_value_partial(*ds_, r, KernelParam::kTheta);
        dnu_(i, j) = kernel_value_partial(*ds_, r, KernelParam::kNu);
      }
    }, 8);
    for (Eigen::Index i = 0; i < g; ++i)
      for (Eigen::Index j = 0; j < i; ++j) {
        kds_(j, i) = kds_(i, j);
        dth_(j, i) = dth_(i, j);
        dnu_(j, i) = dnu_(i, j);
      }
  }

  void extend_ds(Eigen::Index n) {
    kds_.conservativeResize(n + 1, n + 1);
    dth_.conservativeResize(n + 1, n + 1);
    dnu_.conservativeResize(n + 1, n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double r = (pts_.row(i) - pts_.row(n)).norm();
      kds_(i, n) = kds_(n, i) = kernel_value(*ds_, r);
      dth_(i, n) = dth_(n, i) =
          kernel_value_partial(*ds_, r, KernelParam::kTheta);
      dnu_(i, n) = dnu_(n, i) = kernel_value_partial(*ds_, r, KernelParam::kNu);
    }
    kds_(n, n) = ds_->variance();
    dth_(n, n) = 0.0;
    dnu_(n, n) = 0.0;
  }

  CriterionId id_;
  ModelPair pair_;
  std::optional<KernelSpec> ds_;
  Matrix pts_;
  Matrix k0_, k1_;
  Matrix kds_, dth_, dnu_;
};

bool respects_distance(const Matrix& pts, const std::vector<int>& subset,
                       int candidate, double min_dist) {
  for (int i : subset) {
    if (i == candidate) return false;
    if ((pts.row(i) - pts.row(candidate)).norm() < min_dist) return false;
  }
  return true;
}

Design subset_design(const Matrix& pts, const std::vector<int>& subset) {
  Matrix out(subset.size(), pts.cols());
  for (std::size_t i = 0; i < subset.size(); ++i)
    out.row(i) = pts.row(subset[i]);
  return Design(std::move(out));
}

// Unranks pair index `flat` into (i, j), i < j, lexicographic over m items.
std::pair<std::size_t, std::size_t> unrank_pair(std::size_t flat,
                                                std::size_t m) {
  std::size_t i = 0, offset = 0;
  while (offset + (m - 1 - i) <= flat) offset += m - 1 - i, ++i;
  return {i, i + 1 + (flat - offset)};
}

std::vector<int> greedy_distance_based(const SearchConfig& config,
                                       GramCache& cache,
                                       std::vector<GreedyStep>* trace) {
  const std::size_t m = static_cast<std::size_t>(config.candidates.rows());
  const double min_dist = config.resolved_min_distance();
  std::vector<int> current;

  if (config.initial_design) {
    for (Eigen::Index i = 0; i < config.initial_design->rows(); ++i)
      current.push_back(cache.index_of(config.initial_design->row(i)));
  }

  if (current.empty()) {
    if (config.target_size == 1) {
      double best;
      const std::ptrdiff_t pick = parallel_argmax(
          m,
          [&](std::size_t i) {
            std::vector<int> s{static_cast<int>(i)};
            return cache.value(s);
          },
          &best);
      current.push_back(static_cast<int>(pick));
      if (trace) trace->push_back({pick, best});
      return current;
    }
    // Seed: exhaustive best pair.
    const std::size_t pair_count = m * (m - 1) / 2;
    double best_pair_value;
    const std::ptrdiff_t best_flat = parallel_argmax(
        pair_count,
        [&](std::size_t flat) {
          const auto [i, j] = unrank_pair(flat, m);
          if ((config.candidates.row(i) - config.candidates.row(j)).norm() <
              min_dist)
            return kNegInf;
          std::vector<int> s{static_cast<int>(i), static_cast<int>(j)};
          return cache.value(s);
        },
        &best_pair_value);
    if (best_flat < 0 || best_pair_value == kNegInf)
      throw numeric_error("greedy_build: no admissible seed pair");
    const auto [i, j] = unrank_pair(static_cast<std::size_t>(best_flat), m);
    current = {static_cast<int>(i), static_cast<int>(j)};
    if (trace) {
      trace->push_back({static_cast<long>(i), best_pair_value});
      trace->push_back({static_cast<long>(j), best_pair_value});
    }
  }

  while (static_cast<int>(current.size()) < config.target_size) {
    double best_value;
    const std::ptrdiff_t pick = parallel_argmax(
        m,
        [&](std::size_t c) {
          if (!respects_distance(cache.points(), current,
                                 static_cast<int>(c), min_dist))
            return kNegInf;
          std::vector<int> s = current;
          s.push_back(static_cast<int>(c));
          return cache.value(s);
        },
        &best_value);
    if (pick < 0 || best_value == kNegInf)
      throw numeric_error(
          "greedy_build: every candidate violates the distance constraint or "
          "degenerates the criterion");
    current.push_back(static_cast<int>(pick));
    if (trace) trace->push_back({pick, best_value});
  }
  return current;
}

Design greedy_prediction_based(const SearchConfig& config,
                               const ModelPair& pair, const Matrix& candidates,
                               std::vector<GreedyStep>* trace) {
  const std::size_t m = static_cast<std::size_t>(candidates.rows());
  const double min_dist = config.resolved_min_distance();
  auto score_with = [&](const PredictiveScores& scores,
                        const Eigen::Ref<const Vector>& x) {
    try {
      switch (config.criterion.kind) {
        case CriterionId::Kind::kPhiA: return scores.phi_a(x);
        case CriterionId::Kind::kPhiB: return scores.phi_b(x);
        case CriterionId::Kind::kPhiKlInc: return scores.phi_kl(x);
        default:
          throw std::invalid_argument(
              "greedy_build: the sequential score depends on observations; "
              "use sequential_run");
      }
    } catch (const numeric_error&) {
      return kNegInf;
    }
  };

  Design current;
  if (config.initial_design) {
    current = Design(*config.initial_design);
  } else if (config.target_size == 1) {
    // One-point designs carry no discrimination signal; deterministic pick.
    current = Design(Matrix(candidates.row(0)));
    if (trace) trace->push_back({0, 0.0});
    return current;
  } else {
    // Seed pair: score of x_j against the one-point design {x_i}.
    const std::size_t pair_count = m * (m - 1) / 2;
    std::vector<std::unique_ptr<PredictiveScores>> single_point_scores(m);
    for (std::size_t i = 0; i < m; ++i) {
      Design di(candidates.row(i));
      single_point_scores[i] = std::make_unique<PredictiveScores>(pair, di);
    }
    double best_pair_value;
    const std::ptrdiff_t best_flat = parallel_argmax(
        pair_count,
        [&](std::size_t flat) {
          const auto [i, j] = unrank_pair(flat, m);
          if ((candidates.row(i) - candidates.row(j)).norm() < min_dist)
            return kNegInf;
          return score_with(*single_point_scores[i],
                            candidates.row(j).transpose());
        },
        &best_pair_value);
    single_point_scores.clear();
    if (best_flat < 0 || best_pair_value == kNegInf)
      throw numeric_error("greedy_build: no admissible seed pair");
    const auto [si, sj] = unrank_pair(static_cast<std::size_t>(best_flat), m);
    Matrix seed(2, candidates.cols());
    seed.row(0) = candidates.row(si);
    seed.row(1) = candidates.row(sj);
    current = Design(std::move(seed));
    if (trace) {
      trace->push_back({static_cast<long>(si), best_pair_value});
      trace->push_back({static_cast<long>(sj), best_pair_value});
    }
  }

  auto admissible = [&](Eigen::Index c) {
    for (int i = 0; i < current.n(); ++i)
      if ((current.points.row(i) - candidates.row(c)).norm() < min_dist)
        return false;
    return true;
  };

  while (current.n() < config.target_size) {
    const PredictiveScores scores(pair, current);
    double best_value;
    const std::ptrdiff_t pick = parallel_argmax(
        m,
        [&](std::size_t c) {
          if (!admissible(static_cast<Eigen::Index>(c))) return kNegInf;
          return score_with(scores, candidates.row(c).transpose());
        },
        &best_value);
    if (pick < 0 || best_value == kNegInf)
      throw numeric_error(
          "greedy_build: every candidate violates the distance constraint");
    current.append(candidates.row(pick).transpose());
    if (trace) trace->push_back({pick, best_value});
  }
  return current;
}

}  // namespace

void SearchConfig::validate() const {
  if (candidates.rows() == 0)
    throw std::invalid_argument("SearchConfig: empty candidate set");
  if (target_size < 1)
    throw std::invalid_argument("SearchConfig: target size must be >= 1");
  if (target_size > candidates.rows())
    throw std::invalid_argument(
        "SearchConfig: target size exceeds the candidate count");
}

double SearchConfig::resolved_min_distance() const {
  if (min_distance >= 0.0) return min_distance;
  const double cell = min_positive_pair_distance(candidates);
  return 1e-9 * cell * std::sqrt(static_cast<double>(candidates.cols()));
}

Design greedy_build(const SearchConfig& config, const ModelPair& pair,
                    std::vector<GreedyStep>* trace) {
  config.validate();
  if (config.criterion.is_distance_based()) {
    GramCache cache(config.criterion, pair, config.ds_spec, config.candidates);
    const std::vector<int> subset =
        greedy_distance_based(config, cache, trace);
    return subset_design(cache.points(), subset);
  }
  return greedy_prediction_based(config, pair, config.candidates, trace);
}

Design exchange_improve(const Design& design, const SearchConfig& config,
                        const ModelPair& pair, double* final_value) {
  config.validate();
  if (!config.criterion.is_distance_based())
    throw std::invalid_argument(
        "exchange_improve: only the distance-based criteria define a design "
        "value to improve");
  const double min_dist = config.resolved_min_distance();
  GramCache cache(config.criterion, pair, config.ds_spec, config.candidates);

  std::vector<int> current;
  current.reserve(design.n());
  for (int i = 0; i < design.n(); ++i)
    current.push_back(cache.index_of(design.point(i)));

  double value = cache.value(current);
  const std::size_t m = static_cast<std::size_t>(config.candidates.rows());
  const int n = static_cast<int>(current.size());

  for (int pass = 0; pass < config.exchange_passes; ++pass) {
    // Scan every (position, candidate) swap; keep the single best.
    const std::size_t swaps = static_cast<std::size_t>(n) * m;
    double best_value;
    const std::ptrdiff_t best_flat = parallel_argmax(
        swaps,
        [&](std::size_t flat) {
          const int pos = static_cast<int>(flat / m);
          const int cand = static_cast<int>(flat % m);
          if (cand == current[pos]) return kNegInf;
          std::vector<int> s = current;
          s[pos] = cand;
          for (std::size_t k = 0; k < s.size(); ++k) {
            if (static_cast<int>(k) == pos) continue;
            if ((cache.points().row(s[k]) - cache.points().row(cand)).norm() <
                min_dist)
              return kNegInf;
          }
          return cache.value(s);
        },
        &best_value);
    if (best_flat < 0 ||
        !(best_value > value + 1e-12 * std::fabs(value)))
      break;
    current[static_cast<std::size_t>(best_flat) / m] =
        static_cast<int>(static_cast<std::size_t>(best_flat) % m);
    value = best_value;
  }
  if (final_value) *final_value = value;
  return subset_design(cache.points(), current);
}

SequentialResult sequential_run(const ModelPair& pair, const DesignSpace& space,
                                int n_max, int truth, std::uint64_t seed,
                                const SequentialOptions& options,
                                int grid_resolution) {
  pair.validate();
  space.validate();
  if (truth != 0 && truth != 1)
    throw std::invalid_argument("sequential_run: truth must be 0 or 1");
  if (n_max < 2)
    throw std::invalid_argument("sequential_run: need n_max >= 2");
  const Matrix candidates = space.grid(grid_resolution);
  const KernelSpec true_spec = truth == 0 ? pair.k0 : pair.k1;
  CounterRng rng(seed);

  SequentialResult result;
  // Initial design: opposite corners of the box.
  Matrix init(2, space.dim());
  init.row(0) = space.lower.transpose();
  init.row(1) = space.upper.transpose();
  Vector y0 = sample_gp(true_spec, init, rng);
  result.design = Design(init, y0);

  ModelPair plugin = pair;  // nominal until the first successful fit
  while (result.design.n() < n_max) {
    if (options.estimate) {
      try {
        const MlFit f0 = ml_fit_theta(pair.k0, result.design,
                                      options.theta_lo, options.theta_hi);
        const MlFit f1 = ml_fit_theta(pair.k1, result.design,
                                      options.theta_lo, options.theta_hi);
        plugin.k0 =
            pair.k0.with_inverse_length(f0.theta).with_sigma2(f0.sigma2);
        plugin.k1 =
            pair.k1.with_inverse_length(f1.theta).with_sigma2(f1.sigma2);
      } catch (const numeric_error&) {
        ++result.fit_warnings;  // carry the previous estimates forward
      }
      result.theta0_hat.push_back(plugin.k0.inverse_length());
      result.theta1_hat.push_back(plugin.k1.inverse_length());
    }

    const ModelPair& scoring = options.estimate ? plugin : pair;
    const PredictiveScores scores(scoring, result.design);
    double best_score;
    const std::ptrdiff_t pick = parallel_argmax(
        static_cast<std::size_t>(candidates.rows()),
        [&](std::size_t c) {
          try {
            return scores.seq_score(candidates.row(c).transpose(),
                                    options.variant);
          } catch (const numeric_error&) {
            return kNegInf;
          }
        },
        &best_score);
    if (pick < 0 || best_score == kNegInf)
      throw numeric_error(
          "sequential_run: every candidate has a degenerate predictive "
          "variance");
    const Vector xnew = candidates.row(pick).transpose();

    // Observation drawn conditionally on the history under the true model.
    const Predictor truth_pred(true_spec, result.design);
    const auto mv = truth_pred.mean_and_variance(xnew);
    const double ynew = mv.mean + std::sqrt(std::max(mv.variance, 0.0)) *
                                      rng.normal();
    result.design.append(xnew, ynew);
  }
  return result;
}

}  // namespace gpdiscrim
