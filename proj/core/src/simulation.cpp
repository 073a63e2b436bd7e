#include "gpdiscrim/simulation.hpp"

#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "gpdiscrim/errors.hpp"
#include "gpdiscrim/parallel.hpp"

namespace gpdiscrim {

namespace {

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

// Classification outcome for one observation set: 1 if the true model wins,
// 0 if it loses, 1/2 on an exact tie.
double classify(double ll_true, double ll_other) {
  const double diff = ll_true - ll_other;
  if (std::fabs(diff) < 1e-12) return 0.5;
  return diff > 0.0 ? 1.0 : 0.0;
}

}  // namespace

HitRateReport hit_rate_static(const Eigen::Ref<const Matrix>& points,
                              const ModelPair& pair, int replicates,
                              std::uint64_t seed) {
  pair.validate();
  if (replicates < 1)
    throw std::invalid_argument("hit_rate_static: replicates must be >= 1");
  const auto start = std::chrono::steady_clock::now();

  // Factorize both models once; all replicates reuse the factors.
  const Design bare{Matrix(points)};
  const Predictor p0(pair.k0, bare);
  const Predictor p1(pair.k1, bare);
  const double n = static_cast<double>(points.rows());
  constexpr double kLog2Pi = 1.8378770664093454836;

  auto log_lik = [&](const Predictor& p, const Vector& y) {
    Vector v = y;
    p.chol().triangularView<Eigen::Lower>().solveInPlace(v);
    return -0.5 * n * kLog2Pi - 0.5 * p.log_det() - 0.5 * v.squaredNorm();
  };

  const CounterRng root(seed);
  double rates[2];
  for (int truth = 0; truth < 2; ++truth) {
    const Predictor& truth_pred = truth == 0 ? p0 : p1;
    std::vector<double> outcome(replicates);
    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
      // Stream (truth, replicate), independent of scheduling.
      CounterRng rng = root.split(static_cast<std::uint64_t>(truth) * 1000003 +
                                  static_cast<std::uint64_t>(r));
      Vector z(points.rows());
      for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
      const Vector y =
          truth_pred.chol().triangularView<Eigen::Lower>() * z;
      const double ll0 = log_lik(p0, y);
      const double ll1 = log_lik(p1, y);
      outcome[r] = truth == 0 ? classify(ll0, ll1) : classify(ll1, ll0);
    }, 8);
    double sum = 0.0;
    for (double o : outcome) sum += o;
    rates[truth] = sum / replicates;
  }

  HitRateReport report;
  report.n = static_cast<int>(points.rows());
  report.replicates = replicates;
  report.rate_truth0 = rates[0];
  report.rate_truth1 = rates[1];
  report.average = 0.5 * (rates[0] + rates[1]);
  report.seed = seed;
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

HitRateReport hit_rate_sequential(const ModelPair& pair,
                                  const DesignSpace& space, int n,
                                  int replicates, std::uint64_t seed,
                                  const SequentialOptions& options,
                                  int grid_resolution) {
  pair.validate();
  if (replicates < 1)
    throw std::invalid_argument(
        "hit_rate_sequential: replicates must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  const CounterRng root(seed);

  double rates[2];
  int warnings = 0;
  for (int truth = 0; truth < 2; ++truth) {
    std::vector<double> outcome(replicates);
    std::vector<int> warn(replicates, 0);
    parallel_for(static_cast<std::size_t>(replicates), [&](std::size_t r) {
      const std::uint64_t run_seed =
          root.split(static_cast<std::uint64_t>(truth) * 1000003 +
                     static_cast<std::uint64_t>(r))();
      SequentialResult run;
      try {
        run = sequential_run(pair, space, n, truth, run_seed, options,
                             grid_resolution);
      } catch (const numeric_error&) {
        outcome[r] = 0.5;  // a failed run carries no discrimination signal
        warn[r] = 1;
        return;
      }
      warn[r] = run.fit_warnings;
      // Classify with ML-fitted parameters per model (the realistic,
      // parameter-free scenario).
      double ll0, ll1;
      try {
        const MlFit f0 = ml_fit_theta(pair.k0, run.design, options.theta_lo,
                                      options.theta_hi);
        const MlFit f1 = ml_fit_theta(pair.k1, run.design, options.theta_lo,
                                      options.theta_hi);
        const KernelSpec s0 =
            pair.k0.with_inverse_length(f0.theta).with_sigma2(f0.sigma2);
        const KernelSpec s1 =
            pair.k1.with_inverse_length(f1.theta).with_sigma2(f1.sigma2);
        ll0 = log_likelihood(s0, run.design);
        ll1 = log_likelihood(s1, run.design);
      } catch (const numeric_error&) {
        outcome[r] = 0.5;
        warn[r] += 1;
        return;
      }
      outcome[r] = truth == 0 ? classify(ll0, ll1) : classify(ll1, ll0);
    }, 1);
    double sum = 0.0;
    for (double o : outcome) sum += o;
    for (int w : warn) warnings += w;
    rates[truth] = sum / replicates;
  }

  HitRateReport report;
  report.n = n;
  report.criterion = "seq";
  report.replicates = replicates;
  report.rate_truth0 = rates[0];
  report.rate_truth1 = rates[1];
  report.average = 0.5 * (rates[0] + rates[1]);
  report.seed = seed;
  report.fit_warnings = warnings;
  report.wall_seconds = elapsed_seconds(start);
  return report;
}

HitRateTable hit_rate_table(const std::vector<CriterionId>& criteria,
                            const std::vector<int>& sizes,
                            const ModelPair& pair, const DesignSpace& space,
                            int replicates, std::uint64_t seed,
                            int grid_resolution,
                            const std::optional<KernelSpec>& ds_spec,
                            int exchange_passes) {
  HitRateTable table;
  table.criteria = criteria;
  table.sizes = sizes;
  table.cells.resize(criteria.size());
  const Matrix candidates = space.grid(grid_resolution);

  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const CriterionId& id = criteria[c];
    table.cells[c].resize(sizes.size());
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      HitRateCell& cell = table.cells[c][s];
      const std::uint64_t cell_seed =
          CounterRng(seed).split(1000 * c + s)();
      try {
        HitRateReport report;
        if (id.kind == CriterionId::Kind::kSequential) {
          report = hit_rate_sequential(pair, space, sizes[s], replicates,
                                       cell_seed, SequentialOptions{},
                                       grid_resolution);
        } else {
          SearchConfig config;
          config.candidates = candidates;
          config.target_size = sizes[s];
          config.criterion = id;
          config.ds_spec = ds_spec;
          config.exchange_passes = exchange_passes;
          Design design = greedy_build(config, pair);
          if (id.is_distance_based())
            design = exchange_improve(design, config, pair);
          report = hit_rate_static(design.points, pair, replicates, cell_seed);
        }
        report.criterion = id.name();
        cell.report = report;
      } catch (const std::exception& e) {
        cell.error = e.what();
      }
    }
  }
  return table;
}

std::string HitRateTable::formatted() const {
  std::ostringstream os;
  os << std::left << std::setw(12) << "criterion";
  for (int n : sizes) os << std::right << std::setw(8) << n;
  os << "\n";
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    os << std::left << std::setw(12) << criteria[c].name();
    for (std::size_t s = 0; s < sizes.size(); ++s) {
      if (cells[c][s].report)
        os << std::right << std::setw(8) << std::fixed << std::setprecision(3)
           << cells[c][s].report->average;
      else
        os << std::right << std::setw(8) << "fail";
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace gpdiscrim
