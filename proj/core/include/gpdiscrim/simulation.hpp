#ifndef GPDISCRIM_SIMULATION_HPP
#define GPDISCRIM_SIMULATION_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gpdiscrim/design_search.hpp"

namespace gpdiscrim {

// Average correct-classification rate of a design under the two candidate
// truths, with the Monte Carlo metadata needed to reproduce it.
struct HitRateReport {
  int n = 0;
  std::string criterion;
  int replicates = 0;      // per truth
  double rate_truth0 = 0.0;
  double rate_truth1 = 0.0;
  double average = 0.0;
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  int fit_warnings = 0;    // sequential runs only
};

// Monte Carlo hit rate of a fixed design: for each truth, N observation sets
// are drawn under the true kernel and classified by which model attains the
// higher log-likelihood at the nominal parameters. Exact likelihood ties
// (within 1e-12) count one half.
HitRateReport hit_rate_static(const Eigen::Ref<const Matrix>& points,
                              const ModelPair& pair, int replicates,
                              std::uint64_t seed);

// Hit rate of the sequential procedure: N independent sequential runs per
// truth (each producing its own design and observations), classified by the
// profile likelihoods at the ML-fitted parameters of each model.
HitRateReport hit_rate_sequential(const ModelPair& pair,
                                  const DesignSpace& space, int n, int replicates,
                                  std::uint64_t seed,
                                  const SequentialOptions& options = {},
                                  int grid_resolution = 25);

struct HitRateCell {
  std::optional<HitRateReport> report;
  std::string error;  // populated when the cell failed
};

struct HitRateTable {
  std::vector<CriterionId> criteria;
  std::vector<int> sizes;
  std::vector<std::vector<HitRateCell>> cells;  // [criterion][size]

  std::string formatted() const;  // aligned text, criteria as rows
};

// Builds a design per (criterion, size) -- greedy plus exchange for the
// distance-based criteria, greedy alone for the incremental scores, and the
// sequential procedure for "seq" -- then evaluates its hit rate. Per-cell
// failures are recorded; the rest of the table is still produced.
HitRateTable hit_rate_table(const std::vector<CriterionId>& criteria,
                            const std::vector<int>& sizes,
                            const ModelPair& pair, const DesignSpace& space,
                            int replicates, std::uint64_t seed,
                            int grid_resolution = 25,
                            const std::optional<KernelSpec>& ds_spec = {},
                            int exchange_passes = 25);

}  // namespace gpdiscrim

#endif
