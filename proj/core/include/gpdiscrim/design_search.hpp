#ifndef GPDISCRIM_DESIGN_SEARCH_HPP
#define GPDISCRIM_DESIGN_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <vector>

#include "gpdiscrim/criteria_dist.hpp"
#include "gpdiscrim/criteria_pred.hpp"
#include "gpdiscrim/gp.hpp"

namespace gpdiscrim {

struct SearchConfig {
  Matrix candidates;       // one row per candidate point
  int target_size = 2;
  CriterionId criterion = CriterionId::phi_kl();
  int exchange_passes = 25;
  // Minimum allowed distance between design points. Negative selects the
  // default of 1e-9 times one candidate-grid cell diagonal, which only rules
  // out exact duplicates.
  double min_distance = -1.0;
  std::optional<KernelSpec> ds_spec;  // local Matern parameters for Phi-Ds
  // Starting design for greedy (points need not be candidates). When absent,
  // greedy seeds itself with the best candidate pair.
  std::optional<Matrix> initial_design;

  void validate() const;
  double resolved_min_distance() const;
};

struct GreedyStep {
  long candidate;  // index into config.candidates
  double value;    // criterion value (distance-based) or increment score
};

// Incremental construction: repeatedly appends the candidate maximising the
// criterion increment. Distance-based criteria are seeded with the best pair
// over all O(m^2) candidate pairs (a single point carries no distance
// information); prediction-based scores seed the same way with their
// one-point-design score. Ties break to the lowest candidate index.
Design greedy_build(const SearchConfig& config, const ModelPair& pair,
                    std::vector<GreedyStep>* trace = nullptr);

// Best-improvement single-swap passes over a fixed-size design: each pass
// tests every (design point, candidate) replacement and applies the single
// best strictly-improving swap; stops when no swap improves the criterion by
// more than 1e-12 |value| or the pass budget is exhausted. Only defined for
// the distance-based criteria.
Design exchange_improve(const Design& design, const SearchConfig& config,
                        const ModelPair& pair, double* final_value = nullptr);

struct SequentialOptions {
  bool estimate = true;        // refit theta by ML at every step
  double theta_lo = 0.05;      // ML search bounds on the inverse length
  double theta_hi = 20.0;
  SeqVariant variant = SeqVariant::kSymKl;
};

struct SequentialResult {
  Design design;                   // points with the generated observations
  std::vector<double> theta0_hat;  // per appended point (when estimating)
  std::vector<double> theta1_hat;
  int fit_warnings = 0;            // ML failures where estimates were carried
};

// Observation-driven sequential design. Starts from two corners of `space`,
// draws each new observation conditionally on the past under the designated
// true model, optionally refits both inverse correlation lengths by ML, and
// appends the candidate maximising the sequential score under the plug-in
// (or nominal) parameters.
SequentialResult sequential_run(const ModelPair& pair, const DesignSpace& space,
                                int n_max, int truth, std::uint64_t seed,
                                const SequentialOptions& options = {},
                                int grid_resolution = 25);

}  // namespace gpdiscrim

#endif
