#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "hmn/exact.hpp"
#include "hmn/ijgp.hpp"
#include "hmn/rng.hpp"

namespace hmn {

// Per-variable function lists supporting O(d) sequential sampling: every
// stored function is discrete-only with scope inside the sampling order, and
// sits in the bucket of its latest variable, so at position i only x_i is
// uninstantiated.
struct OrderedBuckets {
  std::vector<int> order;  // the sampling order pi over the cutset
  std::vector<int> cards;
  std::vector<std::vector<CGPotential>> buckets;
};

// Collects the IJGP node functions and current messages whose scope lies
// inside the cutset and files each under its latest variable in `order`.
OrderedBuckets build_ordered_buckets(const IjgpState& state,
                                     const std::vector<int>& cutset,
                                     const std::vector<int>& order);

struct DrawResult {
  std::vector<int> values;  // aligned with the bucket order; -1 past a dead end
  double log_q = 0.0;
  bool dead_end = false;
};

// One forward pass along the order; at each position the bucket product
// gives an unnormalized distribution over the d values. A position where
// all d values have zero mass is a dead end (counted as a rejection by the
// samplers).
DrawResult draw_sample(const OrderedBuckets& buckets, Rng& rng);

struct SampleRecord {
  std::vector<int> assignment;  // aligned with the sorted cutset; -1 unset
  double log_q = 0.0;
  double log_pjoint = kNegativeInfinity;
  double log_weight = kNegativeInfinity;
  bool rejected = true;
  // Rao-Blackwellised conditionals r_i from the exact pass given the sample.
  std::vector<std::pair<int, std::vector<double>>> discrete_beliefs;
  std::vector<std::pair<int, std::pair<double, double>>> continuous_moments;
};

struct WeightedSampleSet {
  std::vector<int> cutset;  // sorted ids the assignments refer to
  std::vector<SampleRecord> records;
  std::vector<double> normalized_weights;  // aligned with records; 0 if rejected
  long long rejection_count = 0;
  long long total_drawn = 0;

  double rejection_rate() const {
    return total_drawn == 0
               ? 0.0
               : static_cast<double>(rejection_count) / total_drawn;
  }
};

struct MarginalEstimates {
  std::map<int, std::vector<double>> discrete;
  std::map<int, std::pair<double, double>> continuous;  // mean, variance
};

struct SamplingResult {
  WeightedSampleSet samples;
  MarginalEstimates estimates;
};

struct SamplingOptions {
  // Draw until this wall-clock budget is spent instead of a fixed count.
  std::optional<double> time_budget_seconds;
  // Drop per-sample records (estimates are accumulated streaming); used by
  // the benchmark harness to bound memory on long runs.
  bool keep_records = true;
  double ijgp_tolerance = 1e-8;
  int clock_check_interval = 64;
};

// Exact conditioning of one sample: log P(assignment, e) from the remainder
// tree, the conditional beliefs, and the importance weight. An inconsistent
// assignment is a rejected record, not an error.
SampleRecord weigh_sample(const HybridMixedNetwork& net,
                          const JoinTreeDecomposition& remainder_tree,
                          const Evidence& evidence,
                          const std::vector<int>& cutset,
                          const std::vector<int>& values, double log_q);

// Figure-5 pipeline: IJGP(i) for k iterations, a w-cutset, ordered buckets
// over the cutset, N weighted samples, Rao-Blackwellised estimates.
SamplingResult ijgp_rb_sampling(const HybridMixedNetwork& net,
                                const Evidence& evidence, int i_bound,
                                int iterations, int w, long long n_samples,
                                uint64_t seed,
                                const SamplingOptions& options = {});

// The i = 0 baseline: same pipeline but the proposal is prior-derived
// (cutset variables sampled in topological order from their CPTs, with
// unassigned discrete parents marginalized out uniformly).
SamplingResult pure_rb_sampling(const HybridMixedNetwork& net,
                                const Evidence& evidence, int w,
                                long long n_samples, uint64_t seed,
                                const SamplingOptions& options = {});

// Weighted reduction of a recorded sample set: indicator sums for cutset
// variables, weighted conditional beliefs for the remainder. Throws
// AllSamplesRejected when nothing survived.
MarginalEstimates estimate_marginals(const WeightedSampleSet& set,
                                     const HybridMixedNetwork& net,
                                     const Evidence& evidence);

}  // namespace hmn
