#pragma once

#include <memory>
#include <vector>

#include "hmn/decomposition.hpp"
#include "hmn/potential.hpp"

namespace hmn {

struct Message {
  int from = -1, to = -1;
  CGPotential potential;   // scope ⊆ sep(from, to), max live g = 0
  double log_scale = 0.0;  // what normalization removed
};

// Result of a two-pass calibration. Beliefs are the node function products
// times every incoming message; `belief_log_offset` restores the absolute
// scale that message normalization removed.
class CalibratedTree {
 public:
  double log_evidence() const { return log_evidence_; }
  bool consistent() const { return log_evidence_ != kNegativeInfinity; }

  const JoinTreeDecomposition& tree() const { return *tree_; }
  const HybridMixedNetwork& net() const { return *net_; }
  const Evidence& evidence() const { return evidence_; }
  const std::vector<Message>& messages() const { return messages_; }
  const CGPotential& belief(int node) const { return beliefs_.at(node); }
  double belief_log_offset(int node) const { return offsets_.at(node); }

  // Lowest-id node whose chi covers the variable; VariableNotCovered if none.
  int covering_node(int var) const;

 private:
  friend class Calibrator;
  std::shared_ptr<const JoinTreeDecomposition> tree_;
  const HybridMixedNetwork* net_ = nullptr;
  Evidence evidence_;
  std::vector<Message> messages_;
  std::vector<CGPotential> beliefs_;
  std::vector<double> offsets_;
  double log_evidence_ = kNegativeInfinity;
};

// Reusable calibration engine: converts and caches the function potentials
// of a join tree once, then calibrates against any evidence. Calibrations
// are independent, so one engine may serve many threads concurrently.
class Calibrator {
 public:
  Calibrator(const HybridMixedNetwork& net, JoinTreeDecomposition tree);

  // Two passes (collect toward the strong root, then distribute). A total
  // mass of zero is not an error here: the result carries log_evidence =
  // -inf and no beliefs.
  CalibratedTree run(const Evidence& evidence) const;

  const JoinTreeDecomposition& tree() const { return *tree_; }

 private:
  const HybridMixedNetwork* net_;
  std::shared_ptr<const JoinTreeDecomposition> tree_;
  std::vector<std::vector<CGPotential>> node_functions_;
  std::vector<std::vector<std::pair<int, int>>> adjacency_;  // (neighbor, edge)
  std::vector<int> bfs_order_;
  std::vector<int> parent_;
};

// One-shot calibration; throws InconsistentEvidence when the evidence has
// zero mass under the constraints.
CalibratedTree calibrate(const HybridMixedNetwork& net,
                         const JoinTreeDecomposition& tree,
                         const Evidence& evidence);

// Posterior over one discrete variable (point mass for evidence variables).
std::vector<double> query_discrete_marginal(const CalibratedTree& cal, int var);

// Posterior mean and variance of one continuous variable; the mixture over
// the covering node's configurations is collapsed by moment matching.
GaussianMoments query_continuous_moments(const CalibratedTree& cal, int var);

// log P(assignment, evidence); -inf for an inconsistent (rejectable)
// assignment rather than an error.
double joint_probability(const HybridMixedNetwork& net,
                         const JoinTreeDecomposition& tree,
                         const Evidence& evidence,
                         const Evidence& assignment);

}  // namespace hmn
