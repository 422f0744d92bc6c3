#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "hmn/decomposition.hpp"
#include "hmn/potential.hpp"

namespace hmn {

struct IjgpOptions {
  int max_iterations = 10;
  double tolerance = 1e-8;
  // Stop after the first round that exceeds this wall-clock budget.
  std::optional<double> time_budget_seconds;
};

// State of an IJGP(i) run: the join graph, the evidence-reduced node
// functions, and the current message on every directed edge (slot 2e is
// a->b, 2e+1 is b->a). Non-convergence is a reported state, not an error.
struct IjgpState {
  std::shared_ptr<const JoinGraphDecomposition> graph;
  const HybridMixedNetwork* net = nullptr;
  Evidence evidence;
  std::vector<std::vector<CGPotential>> node_functions;
  std::vector<CGPotential> messages;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
  // Messages whose continuous integral was improper this round were replaced
  // by vacuous ones; a nonzero count flags a loopy-graph artifact.
  int improper_messages = 0;
  // Every component of some node's belief is zero mass: the constraint
  // propagation discovered global inconsistency.
  bool inconsistent = false;
};

// Synchronous (Jacobi) rounds: each directed edge's message is recomputed
// from the previous round, projected onto the edge label and normalized.
// Stops when the residual drops below tolerance or after max_iterations.
IjgpState run_ijgp(const HybridMixedNetwork& net,
                   const JoinGraphDecomposition& graph,
                   const Evidence& evidence, const IjgpOptions& options = {});

// Belief of the lowest-id covering node, reduced onto the variable and
// normalized. Point mass for evidence variables.
std::vector<double> approx_discrete_marginal(const IjgpState& state, int var);

// Moment-matched posterior guess for a continuous variable.
GaussianMoments approx_continuous_moments(const IjgpState& state, int var);

// Values whose belief mass is exactly zero (sentinel-derived, never from
// numeric underflow). Guaranteed sound: a value with positive exact
// posterior never appears here.
std::vector<int> zero_support(const IjgpState& state, int var);

}  // namespace hmn
