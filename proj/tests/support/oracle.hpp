#pragma once

// Test-only brute-force reference: discrete configurations are enumerated
// and the continuous subnetwork is composed analytically in moment form
// (means/covariances straight from the linear-Gaussian recursions), so it
// shares no code path with the canonical-form potential algebra it checks.

#include <map>
#include <utility>
#include <vector>

#include "hmn/generator.hpp"
#include "hmn/model.hpp"
#include "hmn/rng.hpp"

namespace hmn::testsupport {

struct OracleResult {
  double log_evidence = 0.0;
  std::map<int, std::vector<double>> discrete;  // unobserved discrete vars
  std::map<int, std::pair<double, double>> continuous;  // mean, variance
};

OracleResult enumerate_posterior(const HybridMixedNetwork& net,
                                 const Evidence& evidence);

// Random oracle-checkable instance: <= max_discrete discrete vars of
// cardinality <= max_card, <= max_continuous continuous vars, and a few
// binary difference-style constraints.
struct SmallNetSpec {
  int max_discrete = 10;
  int max_card = 3;
  int max_continuous = 3;
  int max_constraints = 4;
};
HybridMixedNetwork random_small_net(Rng& rng, const SmallNetSpec& spec = {});

// Uniformly chosen consistent evidence over `count` variables (forward
// sampled, redrawn until the constraints hold).
Evidence random_consistent_evidence(const HybridMixedNetwork& net, Rng& rng,
                                    int count);

// The running example's shape: discrete A, B, C, F (ternary) with
// P(A), P(B|A), P(C|A), P(F|B,C), pairwise != constraints on (A,B), (A,C),
// (B,C), (C,F), and continuous D <- A, G <- D.
HybridMixedNetwork figure_network();

ConstraintRelation not_equal(const HybridMixedNetwork& net, int a, int b);

}  // namespace hmn::testsupport
