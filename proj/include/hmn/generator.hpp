#pragma once

#include <cstdint>

#include "hmn/model.hpp"

namespace hmn {

// The paper-style parametric model (N1, N2, K, C1, C2, P, T): N1 discrete
// variables of cardinality K, N2 Gaussian variables, C2 CPDs with P parents
// each, and C1 binary constraints with exactly T forbidden tuples each
// (Model B).
struct GeneratorParams {
  int n1 = 0;       // discrete variables
  int n2 = 0;       // continuous variables
  int k = 2;        // discrete cardinality
  int c1 = 0;       // constraints
  int c2 = 0;       // CPDs with parents
  int p = 0;        // parents per CPD
  int t = 0;        // forbidden tuples per constraint (tightness)
  uint64_t seed = 0;
};

// Deterministic random instance: CPD children drawn over a random
// topological layout (discrete children take only discrete parents, no
// Gaussian variable gets a discrete child), uniform-random normalized CPT
// rows, Gaussian intercepts/variances in (0,1) and coefficients in (-1,1),
// parentless priors for every non-child variable, and Model B constraints.
HybridMixedNetwork generate(const GeneratorParams& params);

// floor(fraction * n) variables chosen uniformly; values come from one
// forward sample of the network, re-drawn (up to 1000 attempts) until the
// discrete part satisfies every constraint, so P(e) > 0.
Evidence select_evidence(const HybridMixedNetwork& net, double fraction,
                         uint64_t seed);

}  // namespace hmn
