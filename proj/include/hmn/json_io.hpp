#pragma once

#include <string>
#include <utility>

#include "hmn/decomposition.hpp"
#include "hmn/model.hpp"

namespace hmn {

// Network JSON: top-level keys `variables` (name, kind, cardinality?),
// `cpds` ({child, parents, table} or {child, discrete_parents,
// continuous_parents, configs:[{intercept, coefficients, variance}]}),
// `constraints` ({scope, forbidden:[tuples]}, converted to allowed sets on
// parse), `evidence` (name -> value). Variables are referenced by name;
// ids follow the order of the `variables` list.
std::pair<HybridMixedNetwork, Evidence> parse_network_json(
    const std::string& text);

std::string network_to_json(const HybridMixedNetwork& net,
                            const Evidence& evidence, int indent = 2);

// Diagnostic export of a decomposition (variable and function names, edges,
// strong root, adjusted width); not a stability-guaranteed format.
std::string decomposition_to_json(const HybridMixedNetwork& net,
                                  const JoinTreeDecomposition& jt,
                                  int indent = 2);
std::string decomposition_to_json(const HybridMixedNetwork& net,
                                  const JoinGraphDecomposition& jg,
                                  int indent = 2);

}  // namespace hmn
