#pragma once

#include <utility>
#include <vector>

#include "hmn/model.hpp"

namespace hmn {

// Min-fill elimination order with every continuous variable eliminated
// before any discrete one (the restriction that guarantees a strong root
// exists in the resulting join tree). Ties break toward the lowest id.
std::vector<int> constrained_elimination_order(const UndirectedGraph& g,
                                               const HybridMixedNetwork& net);

struct JoinTreeNode {
  std::vector<int> chi;  // covered variables, sorted
  std::vector<int> psi;  // assigned function ids
};

struct JoinTreeDecomposition {
  std::vector<JoinTreeNode> nodes;
  std::vector<std::pair<int, int>> edges;        // (a, b) with a < b
  std::vector<std::vector<int>> separators;      // aligned with edges
  int strong_root = 0;
  // Variables excluded from every chi; they are instantiated (as evidence or
  // a cutset assignment) before the tree is calibrated.
  std::vector<int> conditioned;
};

// Triangulates along `order` (maximal cliques become nodes), connects them
// with a maximum-separator spanning tree, assigns every function to the
// earliest-created covering node, and locates a strong root.
JoinTreeDecomposition build_join_tree(const HybridMixedNetwork& net,
                                      const std::vector<int>& order);

// Same construction on the primal graph with `conditioned` vertices removed;
// function assignment uses scopes reduced by the conditioned set.
JoinTreeDecomposition build_conditioned_join_tree(
    const HybridMixedNetwork& net, const std::vector<int>& conditioned);

struct JoinGraphNode {
  std::vector<int> chi;
  std::vector<int> psi;
};

struct JoinGraphEdge {
  int a = -1, b = -1;
  std::vector<int> label;  // separator label, sorted
};

struct JoinGraphDecomposition {
  std::vector<JoinGraphNode> nodes;
  std::vector<JoinGraphEdge> edges;
  int i_bound = 0;
  // Set when a single function's discrete scope exceeded i+1 and forced an
  // oversized node (functions are grouped, never split).
  bool has_oversized = false;
};

// Mini-bucket style join graph along the elimination order: each bucket's
// items are grouped into mini-buckets of at most i+1 discrete variables
// (continuous variables do not count against the bound and buckets of
// continuous variables are never split). Nodes whose chi is contained in an
// adjacent node's chi are absorbed, so i >= treewidth reproduces the join
// tree.
JoinGraphDecomposition build_join_graph(const HybridMixedNetwork& net,
                                        const std::vector<int>& order, int i);

// max |chi(v) ∩ Δ| - 1 over all nodes (-1 for an empty decomposition).
int adjusted_width(const JoinTreeDecomposition& jt,
                   const HybridMixedNetwork& net);
int adjusted_width(const JoinGraphDecomposition& jg,
                   const HybridMixedNetwork& net);

struct WCutset {
  std::vector<int> cutset;     // sorted discrete ids
  std::vector<int> remainder;  // everything else (minus excluded)
  int w = 0;
  // Certificate: a special join tree of the remainder with adjusted width
  // <= w, conditioned on cutset ∪ excluded.
  JoinTreeDecomposition remainder_tree;
};

// Greedy w-cutset: repeatedly build the remainder join tree and, while its
// adjusted width exceeds w, remove the discrete variable in the most
// over-width cliques (ties by primal degree, then lowest id). `exclude`
// lists variables already conditioned (e.g. evidence); they join neither
// side.
WCutset select_wcutset(const HybridMixedNetwork& net, int w,
                       const std::vector<int>& exclude = {});

// Structural checks (throw InvalidArgument on violation); used by tests and
// after every construction.
void verify_join_tree(const HybridMixedNetwork& net,
                      const JoinTreeDecomposition& jt);
bool is_strong_root(const HybridMixedNetwork& net,
                    const JoinTreeDecomposition& jt, int root);
void verify_join_graph(const HybridMixedNetwork& net,
                       const JoinGraphDecomposition& jg);

// BFS diameter over an edge list (0 for a single node); INT_MAX/2 bound is
// never hit on valid decompositions.
int graph_diameter(int node_count, const std::vector<std::pair<int, int>>& edges);

}  // namespace hmn
