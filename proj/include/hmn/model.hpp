#pragma once

#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "hmn/errors.hpp"

namespace hmn {

enum class VarKind { Discrete, Continuous };

struct Variable {
  int id = -1;
  std::string name;
  VarKind kind = VarKind::Discrete;
  int cardinality = 0;  // >= 2 for discrete, ignored for continuous
};

// P(child | parents) for a discrete child. `table` is row-major over parent
// configurations (first parent slowest), with the child value varying
// fastest inside each row.
struct TabularCPD {
  int child = -1;
  std::vector<int> parents;
  std::vector<double> table;
};

// Linear Gaussian conditional: given discrete parent configuration i and
// continuous parent values z, the child is N(intercept(i) + coeffs(i).z,
// variance(i)). `configs` is row-major over `discrete_parents`.
struct LinearGaussianCPD {
  struct Config {
    double intercept = 0.0;
    std::vector<double> coefficients;
    double variance = 1.0;
  };
  int child = -1;
  std::vector<int> discrete_parents;
  std::vector<int> continuous_parents;
  std::vector<Config> configs;
};

using Cpd = std::variant<TabularCPD, LinearGaussianCPD>;

// Hard constraint: the set of allowed tuples over a discrete scope.
// Generators that think in forbidden tuples (no-goods) convert before
// construction.
struct ConstraintRelation {
  std::vector<int> scope;
  std::vector<std::vector<int>> allowed;
};

// Observed values, keyed by variable id. Discrete observations are stored
// as exact small integers inside the double.
struct Evidence {
  std::map<int, double> values;

  bool contains(int id) const { return values.count(id) != 0; }
  double at(int id) const { return values.at(id); }
  int discrete_at(int id) const { return static_cast<int>(values.at(id)); }
  void set(int id, double v) { values[id] = v; }
  bool empty() const { return values.empty(); }
  std::size_t size() const { return values.size(); }
};

struct UndirectedGraph {
  int n = 0;
  std::vector<std::set<int>> adj;

  void add_edge(int a, int b) {
    if (a == b) return;
    adj[a].insert(b);
    adj[b].insert(a);
  }
  bool has_edge(int a, int b) const { return adj[a].count(b) != 0; }
  std::size_t edge_count() const {
    std::size_t m = 0;
    for (const auto& s : adj) m += s.size();
    return m / 2;
  }
};

// A function of the network is either the CPD owned by a variable or a
// constraint relation; this index scheme gives every function a stable id
// used by decompositions (0..n-1 are CPDs keyed by child, then constraints).
struct FunctionId {
  int value = -1;
  bool is_cpd(int n_vars) const { return value < n_vars; }
  int constraint_index(int n_vars) const { return value - n_vars; }
};

class HybridMixedNetwork {
 public:
  HybridMixedNetwork() = default;

  int size() const { return static_cast<int>(variables_.size()); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(int id) const { return variables_.at(id); }
  const Cpd& cpd(int child) const { return cpds_.at(child); }
  const std::vector<ConstraintRelation>& constraints() const {
    return constraints_;
  }
  const std::vector<int>& parents(int id) const { return parents_.at(id); }
  const std::vector<int>& topological_order() const { return topo_order_; }

  bool is_discrete(int id) const {
    return variables_.at(id).kind == VarKind::Discrete;
  }
  int cardinality(int id) const { return variables_.at(id).cardinality; }

  std::vector<int> discrete_ids() const;
  std::vector<int> continuous_ids() const;

  int id_of(const std::string& name) const;

  // Scope of function f (CPD scope = child plus parents).
  std::vector<int> function_scope(FunctionId f) const;
  int function_count() const {
    return size() + static_cast<int>(constraints_.size());
  }

  // Fast membership test against the allowed set of constraint c, with the
  // tuple given in the constraint's scope order.
  bool constraint_allows(int c, std::span<const int> tuple) const;

  friend HybridMixedNetwork build_network(std::vector<Variable> variables,
                                          std::vector<Cpd> cpds,
                                          std::vector<ConstraintRelation> constraints);

 private:
  std::vector<Variable> variables_;
  std::vector<Cpd> cpds_;  // indexed by child id
  std::vector<ConstraintRelation> constraints_;
  std::vector<std::vector<int>> parents_;
  std::vector<int> topo_order_;
  std::vector<std::unordered_set<long long>> allowed_sets_;
};

// Validates all structural invariants (acyclicity, CPT normalization,
// the no-discrete-child-of-continuous restriction, nonempty relations,
// reference integrity) and freezes the network.
HybridMixedNetwork build_network(std::vector<Variable> variables,
                                 std::vector<Cpd> cpds,
                                 std::vector<ConstraintRelation> constraints);

// Vertex per variable, a clique over the scope of every CPD and constraint.
UndirectedGraph primal_graph(const HybridMixedNetwork& net);

// log of  prod_i P_i(x)  *  prod_j 1[x in R_j], with Gaussian CPDs evaluated
// as densities. Returns -inf when a constraint is violated or a CPT entry is
// zero. `assignment` must cover every variable (discrete entries integral).
double log_joint_density(const HybridMixedNetwork& net,
                         std::span<const double> assignment);

// Throws unless every evidence value names a real variable and is in range.
void validate_evidence(const HybridMixedNetwork& net, const Evidence& ev);

}  // namespace hmn
