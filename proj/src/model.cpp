#include "hmn/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace hmn {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRowSumTol = 1e-12;

long long encode_tuple(std::span<const int> tuple, std::span<const int> cards) {
  long long idx = 0;
  for (std::size_t i = 0; i < tuple.size(); ++i) {
    idx = idx * cards[i] + tuple[i];
  }
  return idx;
}

}  // namespace

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::CyclicGraph: return "CyclicGraph";
    case ErrorCode::ContinuousHasDiscreteChild: return "ContinuousHasDiscreteChild";
    case ErrorCode::UnnormalizedCPT: return "UnnormalizedCPT";
    case ErrorCode::EmptyRelation: return "EmptyRelation";
    case ErrorCode::DanglingVariableReference: return "DanglingVariableReference";
    case ErrorCode::InvalidGaussian: return "InvalidGaussian";
    case ErrorCode::IncompleteAssignment: return "IncompleteAssignment";
    case ErrorCode::SingularBlock: return "SingularBlock";
    case ErrorCode::NoStrongRoot: return "NoStrongRoot";
    case ErrorCode::InvalidIBound: return "InvalidIBound";
    case ErrorCode::InconsistentEvidence: return "InconsistentEvidence";
    case ErrorCode::VariableNotCovered: return "VariableNotCovered";
    case ErrorCode::AllSamplesRejected: return "AllSamplesRejected";
    case ErrorCode::InfeasibleParams: return "InfeasibleParams";
    case ErrorCode::EvidenceGenerationFailed: return "EvidenceGenerationFailed";
    case ErrorCode::ExactIntractable: return "ExactIntractable";
    case ErrorCode::UndefinedMetric: return "UndefinedMetric";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

std::vector<int> HybridMixedNetwork::discrete_ids() const {
  std::vector<int> out;
  for (const auto& v : variables_)
    if (v.kind == VarKind::Discrete) out.push_back(v.id);
  return out;
}

std::vector<int> HybridMixedNetwork::continuous_ids() const {
  std::vector<int> out;
  for (const auto& v : variables_)
    if (v.kind == VarKind::Continuous) out.push_back(v.id);
  return out;
}

int HybridMixedNetwork::id_of(const std::string& name) const {
  for (const auto& v : variables_)
    if (v.name == name) return v.id;
  fail(ErrorCode::DanglingVariableReference, "unknown variable name: " + name);
}

std::vector<int> HybridMixedNetwork::function_scope(FunctionId f) const {
  const int n = size();
  if (f.value < 0 || f.value >= function_count())
    fail(ErrorCode::InvalidArgument, "function id out of range");
  std::vector<int> scope;
  if (f.is_cpd(n)) {
    scope.push_back(f.value);
    if (const auto* t = std::get_if<TabularCPD>(&cpds_[f.value])) {
      scope.insert(scope.end(), t->parents.begin(), t->parents.end());
    } else {
      const auto& lg = std::get<LinearGaussianCPD>(cpds_[f.value]);
      scope.insert(scope.end(), lg.discrete_parents.begin(),
                   lg.discrete_parents.end());
      scope.insert(scope.end(), lg.continuous_parents.begin(),
                   lg.continuous_parents.end());
    }
  } else {
    const auto& rel = constraints_[f.constraint_index(n)];
    scope = rel.scope;
  }
  std::sort(scope.begin(), scope.end());
  return scope;
}

bool HybridMixedNetwork::constraint_allows(int c,
                                           std::span<const int> tuple) const {
  const auto& rel = constraints_.at(c);
  std::vector<int> cards(rel.scope.size());
  for (std::size_t i = 0; i < rel.scope.size(); ++i)
    cards[i] = cardinality(rel.scope[i]);
  return allowed_sets_.at(c).count(encode_tuple(tuple, cards)) != 0;
}

HybridMixedNetwork build_network(std::vector<Variable> variables,
                                 std::vector<Cpd> cpds,
                                 std::vector<ConstraintRelation> constraints) {
  const int n = static_cast<int>(variables.size());
  if (n == 0) fail(ErrorCode::InvalidArgument, "network has no variables");

  // Dense ids 0..n-1, unique names, discrete cardinality >= 2.
  std::vector<char> seen(n, 0);
  for (const auto& v : variables) {
    if (v.id < 0 || v.id >= n || seen[v.id])
      fail(ErrorCode::DanglingVariableReference,
           "variable ids must be dense 0..n-1");
    seen[v.id] = 1;
    if (v.kind == VarKind::Discrete && v.cardinality < 2)
      fail(ErrorCode::InvalidArgument,
           "discrete variable " + v.name + " needs cardinality >= 2");
  }
  std::sort(variables.begin(), variables.end(),
            [](const Variable& a, const Variable& b) { return a.id < b.id; });
  {
    std::set<std::string> names;
    for (const auto& v : variables)
      if (v.name.empty() || !names.insert(v.name).second)
        fail(ErrorCode::InvalidArgument, "variable names must be unique");
  }

  auto check_id = [&](int id) {
    if (id < 0 || id >= n)
      fail(ErrorCode::DanglingVariableReference, "variable id out of range");
  };

  // One CPD per variable, keyed by child.
  if (static_cast<int>(cpds.size()) != n)
    fail(ErrorCode::InvalidArgument, "expected exactly one CPD per variable");
  std::vector<Cpd> by_child(n);
  std::vector<char> has_cpd(n, 0);
  for (auto& c : cpds) {
    const int child = std::visit([](const auto& x) { return x.child; }, c);
    check_id(child);
    if (has_cpd[child])
      fail(ErrorCode::InvalidArgument,
           "variable " + variables[child].name + " has two CPDs");
    has_cpd[child] = 1;
    by_child[child] = std::move(c);
  }

  std::vector<std::vector<int>> parents(n);
  for (int v = 0; v < n; ++v) {
    if (const auto* t = std::get_if<TabularCPD>(&by_child[v])) {
      if (variables[v].kind != VarKind::Discrete)
        fail(ErrorCode::InvalidArgument,
             "tabular CPD on continuous variable " + variables[v].name);
      long long rows = 1;
      for (int p : t->parents) {
        check_id(p);
        if (variables[p].kind != VarKind::Discrete)
          fail(ErrorCode::ContinuousHasDiscreteChild,
               "continuous variable " + variables[p].name +
                   " has discrete child " + variables[v].name);
        rows *= variables[p].cardinality;
      }
      const int d = variables[v].cardinality;
      if (static_cast<long long>(t->table.size()) != rows * d)
        fail(ErrorCode::InvalidArgument,
             "CPT size mismatch for " + variables[v].name);
      for (long long r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (int k = 0; k < d; ++k) {
          const double p = t->table[r * d + k];
          if (!(p >= 0.0 && p <= 1.0 + kRowSumTol))
            fail(ErrorCode::UnnormalizedCPT,
                 "CPT entry outside [0,1] for " + variables[v].name);
          sum += p;
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
          fail(ErrorCode::UnnormalizedCPT,
               "CPT row does not sum to 1 for " + variables[v].name);
      }
      parents[v] = t->parents;
    } else {
      const auto& lg = std::get<LinearGaussianCPD>(by_child[v]);
      if (variables[v].kind != VarKind::Continuous)
        fail(ErrorCode::InvalidArgument,
             "linear Gaussian CPD on discrete variable " + variables[v].name);
      long long configs = 1;
      for (int p : lg.discrete_parents) {
        check_id(p);
        if (variables[p].kind != VarKind::Discrete)
          fail(ErrorCode::InvalidArgument, "discrete parent list mismatch");
        configs *= variables[p].cardinality;
      }
      for (int p : lg.continuous_parents) {
        check_id(p);
        if (variables[p].kind != VarKind::Continuous)
          fail(ErrorCode::InvalidArgument, "continuous parent list mismatch");
      }
      if (static_cast<long long>(lg.configs.size()) != configs)
        fail(ErrorCode::InvalidArgument,
             "config count mismatch for " + variables[v].name);
      for (const auto& cfg : lg.configs) {
        if (!(cfg.variance > 0.0) || !std::isfinite(cfg.variance))
          fail(ErrorCode::InvalidGaussian,
               "variance must be strictly positive for " + variables[v].name);
        if (cfg.coefficients.size() != lg.continuous_parents.size())
          fail(ErrorCode::InvalidGaussian,
               "coefficient count mismatch for " + variables[v].name);
      }
      parents[v] = lg.discrete_parents;
      parents[v].insert(parents[v].end(), lg.continuous_parents.begin(),
                        lg.continuous_parents.end());
    }
  }

  // Constraints: discrete scopes, in-range nonempty allowed sets.
  std::vector<std::unordered_set<long long>> allowed_sets;
  for (const auto& rel : constraints) {
    if (rel.scope.empty())
      fail(ErrorCode::InvalidArgument, "constraint with empty scope");
    std::vector<int> cards;
    for (int id : rel.scope) {
      check_id(id);
      if (variables[id].kind != VarKind::Discrete)
        fail(ErrorCode::InvalidArgument,
             "constraint mentions continuous variable " + variables[id].name);
      cards.push_back(variables[id].cardinality);
    }
    if (rel.allowed.empty())
      fail(ErrorCode::EmptyRelation, "constraint has an empty allowed set");
    std::unordered_set<long long> set;
    for (const auto& tuple : rel.allowed) {
      if (tuple.size() != rel.scope.size())
        fail(ErrorCode::InvalidArgument, "constraint tuple length mismatch");
      for (std::size_t i = 0; i < tuple.size(); ++i)
        if (tuple[i] < 0 || tuple[i] >= cards[i])
          fail(ErrorCode::InvalidArgument, "constraint tuple value out of range");
      set.insert(encode_tuple(tuple, cards));
    }
    allowed_sets.push_back(std::move(set));
  }

  // Kahn's algorithm; also yields the topological order.
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> children(n);
  for (int v = 0; v < n; ++v)
    for (int p : parents[v]) {
      children[p].push_back(v);
      ++indegree[v];
    }
  std::deque<int> queue;
  for (int v = 0; v < n; ++v)
    if (indegree[v] == 0) queue.push_back(v);
  std::vector<int> topo;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    topo.push_back(v);
    for (int c : children[v])
      if (--indegree[c] == 0) queue.push_back(c);
  }
  if (static_cast<int>(topo.size()) != n)
    fail(ErrorCode::CyclicGraph, "parent structure contains a cycle");

  HybridMixedNetwork net;
  net.variables_ = std::move(variables);
  net.cpds_ = std::move(by_child);
  net.constraints_ = std::move(constraints);
  net.parents_ = std::move(parents);
  net.topo_order_ = std::move(topo);
  net.allowed_sets_ = std::move(allowed_sets);
  return net;
}

UndirectedGraph primal_graph(const HybridMixedNetwork& net) {
  UndirectedGraph g;
  g.n = net.size();
  g.adj.resize(g.n);
  for (int f = 0; f < net.function_count(); ++f) {
    const auto scope = net.function_scope(FunctionId{f});
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j)
        g.add_edge(scope[i], scope[j]);
  }
  return g;
}

double log_joint_density(const HybridMixedNetwork& net,
                         std::span<const double> assignment) {
  const int n = net.size();
  if (static_cast<int>(assignment.size()) != n)
    fail(ErrorCode::IncompleteAssignment, "assignment size mismatch");
  for (int v = 0; v < n; ++v) {
    if (std::isnan(assignment[v]))
      fail(ErrorCode::IncompleteAssignment,
           "missing value for " + net.variable(v).name);
    if (net.is_discrete(v)) {
      const double x = assignment[v];
      if (x != std::floor(x) || x < 0 || x >= net.cardinality(v))
        fail(ErrorCode::IncompleteAssignment,
             "discrete value out of range for " + net.variable(v).name);
    }
  }

  double log_p = 0.0;
  for (int v = 0; v < n; ++v) {
    if (const auto* t = std::get_if<TabularCPD>(&net.cpd(v))) {
      long long row = 0;
      for (int p : t->parents)
        row = row * net.cardinality(p) + static_cast<int>(assignment[p]);
      const double entry =
          t->table[row * net.cardinality(v) + static_cast<int>(assignment[v])];
      if (entry <= 0.0) return kNegInf;
      log_p += std::log(entry);
    } else {
      const auto& lg = std::get<LinearGaussianCPD>(net.cpd(v));
      long long cfg = 0;
      for (int p : lg.discrete_parents)
        cfg = cfg * net.cardinality(p) + static_cast<int>(assignment[p]);
      const auto& c = lg.configs[cfg];
      double mean = c.intercept;
      for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
        mean += c.coefficients[j] * assignment[lg.continuous_parents[j]];
      const double d = assignment[v] - mean;
      log_p += -0.5 * d * d / c.variance -
               0.5 * std::log(2.0 * 3.14159265358979323846 * c.variance);
    }
  }
  for (std::size_t c = 0; c < net.constraints().size(); ++c) {
    const auto& rel = net.constraints()[c];
    std::vector<int> tuple(rel.scope.size());
    for (std::size_t i = 0; i < rel.scope.size(); ++i)
      tuple[i] = static_cast<int>(assignment[rel.scope[i]]);
    if (!net.constraint_allows(static_cast<int>(c), tuple)) return kNegInf;
  }
  return log_p;
}

void validate_evidence(const HybridMixedNetwork& net, const Evidence& ev) {
  for (const auto& [id, value] : ev.values) {
    if (id < 0 || id >= net.size())
      fail(ErrorCode::DanglingVariableReference, "evidence id out of range");
    if (net.is_discrete(id)) {
      if (value != std::floor(value) || value < 0 ||
          value >= net.cardinality(id))
        fail(ErrorCode::InvalidArgument,
             "evidence value out of range for " + net.variable(id).name);
    } else if (!std::isfinite(value)) {
      fail(ErrorCode::InvalidArgument,
           "evidence value must be finite for " + net.variable(id).name);
    }
  }
}

}  // namespace hmn
