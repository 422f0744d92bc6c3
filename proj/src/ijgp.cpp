#include "hmn/ijgp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace hmn {

namespace {

struct Adjacency {
  // per node: (neighbor, edge index)
  std::vector<std::vector<std::pair<int, int>>> at;

  explicit Adjacency(const JoinGraphDecomposition& g) {
    at.resize(g.nodes.size());
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      at[g.edges[e].a].emplace_back(g.edges[e].b, static_cast<int>(e));
      at[g.edges[e].b].emplace_back(g.edges[e].a, static_cast<int>(e));
    }
  }
};

int slot(const JoinGraphDecomposition& g, int edge, int from) {
  return 2 * edge + (g.edges[edge].a == from ? 0 : 1);
}

CGPotential node_product(const IjgpState& state, const Adjacency& adj, int v,
                         int excluded_neighbor) {
  CGPotential acc;
  for (const auto& f : state.node_functions[v]) acc = multiply(acc, f);
  for (const auto& [u, e] : adj.at[v]) {
    if (u == excluded_neighbor) continue;
    acc = multiply(acc, state.messages[slot(*state.graph, e, u)]);
  }
  return acc;
}

// Normalized per-configuration weights from the g table alone (the discrete
// structure of a message). Zero-mass entries stay exactly zero.
std::vector<double> discrete_weights(const CGPotential& p) {
  std::vector<double> w(p.config_count(), 0.0);
  double mx = kNegativeInfinity;
  for (int k = 0; k < p.config_count(); ++k)
    if (!p.zero_mass(k)) mx = std::max(mx, p.g(k));
  if (mx == kNegativeInfinity) return w;
  double total = 0.0;
  for (int k = 0; k < p.config_count(); ++k) {
    if (!p.zero_mass(k)) w[k] = std::exp(p.g(k) - mx);
    total += w[k];
  }
  for (double& x : w) x /= total;
  return w;
}

double message_residual(const CGPotential& before, const CGPotential& after) {
  if (before.discrete_vars() != after.discrete_vars() ||
      before.continuous_vars() != after.continuous_vars())
    return 1.0;
  const auto wb = discrete_weights(before);
  const auto wa = discrete_weights(after);
  double r = 0.0;
  for (std::size_t k = 0; k < wb.size(); ++k)
    r = std::max(r, std::abs(wa[k] - wb[k]));

  if (!after.continuous_vars().empty()) {
    for (int k = 0; k < after.config_count(); ++k) {
      const bool zb = before.zero_mass(k), za = after.zero_mass(k);
      if (zb != za) return 1.0;  // support appeared or vanished
      if (za) continue;
      try {
        Eigen::LLT<Eigen::MatrixXd> lb(before.K(k)), la(after.K(k));
        if (lb.info() != Eigen::Success || la.info() != Eigen::Success) {
          r = std::max(r, 1.0);
          continue;
        }
        const Eigen::VectorXd mb = lb.solve(before.h(k));
        const Eigen::VectorXd ma = la.solve(after.h(k));
        const Eigen::MatrixXd cb =
            lb.solve(Eigen::MatrixXd::Identity(mb.size(), mb.size()));
        const Eigen::MatrixXd ca =
            la.solve(Eigen::MatrixXd::Identity(ma.size(), ma.size()));
        const double dm = (ma - mb).cwiseAbs().maxCoeff() /
                          (1.0 + mb.cwiseAbs().maxCoeff());
        const double dv = (ca - cb).cwiseAbs().maxCoeff() /
                          (1.0 + cb.cwiseAbs().maxCoeff());
        r = std::max(r, std::min(1.0, std::max(dm, dv)));
      } catch (const Error&) {
        r = std::max(r, 1.0);
      }
    }
  }
  return r;
}

}  // namespace

IjgpState run_ijgp(const HybridMixedNetwork& net,
                   const JoinGraphDecomposition& graph,
                   const Evidence& evidence, const IjgpOptions& options) {
  if (options.max_iterations < 0)
    fail(ErrorCode::InvalidArgument, "max_iterations must be >= 0");
  validate_evidence(net, evidence);

  IjgpState state;
  state.graph = std::make_shared<JoinGraphDecomposition>(graph);
  state.net = &net;
  state.evidence = evidence;
  state.residual = std::numeric_limits<double>::infinity();

  const int m = static_cast<int>(graph.nodes.size());
  state.node_functions.resize(m);
  for (int v = 0; v < m; ++v)
    for (int f : graph.nodes[v].psi)
      state.node_functions[v].push_back(
          reduce_evidence(function_potential(net, FunctionId{f}), evidence));

  const Adjacency adj(*state.graph);
  state.messages.assign(2 * graph.edges.size(), CGPotential());

  const auto start = std::chrono::steady_clock::now();
  for (int round = 1; round <= options.max_iterations; ++round) {
    std::vector<CGPotential> next(state.messages.size());
    double residual = 0.0;
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      const auto& edge = state.graph->edges[e];
      for (int dir = 0; dir < 2; ++dir) {
        const int from = dir == 0 ? edge.a : edge.b;
        const int to = dir == 0 ? edge.b : edge.a;
        CGPotential msg;
        try {
          msg = project_onto(node_product(state, adj, from, to), edge.label);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::SingularBlock) throw;
          msg = CGPotential();  // improper integral: send no information
          ++state.improper_messages;
        }
        normalize_max_g(msg);
        const int s = slot(*state.graph, static_cast<int>(e), from);
        residual = std::max(residual, message_residual(state.messages[s], msg));
        next[s] = std::move(msg);
      }
    }
    state.messages = std::move(next);
    state.iterations = round;
    state.residual = residual;
    if (residual < options.tolerance) {
      state.converged = true;
      break;
    }
    if (options.time_budget_seconds) {
      const std::chrono::duration<double> elapsed =
          std::chrono::steady_clock::now() - start;
      if (elapsed.count() >= *options.time_budget_seconds) break;
    }
  }

  for (int v = 0; v < m && !state.inconsistent; ++v) {
    const CGPotential belief = node_product(state, adj, v, -1);
    bool all_zero = true;
    for (int k = 0; k < belief.config_count() && all_zero; ++k)
      if (!belief.zero_mass(k)) all_zero = false;
    if (all_zero) state.inconsistent = true;
  }
  return state;
}

namespace {

int covering_node(const IjgpState& state, int var) {
  for (std::size_t v = 0; v < state.graph->nodes.size(); ++v)
    if (std::binary_search(state.graph->nodes[v].chi.begin(),
                           state.graph->nodes[v].chi.end(), var))
      return static_cast<int>(v);
  fail(ErrorCode::VariableNotCovered,
       "variable " + state.net->variable(var).name + " not in the join graph");
}

// Log-domain marginal of one discrete variable from the covering node's
// belief. Falls back to the g table when the continuous integral is
// improper mid-run; the zero pattern is identical either way.
std::vector<double> log_marginal(const IjgpState& state, int var) {
  const Adjacency adj(*state.graph);
  const CGPotential belief =
      node_product(state, adj, covering_node(state, var), -1);
  const int keep[1] = {var};
  CGPotential marginal;
  try {
    marginal = project_onto(belief, keep);
  } catch (const Error& err) {
    if (err.code() != ErrorCode::SingularBlock) throw;
    CGPotential flat(belief.discrete_vars(), belief.cards(), {});
    for (int k = 0; k < belief.config_count(); ++k)
      if (belief.zero_mass(k))
        flat.set_zero_mass(k);
      else
        flat.g(k) = belief.g(k);
    std::vector<int> others;
    for (int v : flat.discrete_vars())
      if (v != var) others.push_back(v);
    marginal = marginalize_discrete(flat, others);
  }
  std::vector<double> out(state.net->cardinality(var), kNegativeInfinity);
  for (int k = 0; k < marginal.config_count(); ++k)
    if (!marginal.zero_mass(k)) out[k] = marginal.g(k);
  return out;
}

}  // namespace

std::vector<double> approx_discrete_marginal(const IjgpState& state, int var) {
  const auto& net = *state.net;
  if (!net.is_discrete(var))
    fail(ErrorCode::InvalidArgument, "variable is not discrete");
  const int card = net.cardinality(var);
  if (state.evidence.contains(var)) {
    std::vector<double> point(card, 0.0);
    point[state.evidence.discrete_at(var)] = 1.0;
    return point;
  }
  const auto lm = log_marginal(state, var);
  double mx = kNegativeInfinity;
  for (double v : lm) mx = std::max(mx, v);
  std::vector<double> probs(card, 0.0);
  if (mx == kNegativeInfinity)
    fail(ErrorCode::InconsistentEvidence, "belief has zero total mass");
  double total = 0.0;
  for (int k = 0; k < card; ++k) {
    if (lm[k] != kNegativeInfinity) probs[k] = std::exp(lm[k] - mx);
    total += probs[k];
  }
  for (double& p : probs) p /= total;
  return probs;
}

GaussianMoments approx_continuous_moments(const IjgpState& state, int var) {
  const auto& net = *state.net;
  if (net.is_discrete(var))
    fail(ErrorCode::InvalidArgument, "variable is not continuous");
  if (state.evidence.contains(var)) {
    GaussianMoments m;
    m.weight = 1.0;
    m.mean = Eigen::VectorXd::Constant(1, state.evidence.at(var));
    m.cov = Eigen::MatrixXd::Zero(1, 1);
    return m;
  }
  const Adjacency adj(*state.graph);
  const CGPotential belief =
      node_product(state, adj, covering_node(state, var), -1);
  std::vector<int> others;
  for (int c : belief.continuous_vars())
    if (c != var) others.push_back(c);
  CGPotential collapsed = marginalize_discrete(
      marginalize_continuous(belief, others), belief.discrete_vars());
  auto moments = to_moments(collapsed);
  GaussianMoments m = moments.at(0);
  m.weight = 1.0;
  return m;
}

std::vector<int> zero_support(const IjgpState& state, int var) {
  const auto& net = *state.net;
  if (!net.is_discrete(var))
    fail(ErrorCode::InvalidArgument, "variable is not discrete");
  std::vector<int> zeros;
  if (state.evidence.contains(var)) {
    const int observed = state.evidence.discrete_at(var);
    for (int k = 0; k < net.cardinality(var); ++k)
      if (k != observed) zeros.push_back(k);
    return zeros;
  }
  const auto lm = log_marginal(state, var);
  for (int k = 0; k < static_cast<int>(lm.size()); ++k)
    if (lm[k] == kNegativeInfinity) zeros.push_back(k);
  return zeros;
}

}  // namespace hmn
