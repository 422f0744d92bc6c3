#include "hmn/exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace hmn {

namespace {

// Messages per edge: slot 2e is a->b, slot 2e+1 is b->a for edge e = (a, b).
int slot(const JoinTreeDecomposition& tree, int edge, int from) {
  return 2 * edge + (tree.edges[edge].first == from ? 0 : 1);
}

}  // namespace

int CalibratedTree::covering_node(int var) const {
  for (std::size_t v = 0; v < tree_->nodes.size(); ++v)
    if (std::binary_search(tree_->nodes[v].chi.begin(),
                           tree_->nodes[v].chi.end(), var))
      return static_cast<int>(v);
  fail(ErrorCode::VariableNotCovered,
       "variable " + net_->variable(var).name + " not covered by the tree");
}

Calibrator::Calibrator(const HybridMixedNetwork& net, JoinTreeDecomposition tree)
    : net_(&net),
      tree_(std::make_shared<JoinTreeDecomposition>(std::move(tree))) {
  const int m = static_cast<int>(tree_->nodes.size());
  node_functions_.resize(m);
  for (int v = 0; v < m; ++v)
    for (int f : tree_->nodes[v].psi)
      node_functions_[v].push_back(function_potential(net, FunctionId{f}));

  adjacency_.resize(m);
  for (std::size_t e = 0; e < tree_->edges.size(); ++e) {
    adjacency_[tree_->edges[e].first].emplace_back(tree_->edges[e].second,
                                                   static_cast<int>(e));
    adjacency_[tree_->edges[e].second].emplace_back(tree_->edges[e].first,
                                                    static_cast<int>(e));
  }
  parent_.assign(m, -1);
  std::deque<int> q{tree_->strong_root};
  std::vector<char> seen(m, 0);
  seen[tree_->strong_root] = 1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    bfs_order_.push_back(v);
    for (const auto& [u, e] : adjacency_[v])
      if (!seen[u]) {
        seen[u] = 1;
        parent_[u] = v;
        q.push_back(u);
      }
  }
}

CalibratedTree Calibrator::run(const Evidence& evidence) const {
  const int m = static_cast<int>(tree_->nodes.size());
  CalibratedTree out;
  out.tree_ = tree_;
  out.net_ = net_;
  out.evidence_ = evidence;

  // Evidence enters through the node potentials.
  std::vector<CGPotential> reduced(m);
  for (int v = 0; v < m; ++v) {
    CGPotential acc;
    for (const auto& f : node_functions_[v])
      acc = multiply(acc, reduce_evidence(f, evidence));
    reduced[v] = std::move(acc);
  }

  const int n_edges = static_cast<int>(tree_->edges.size());
  std::vector<CGPotential> msgs(2 * n_edges);
  std::vector<double> scales(2 * n_edges, 0.0);

  auto product_excluding = [&](int v, int excluded_neighbor) {
    CGPotential acc = reduced[v];
    double scale = 0.0;
    for (const auto& [u, e] : adjacency_[v]) {
      if (u == excluded_neighbor) continue;
      const int s = slot(*tree_, e, u);
      acc = multiply(acc, msgs[s]);
      scale += scales[s];
    }
    return std::make_pair(std::move(acc), scale);
  };

  // Collect toward the strong root.
  for (auto it = bfs_order_.rbegin(); it != bfs_order_.rend(); ++it) {
    const int v = *it;
    const int p = parent_[v];
    if (p < 0) continue;
    int edge = -1;
    for (const auto& [u, e] : adjacency_[v])
      if (u == p) edge = e;
    auto [prod, scale] = product_excluding(v, p);
    CGPotential msg = project_onto(prod, tree_->separators[edge]);
    const int s = slot(*tree_, edge, v);
    scales[s] = scale + normalize_max_g(msg);
    msgs[s] = std::move(msg);
  }

  // Probability of evidence at the root.
  {
    const int root = tree_->strong_root;
    auto [belief, scale] = product_excluding(root, -1);
    const double mass = total_log_mass(belief);
    out.log_evidence_ =
        mass == kNegativeInfinity ? kNegativeInfinity : mass + scale;
  }
  if (out.log_evidence_ == kNegativeInfinity) return out;

  // Distribute away from the root. The outgoing message is the node's full
  // belief projected onto the separator with the collect message divided
  // back out; the division keeps clique masses exact where the projection
  // is a weak (moment-matched) marginal.
  out.beliefs_.resize(m);
  out.offsets_.resize(m);
  for (int v : bfs_order_) {
    auto [belief, scale] = product_excluding(v, -1);
    out.beliefs_[v] = std::move(belief);
    out.offsets_[v] = scale;
    for (const auto& [u, e] : adjacency_[v]) {
      if (parent_[u] != v) continue;
      const int up = slot(*tree_, e, u);  // collect message u -> v
      CGPotential msg = divide(
          project_onto(out.beliefs_[v], tree_->separators[e]), msgs[up]);
      const int s = slot(*tree_, e, v);
      scales[s] = scale - scales[up] + normalize_max_g(msg);
      msgs[s] = std::move(msg);
    }
  }
  out.messages_.reserve(2 * n_edges);
  for (int e = 0; e < n_edges; ++e) {
    out.messages_.push_back(Message{tree_->edges[e].first,
                                    tree_->edges[e].second, msgs[2 * e],
                                    scales[2 * e]});
    out.messages_.push_back(Message{tree_->edges[e].second,
                                    tree_->edges[e].first, msgs[2 * e + 1],
                                    scales[2 * e + 1]});
  }
  return out;
}

CalibratedTree calibrate(const HybridMixedNetwork& net,
                         const JoinTreeDecomposition& tree,
                         const Evidence& evidence) {
  validate_evidence(net, evidence);
  Calibrator engine(net, tree);
  CalibratedTree out = engine.run(evidence);
  if (!out.consistent())
    fail(ErrorCode::InconsistentEvidence,
         "evidence has zero probability under the constraints");
  return out;
}

std::vector<double> query_discrete_marginal(const CalibratedTree& cal,
                                            int var) {
  const auto& net = cal.net();
  if (!net.is_discrete(var))
    fail(ErrorCode::InvalidArgument, "variable is not discrete");
  const int card = net.cardinality(var);
  if (cal.evidence().contains(var)) {
    std::vector<double> point(card, 0.0);
    point[cal.evidence().discrete_at(var)] = 1.0;
    return point;
  }
  if (!cal.consistent())
    fail(ErrorCode::InconsistentEvidence, "calibration had zero mass");
  const int node = cal.covering_node(var);
  const int keep[1] = {var};
  CGPotential marginal = project_onto(cal.belief(node), keep);

  std::vector<double> probs(card, 0.0);
  double mx = kNegativeInfinity;
  for (int k = 0; k < card; ++k)
    if (!marginal.zero_mass(k)) mx = std::max(mx, marginal.g(k));
  if (mx == kNegativeInfinity)
    fail(ErrorCode::InconsistentEvidence, "marginal has zero mass");
  double total = 0.0;
  for (int k = 0; k < card; ++k) {
    if (!marginal.zero_mass(k)) probs[k] = std::exp(marginal.g(k) - mx);
    total += probs[k];
  }
  for (double& p : probs) p /= total;
  return probs;
}

GaussianMoments query_continuous_moments(const CalibratedTree& cal, int var) {
  const auto& net = cal.net();
  if (net.is_discrete(var))
    fail(ErrorCode::InvalidArgument, "variable is not continuous");
  if (cal.evidence().contains(var)) {
    GaussianMoments m;
    m.weight = 1.0;
    m.mean = Eigen::VectorXd::Constant(1, cal.evidence().at(var));
    m.cov = Eigen::MatrixXd::Zero(1, 1);
    return m;
  }
  if (!cal.consistent())
    fail(ErrorCode::InconsistentEvidence, "calibration had zero mass");
  const int node = cal.covering_node(var);
  const CGPotential& belief = cal.belief(node);

  std::vector<int> others;
  for (int c : belief.continuous_vars())
    if (c != var) others.push_back(c);
  CGPotential collapsed = marginalize_discrete(
      marginalize_continuous(belief, others), belief.discrete_vars());
  auto moments = to_moments(collapsed);
  GaussianMoments m = moments.at(0);
  m.weight = 1.0;  // posterior is normalized by definition
  return m;
}

double joint_probability(const HybridMixedNetwork& net,
                         const JoinTreeDecomposition& tree,
                         const Evidence& evidence,
                         const Evidence& assignment) {
  Evidence combined = evidence;
  for (const auto& [id, value] : assignment.values) {
    if (combined.contains(id) && combined.at(id) != value)
      fail(ErrorCode::InvalidArgument,
           "assignment conflicts with evidence on " + net.variable(id).name);
    combined.set(id, value);
  }
  validate_evidence(net, combined);
  Calibrator engine(net, tree);
  return engine.run(combined).log_evidence();
}

}  // namespace hmn
