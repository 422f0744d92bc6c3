#include "hmn/decomposition.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

namespace hmn {

namespace {

bool subset_of(const std::vector<int>& a, const std::vector<int>& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

std::vector<int> sorted_intersection(const std::vector<int>& a,
                                     const std::vector<int>& b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

std::vector<int> sorted_union(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::vector<int> sorted_difference(const std::vector<int>& a,
                                   const std::vector<int>& b) {
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[b] = a;
    return true;
  }
};

// Simulated elimination along `order` on a working copy of the graph;
// records the clique {v} ∪ neighbors(v) formed at each step.
std::vector<std::vector<int>> elimination_cliques(UndirectedGraph work,
                                                  const std::vector<int>& order) {
  std::vector<std::vector<int>> cliques;
  std::vector<char> removed(work.n, 0);
  for (int v : order) {
    std::vector<int> nbrs;
    for (int u : work.adj[v])
      if (!removed[u]) nbrs.push_back(u);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      for (std::size_t j = i + 1; j < nbrs.size(); ++j)
        work.add_edge(nbrs[i], nbrs[j]);
    std::vector<int> clique = nbrs;
    clique.push_back(v);
    std::sort(clique.begin(), clique.end());
    cliques.push_back(std::move(clique));
    removed[v] = 1;
    for (int u : nbrs) work.adj[u].erase(v);
    work.adj[v].clear();
  }
  return cliques;
}

JoinTreeDecomposition assemble_join_tree(const HybridMixedNetwork& net,
                                         const UndirectedGraph& graph,
                                         const std::vector<int>& order,
                                         const std::vector<int>& conditioned) {
  JoinTreeDecomposition jt;
  jt.conditioned = conditioned;

  if (order.empty()) {
    // Everything is conditioned; a single empty node holds all functions.
    jt.nodes.push_back({});
    for (int f = 0; f < net.function_count(); ++f)
      jt.nodes[0].psi.push_back(f);
    jt.strong_root = 0;
    return jt;
  }

  auto cliques = elimination_cliques(graph, order);

  // Keep maximal cliques, earliest creation wins between duplicates.
  std::vector<char> drop(cliques.size(), 0);
  for (std::size_t i = 0; i < cliques.size(); ++i)
    for (std::size_t j = 0; j < cliques.size() && !drop[i]; ++j) {
      if (i == j || drop[j]) continue;
      if (subset_of(cliques[i], cliques[j]) &&
          (cliques[i].size() < cliques[j].size() || j < i))
        drop[i] = 1;
    }
  for (std::size_t i = 0; i < cliques.size(); ++i)
    if (!drop[i]) jt.nodes.push_back({cliques[i], {}});
  const int m = static_cast<int>(jt.nodes.size());

  // Maximum-separator spanning tree (Kruskal; zero-weight edges keep
  // disconnected components attached).
  struct Cand {
    int w, a, b;
  };
  std::vector<Cand> cands;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      cands.push_back({static_cast<int>(
                           sorted_intersection(jt.nodes[a].chi, jt.nodes[b].chi)
                               .size()),
                       a, b});
  std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
    if (x.w != y.w) return x.w > y.w;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });
  UnionFind uf(m);
  for (const auto& c : cands) {
    if (static_cast<int>(jt.edges.size()) == m - 1) break;
    if (uf.unite(c.a, c.b)) {
      jt.edges.emplace_back(c.a, c.b);
      jt.separators.push_back(
          sorted_intersection(jt.nodes[c.a].chi, jt.nodes[c.b].chi));
    }
  }

  // Assign each function to the earliest-created node covering its scope
  // (scope reduced by the conditioned set).
  for (int f = 0; f < net.function_count(); ++f) {
    const auto scope =
        sorted_difference(net.function_scope(FunctionId{f}), conditioned);
    int host = -1;
    for (int v = 0; v < m && host < 0; ++v)
      if (subset_of(scope, jt.nodes[v].chi)) host = v;
    if (host < 0)
      fail(ErrorCode::InvalidArgument,
           "triangulation failed to cover a function scope");
    jt.nodes[host].psi.push_back(f);
  }

  // Locate a strong root (lowest id that verifies Def 3.1).
  jt.strong_root = -1;
  for (int r = 0; r < m && jt.strong_root < 0; ++r)
    if (is_strong_root(net, jt, r)) jt.strong_root = r;
  if (jt.strong_root < 0)
    fail(ErrorCode::NoStrongRoot,
         "no strong root; was the order continuous-first?");

  verify_join_tree(net, jt);
  return jt;
}

}  // namespace

std::vector<int> constrained_elimination_order(const UndirectedGraph& g,
                                               const HybridMixedNetwork& net) {
  UndirectedGraph work = g;
  std::vector<char> removed(work.n, 0);
  int continuous_left = 0;
  for (int v = 0; v < work.n; ++v)
    if (!net.is_discrete(v)) ++continuous_left;

  std::vector<int> order;
  for (int step = 0; step < work.n; ++step) {
    int best = -1;
    long long best_fill = -1;
    for (int v = 0; v < work.n; ++v) {
      if (removed[v]) continue;
      if (continuous_left > 0 && net.is_discrete(v)) continue;
      long long fill = 0;
      const auto& nb = work.adj[v];
      for (auto it = nb.begin(); it != nb.end(); ++it) {
        auto jt = it;
        for (++jt; jt != nb.end(); ++jt)
          if (!work.has_edge(*it, *jt)) ++fill;
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    order.push_back(best);
    const std::vector<int> nb(work.adj[best].begin(), work.adj[best].end());
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        work.add_edge(nb[i], nb[j]);
    for (int u : nb) work.adj[u].erase(best);
    work.adj[best].clear();
    removed[best] = 1;
    if (!net.is_discrete(best)) --continuous_left;
  }
  return order;
}

JoinTreeDecomposition build_join_tree(const HybridMixedNetwork& net,
                                      const std::vector<int>& order) {
  if (static_cast<int>(order.size()) != net.size())
    fail(ErrorCode::InvalidArgument, "order must cover all variables");
  return assemble_join_tree(net, primal_graph(net), order, {});
}

JoinTreeDecomposition build_conditioned_join_tree(
    const HybridMixedNetwork& net, const std::vector<int>& conditioned) {
  std::vector<int> cond = conditioned;
  std::sort(cond.begin(), cond.end());
  UndirectedGraph g = primal_graph(net);
  for (int v : cond) {
    for (int u : g.adj[v]) g.adj[u].erase(v);
    g.adj[v].clear();
  }
  std::vector<char> is_cond(net.size(), 0);
  for (int v : cond) is_cond[v] = 1;

  // Constrained min-fill over the remainder only.
  UndirectedGraph work = g;
  std::vector<char> removed(net.size(), 0);
  for (int v : cond) removed[v] = 1;
  int continuous_left = 0;
  std::vector<int> remainder;
  for (int v = 0; v < net.size(); ++v)
    if (!is_cond[v]) {
      remainder.push_back(v);
      if (!net.is_discrete(v)) ++continuous_left;
    }
  std::vector<int> order;
  for (std::size_t step = 0; step < remainder.size(); ++step) {
    int best = -1;
    long long best_fill = -1;
    for (int v : remainder) {
      if (removed[v]) continue;
      if (continuous_left > 0 && net.is_discrete(v)) continue;
      long long fill = 0;
      const auto& nb = work.adj[v];
      for (auto it = nb.begin(); it != nb.end(); ++it) {
        auto jt = it;
        for (++jt; jt != nb.end(); ++jt)
          if (!work.has_edge(*it, *jt)) ++fill;
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    order.push_back(best);
    const std::vector<int> nb(work.adj[best].begin(), work.adj[best].end());
    for (std::size_t i = 0; i < nb.size(); ++i)
      for (std::size_t j = i + 1; j < nb.size(); ++j)
        work.add_edge(nb[i], nb[j]);
    for (int u : nb) work.adj[u].erase(best);
    work.adj[best].clear();
    removed[best] = 1;
    if (!net.is_discrete(best)) --continuous_left;
  }
  return assemble_join_tree(net, g, order, cond);
}

int adjusted_width(const JoinTreeDecomposition& jt,
                   const HybridMixedNetwork& net) {
  int w = -1;
  for (const auto& node : jt.nodes) {
    int nd = 0;
    for (int v : node.chi)
      if (net.is_discrete(v)) ++nd;
    w = std::max(w, nd - 1);
  }
  return w;
}

int adjusted_width(const JoinGraphDecomposition& jg,
                   const HybridMixedNetwork& net) {
  int w = -1;
  for (const auto& node : jg.nodes) {
    int nd = 0;
    for (int v : node.chi)
      if (net.is_discrete(v)) ++nd;
    w = std::max(w, nd - 1);
  }
  return w;
}

JoinGraphDecomposition build_join_graph(const HybridMixedNetwork& net,
                                        const std::vector<int>& order, int i) {
  if (i < 1) fail(ErrorCode::InvalidIBound, "i-bound must be >= 1");
  if (static_cast<int>(order.size()) != net.size())
    fail(ErrorCode::InvalidArgument, "order must cover all variables");

  std::vector<int> pos(net.size());
  for (std::size_t p = 0; p < order.size(); ++p) pos[order[p]] = static_cast<int>(p);

  struct Item {
    std::vector<int> scope;  // sorted
    int function = -1;       // function id, or
    int from_node = -1;      // origin node of a pending message edge
  };
  auto bucket_of = [&](const std::vector<int>& scope) {
    int best = pos[scope[0]];
    for (int v : scope) best = std::min(best, pos[v]);
    return best;
  };

  std::vector<std::vector<Item>> buckets(order.size());
  for (int f = 0; f < net.function_count(); ++f) {
    Item item{net.function_scope(FunctionId{f}), f, -1};
    buckets[bucket_of(item.scope)].push_back(std::move(item));
  }

  JoinGraphDecomposition jg;
  jg.i_bound = i;

  auto discrete_count = [&](const std::vector<int>& vars) {
    int c = 0;
    for (int v : vars)
      if (net.is_discrete(v)) ++c;
    return c;
  };

  for (std::size_t p = 0; p < order.size(); ++p) {
    auto& items = buckets[p];
    if (items.empty()) continue;
    const int var = order[p];

    // Deterministic packing order: wide scopes first, then by identity.
    std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
      if (a.scope.size() != b.scope.size())
        return a.scope.size() > b.scope.size();
      if (a.function != b.function) return a.function > b.function;
      return a.from_node < b.from_node;
    });

    // Partition into mini-buckets. A continuous variable's bucket stays
    // whole so its integral keeps every factor that anchors it.
    std::vector<std::vector<int>> minis;        // item indices
    std::vector<std::vector<int>> mini_scopes;  // union scope per mini-bucket
    if (!net.is_discrete(var)) {
      std::vector<int> all(items.size());
      std::iota(all.begin(), all.end(), 0);
      std::vector<int> scope;
      for (const auto& it : items) scope = sorted_union(scope, it.scope);
      minis.push_back(all);
      mini_scopes.push_back(scope);
    } else {
      for (std::size_t t = 0; t < items.size(); ++t) {
        bool placed = false;
        for (std::size_t mb = 0; mb < minis.size() && !placed; ++mb) {
          auto merged = sorted_union(mini_scopes[mb], items[t].scope);
          if (discrete_count(merged) <= i + 1) {
            minis[mb].push_back(static_cast<int>(t));
            mini_scopes[mb] = std::move(merged);
            placed = true;
          }
        }
        if (!placed) {
          if (discrete_count(items[t].scope) > i + 1) jg.has_oversized = true;
          minis.push_back({static_cast<int>(t)});
          mini_scopes.push_back(items[t].scope);
        }
      }
    }

    // Materialize nodes, in-bucket chain edges, and the downward message.
    std::vector<int> node_ids;
    for (std::size_t mb = 0; mb < minis.size(); ++mb) {
      const int id = static_cast<int>(jg.nodes.size());
      JoinGraphNode node;
      node.chi = mini_scopes[mb];
      for (int t : minis[mb]) {
        const auto& item = items[t];
        if (item.function >= 0)
          node.psi.push_back(item.function);
        else
          jg.edges.push_back({item.from_node, id, item.scope});
      }
      std::sort(node.psi.begin(), node.psi.end());
      jg.nodes.push_back(std::move(node));
      node_ids.push_back(id);
    }
    for (std::size_t mb = 1; mb < node_ids.size(); ++mb)
      jg.edges.push_back({node_ids[mb - 1], node_ids[mb], {var}});

    for (std::size_t mb = 0; mb < minis.size(); ++mb) {
      auto out_scope = sorted_difference(mini_scopes[mb], {var});
      if (out_scope.empty()) continue;
      buckets[bucket_of(out_scope)].push_back(
          Item{std::move(out_scope), -1, node_ids[mb]});
    }
  }

  // Absorb nodes subsumed by a neighbor, so saturated i-bounds reproduce the
  // join tree's clique set.
  const int n0 = static_cast<int>(jg.nodes.size());
  std::vector<int> alias(n0);
  std::iota(alias.begin(), alias.end(), 0);
  auto resolve = [&](int v) {
    while (alias[v] != v) v = alias[v] = alias[alias[v]];
    return v;
  };
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& e : jg.edges) {
      const int a = resolve(e.a), b = resolve(e.b);
      if (a == b) continue;
      const auto& ca = jg.nodes[a].chi;
      const auto& cb = jg.nodes[b].chi;
      int keep = -1, gone = -1;
      if (subset_of(ca, cb) && subset_of(cb, ca)) {
        keep = std::min(a, b);
        gone = std::max(a, b);
      } else if (subset_of(ca, cb)) {
        keep = b;
        gone = a;
      } else if (subset_of(cb, ca)) {
        keep = a;
        gone = b;
      }
      if (keep < 0) continue;
      auto& kp = jg.nodes[keep].psi;
      for (int f : jg.nodes[gone].psi) kp.push_back(f);
      std::sort(kp.begin(), kp.end());
      jg.nodes[gone].psi.clear();
      alias[gone] = keep;
      changed = true;
    }
  }

  // Compact node ids and merge parallel edges by label union.
  std::vector<int> new_id(n0, -1);
  std::vector<JoinGraphNode> nodes;
  for (int v = 0; v < n0; ++v)
    if (resolve(v) == v) {
      new_id[v] = static_cast<int>(nodes.size());
      nodes.push_back(std::move(jg.nodes[v]));
    }
  std::map<std::pair<int, int>, std::vector<int>> merged;
  for (const auto& e : jg.edges) {
    int a = new_id[resolve(e.a)], b = new_id[resolve(e.b)];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    auto& label = merged[{a, b}];
    label = sorted_union(label, e.label);
  }
  jg.nodes = std::move(nodes);
  jg.edges.clear();
  for (auto& [key, label] : merged)
    jg.edges.push_back({key.first, key.second, std::move(label)});

  // Chain disconnected components together with empty-label edges, matching
  // the join tree's zero-separator spanning edges.
  {
    UnionFind uf(static_cast<int>(jg.nodes.size()));
    for (const auto& e : jg.edges) uf.unite(e.a, e.b);
    int prev_rep = -1;
    for (int v = 0; v < static_cast<int>(jg.nodes.size()); ++v) {
      if (uf.find(v) != v) continue;
      if (prev_rep >= 0) jg.edges.push_back({prev_rep, v, {}});
      prev_rep = uf.find(v);
    }
  }

  verify_join_graph(net, jg);
  return jg;
}

WCutset select_wcutset(const HybridMixedNetwork& net, int w,
                       const std::vector<int>& exclude) {
  if (w < 0) fail(ErrorCode::InvalidArgument, "w must be >= 0");
  const UndirectedGraph primal = primal_graph(net);
  std::vector<int> excl = exclude;
  std::sort(excl.begin(), excl.end());

  WCutset cut;
  cut.w = w;
  while (true) {
    const auto conditioned = sorted_union(cut.cutset, excl);
    auto tree = build_conditioned_join_tree(net, conditioned);
    if (adjusted_width(tree, net) <= w) {
      cut.remainder_tree = std::move(tree);
      break;
    }
    // Count over-width clique memberships per discrete variable.
    std::map<int, int> count;
    for (const auto& node : tree.nodes) {
      int nd = 0;
      for (int v : node.chi)
        if (net.is_discrete(v)) ++nd;
      if (nd - 1 <= w) continue;
      for (int v : node.chi)
        if (net.is_discrete(v)) ++count[v];
    }
    int best = -1, best_count = -1, best_degree = -1;
    std::vector<char> cond(net.size(), 0);
    for (int v : conditioned) cond[v] = 1;
    for (const auto& [v, c] : count) {
      int degree = 0;
      for (int u : primal.adj[v])
        if (!cond[u]) ++degree;
      if (c > best_count || (c == best_count && degree > best_degree)) {
        best = v;
        best_count = c;
        best_degree = degree;
      }
    }
    cut.cutset.push_back(best);
    std::sort(cut.cutset.begin(), cut.cutset.end());
  }
  for (int v = 0; v < net.size(); ++v)
    if (!std::binary_search(cut.cutset.begin(), cut.cutset.end(), v) &&
        !std::binary_search(excl.begin(), excl.end(), v))
      cut.remainder.push_back(v);
  return cut;
}

void verify_join_tree(const HybridMixedNetwork& net,
                      const JoinTreeDecomposition& jt) {
  const int m = static_cast<int>(jt.nodes.size());
  if (static_cast<int>(jt.edges.size()) != std::max(0, m - 1))
    fail(ErrorCode::InvalidArgument, "join tree edge count");

  // Every function covered exactly once.
  std::vector<int> assigned(net.function_count(), 0);
  for (int v = 0; v < m; ++v)
    for (int f : jt.nodes[v].psi) {
      ++assigned[f];
      const auto scope = sorted_difference(
          net.function_scope(FunctionId{f}), jt.conditioned);
      if (!subset_of(scope, jt.nodes[v].chi))
        fail(ErrorCode::InvalidArgument, "function scope not covered");
    }
  for (int f = 0; f < net.function_count(); ++f)
    if (assigned[f] != 1)
      fail(ErrorCode::InvalidArgument, "function not assigned exactly once");

  // Running intersection: the nodes containing each variable form a
  // connected subtree.
  std::vector<std::vector<int>> adj(m);
  for (const auto& [a, b] : jt.edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  for (int x = 0; x < net.size(); ++x) {
    std::vector<int> holders;
    for (int v = 0; v < m; ++v)
      if (std::binary_search(jt.nodes[v].chi.begin(), jt.nodes[v].chi.end(), x))
        holders.push_back(v);
    if (holders.size() <= 1) continue;
    std::vector<char> in(m, 0), seen(m, 0);
    for (int v : holders) in[v] = 1;
    std::deque<int> q{holders[0]};
    seen[holders[0]] = 1;
    int reached = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      ++reached;
      for (int u : adj[v])
        if (in[u] && !seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
    }
    if (reached != static_cast<int>(holders.size()))
      fail(ErrorCode::InvalidArgument, "running intersection violated");
  }
}

bool is_strong_root(const HybridMixedNetwork& net,
                    const JoinTreeDecomposition& jt, int root) {
  const int m = static_cast<int>(jt.nodes.size());
  std::vector<std::vector<std::pair<int, int>>> adj(m);  // (neighbor, edge)
  for (std::size_t e = 0; e < jt.edges.size(); ++e) {
    adj[jt.edges[e].first].emplace_back(jt.edges[e].second, e);
    adj[jt.edges[e].second].emplace_back(jt.edges[e].first, e);
  }
  std::vector<char> seen(m, 0);
  std::deque<int> q{root};
  seen[root] = 1;
  while (!q.empty()) {
    const int c = q.front();
    q.pop_front();
    for (const auto& [d, e] : adj[c]) {
      if (seen[d]) continue;
      seen[d] = 1;
      q.push_back(d);
      // Closer node is c: require sep ⊆ Δ or d\c ⊆ Γ.
      bool sep_discrete = true;
      for (int x : jt.separators[e])
        if (!net.is_discrete(x)) sep_discrete = false;
      if (sep_discrete) continue;
      bool added_continuous = true;
      for (int x : sorted_difference(jt.nodes[d].chi, jt.nodes[c].chi))
        if (net.is_discrete(x)) added_continuous = false;
      if (!added_continuous) return false;
    }
  }
  return true;
}

void verify_join_graph(const HybridMixedNetwork& net,
                       const JoinGraphDecomposition& jg) {
  const int m = static_cast<int>(jg.nodes.size());
  std::vector<int> assigned(net.function_count(), 0);
  for (int v = 0; v < m; ++v)
    for (int f : jg.nodes[v].psi) {
      ++assigned[f];
      if (!subset_of(net.function_scope(FunctionId{f}), jg.nodes[v].chi))
        fail(ErrorCode::InvalidArgument, "function scope not covered");
    }
  for (int f = 0; f < net.function_count(); ++f)
    if (assigned[f] != 1)
      fail(ErrorCode::InvalidArgument, "function not assigned exactly once");

  for (const auto& e : jg.edges) {
    const auto sep =
        sorted_intersection(jg.nodes[e.a].chi, jg.nodes[e.b].chi);
    if (!subset_of(e.label, sep))
      fail(ErrorCode::InvalidArgument, "edge label outside separator");
  }

  // Arc-labeled running intersection: for each variable, the nodes holding
  // it are connected through edges labeled with it.
  for (int x = 0; x < net.size(); ++x) {
    std::vector<int> holders;
    for (int v = 0; v < m; ++v)
      if (std::binary_search(jg.nodes[v].chi.begin(), jg.nodes[v].chi.end(), x))
        holders.push_back(v);
    if (holders.size() <= 1) continue;
    std::vector<std::vector<int>> adj(m);
    for (const auto& e : jg.edges)
      if (std::binary_search(e.label.begin(), e.label.end(), x)) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
      }
    std::vector<char> seen(m, 0);
    std::deque<int> q{holders[0]};
    seen[holders[0]] = 1;
    int reached = 1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (int u : adj[v])
        if (!seen[u]) {
          seen[u] = 1;
          ++reached;
          q.push_back(u);
        }
    }
    for (int v : holders)
      if (!seen[v])
        fail(ErrorCode::InvalidArgument,
             "arc-labeled running intersection violated");
    (void)reached;
  }
}

int graph_diameter(int node_count,
                   const std::vector<std::pair<int, int>>& edges) {
  if (node_count <= 1) return 0;
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  int diameter = 0;
  for (int s = 0; s < node_count; ++s) {
    std::vector<int> dist(node_count, -1);
    std::deque<int> q{s};
    dist[s] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      diameter = std::max(diameter, dist[v]);
      for (int u : adj[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push_back(u);
        }
    }
  }
  return diameter;
}

}  // namespace hmn
