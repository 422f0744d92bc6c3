#include "hmn/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "hmn/rng.hpp"

namespace hmn {

namespace {

// First `count` entries of a partial Fisher-Yates shuffle: a uniform draw of
// `count` distinct items, deterministic given the rng state.
std::vector<int> sample_without_replacement(std::vector<int> pool, int count,
                                            Rng& rng) {
  for (int i = 0; i < count; ++i) {
    const int j = i + static_cast<int>(rng.uniform_int(
                          static_cast<uint32_t>(pool.size() - i)));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  return pool;
}

std::vector<double> random_row(int k, Rng& rng) {
  std::vector<double> row(k);
  double total = 0.0;
  for (double& x : row) {
    x = rng.uniform_open();
    total += x;
  }
  for (double& x : row) x /= total;
  return row;
}

}  // namespace

HybridMixedNetwork generate(const GeneratorParams& params) {
  const int n = params.n1 + params.n2;
  if (params.n1 < 0 || params.n2 < 0 || n == 0)
    fail(ErrorCode::InfeasibleParams, "need at least one variable");
  if (params.n1 > 0 && params.k < 2)
    fail(ErrorCode::InfeasibleParams, "discrete cardinality must be >= 2");
  if (params.p < 0) fail(ErrorCode::InfeasibleParams, "parents must be >= 0");
  const long long pairs =
      static_cast<long long>(params.n1) * (params.n1 - 1) / 2;
  if (params.c1 < 0 || params.c1 > pairs)
    fail(ErrorCode::InfeasibleParams,
         "constraint count exceeds the available binary scopes");
  if (params.t < 0 || params.t > params.k * params.k)
    fail(ErrorCode::InfeasibleParams, "tightness exceeds K^2");
  if (params.c2 < 0 || params.c2 > n)
    fail(ErrorCode::InfeasibleParams, "more CPDs than variables");

  Rng rng(params.seed);

  // Ids: 0..n1-1 discrete, n1..n-1 continuous. Randomness in the structure
  // comes from the topological layout, a random permutation of all ids.
  std::vector<Variable> variables;
  for (int i = 0; i < params.n1; ++i)
    variables.push_back({i, "D" + std::to_string(i), VarKind::Discrete,
                         params.k});
  for (int i = 0; i < params.n2; ++i)
    variables.push_back({params.n1 + i, "G" + std::to_string(i),
                         VarKind::Continuous, 0});

  std::vector<int> layout(n);
  std::iota(layout.begin(), layout.end(), 0);
  layout = sample_without_replacement(layout, n, rng);
  std::vector<int> rank(n);
  for (int i = 0; i < n; ++i) rank[layout[i]] = i;

  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  const std::vector<int> children =
      sample_without_replacement(ids, params.c2, rng);
  std::vector<char> is_child(n, 0);
  for (int c : children) is_child[c] = 1;

  std::vector<Cpd> cpds(n);
  auto fill_gaussian = [&](LinearGaussianCPD& lg) {
    long long configs = 1;
    for (int p : lg.discrete_parents) configs *= params.k;
    for (long long c = 0; c < configs; ++c) {
      LinearGaussianCPD::Config cfg;
      cfg.intercept = rng.uniform_open();
      for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
        cfg.coefficients.push_back(2.0 * rng.uniform() - 1.0);
      cfg.variance = rng.uniform_open();
      lg.configs.push_back(std::move(cfg));
    }
  };

  for (int child : children) {
    // Candidate parents precede the child in the layout; discrete children
    // accept only discrete parents.
    std::vector<int> candidates;
    for (int v = 0; v < n; ++v) {
      if (rank[v] >= rank[child]) continue;
      if (child < params.n1 && v >= params.n1) continue;
      candidates.push_back(v);
    }
    const int take =
        std::min(params.p, static_cast<int>(candidates.size()));
    std::vector<int> chosen = sample_without_replacement(candidates, take, rng);
    std::sort(chosen.begin(), chosen.end());

    if (child < params.n1) {
      TabularCPD cpd;
      cpd.child = child;
      cpd.parents = chosen;
      long long rows = 1;
      for (std::size_t i = 0; i < chosen.size(); ++i) rows *= params.k;
      for (long long r = 0; r < rows; ++r) {
        const auto row = random_row(params.k, rng);
        cpd.table.insert(cpd.table.end(), row.begin(), row.end());
      }
      cpds[child] = std::move(cpd);
    } else {
      LinearGaussianCPD cpd;
      cpd.child = child;
      for (int p : chosen)
        (p < params.n1 ? cpd.discrete_parents : cpd.continuous_parents)
            .push_back(p);
      fill_gaussian(cpd);
      cpds[child] = std::move(cpd);
    }
  }

  // Every non-child variable owns a parentless prior.
  for (int v = 0; v < n; ++v) {
    if (is_child[v]) continue;
    if (v < params.n1) {
      TabularCPD cpd;
      cpd.child = v;
      cpd.table = random_row(params.k, rng);
      cpds[v] = std::move(cpd);
    } else {
      LinearGaussianCPD cpd;
      cpd.child = v;
      fill_gaussian(cpd);
      cpds[v] = std::move(cpd);
    }
  }

  // Model B: C1 distinct unordered pairs, exactly T distinct no-goods each.
  std::vector<ConstraintRelation> constraints;
  if (params.c1 > 0) {
    std::vector<int> pair_ids(pairs);
    std::iota(pair_ids.begin(), pair_ids.end(), 0);
    const auto chosen_pairs =
        sample_without_replacement(pair_ids, params.c1, rng);
    for (int pid : chosen_pairs) {
      // Decode pair index into (a, b), a < b.
      int a = 0;
      long long rest = pid;
      long long width = params.n1 - 1;
      while (rest >= width) {
        rest -= width;
        --width;
        ++a;
      }
      const int b = a + 1 + static_cast<int>(rest);

      ConstraintRelation rel;
      rel.scope = {a, b};
      std::vector<int> tuples(params.k * params.k);
      std::iota(tuples.begin(), tuples.end(), 0);
      const auto forbidden =
          sample_without_replacement(tuples, params.t, rng);
      std::vector<char> bad(params.k * params.k, 0);
      for (int t : forbidden) bad[t] = 1;
      for (int t = 0; t < params.k * params.k; ++t)
        if (!bad[t]) rel.allowed.push_back({t / params.k, t % params.k});
      constraints.push_back(std::move(rel));
    }
  }

  return build_network(std::move(variables), std::move(cpds),
                       std::move(constraints));
}

Evidence select_evidence(const HybridMixedNetwork& net, double fraction,
                         uint64_t seed) {
  if (fraction < 0.0 || fraction >= 1.0)
    fail(ErrorCode::InvalidArgument, "evidence fraction must be in [0,1)");
  Rng rng(seed);
  const int n = net.size();
  const int count = static_cast<int>(fraction * n);
  Evidence ev;
  if (count == 0) return ev;

  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  std::vector<int> chosen = sample_without_replacement(ids, count, rng);
  std::sort(chosen.begin(), chosen.end());

  std::vector<double> sample(n);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    for (int v : net.topological_order()) {
      if (const auto* t = std::get_if<TabularCPD>(&net.cpd(v))) {
        long long row = 0;
        for (int p : t->parents)
          row = row * net.cardinality(p) + static_cast<int>(sample[p]);
        const int card = net.cardinality(v);
        const double u = rng.uniform();
        double acc = 0.0;
        int value = card - 1;
        for (int k = 0; k < card; ++k) {
          acc += t->table[row * card + k];
          if (u < acc) {
            value = k;
            break;
          }
        }
        sample[v] = value;
      } else {
        const auto& lg = std::get<LinearGaussianCPD>(net.cpd(v));
        long long cfg = 0;
        for (int p : lg.discrete_parents)
          cfg = cfg * net.cardinality(p) + static_cast<int>(sample[p]);
        const auto& c = lg.configs[cfg];
        double mean = c.intercept;
        for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
          mean += c.coefficients[j] * sample[lg.continuous_parents[j]];
        sample[v] = mean + std::sqrt(c.variance) * rng.normal();
      }
    }
    bool consistent = true;
    for (std::size_t c = 0; c < net.constraints().size() && consistent; ++c) {
      const auto& rel = net.constraints()[c];
      std::vector<int> tuple(rel.scope.size());
      for (std::size_t i = 0; i < rel.scope.size(); ++i)
        tuple[i] = static_cast<int>(sample[rel.scope[i]]);
      consistent = net.constraint_allows(static_cast<int>(c), tuple);
    }
    if (consistent) {
      for (int v : chosen) ev.set(v, sample[v]);
      return ev;
    }
  }
  fail(ErrorCode::EvidenceGenerationFailed,
       "no constraint-consistent forward sample in 1000 attempts");
}

}  // namespace hmn
