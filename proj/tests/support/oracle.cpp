#include "oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace hmn::testsupport {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454836;

struct ContinuousJoint {
  std::vector<int> vars;  // continuous ids, in composition order
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  int pos(int id) const {
    return static_cast<int>(std::find(vars.begin(), vars.end(), id) -
                            vars.begin());
  }
};

// Moment-form composition of the continuous subnetwork for one discrete
// configuration: child = intercept + coeffs . parents + noise.
ContinuousJoint compose_continuous(const HybridMixedNetwork& net,
                                   const std::vector<int>& disc_values) {
  ContinuousJoint joint;
  for (int v : net.topological_order())
    if (!net.is_discrete(v)) joint.vars.push_back(v);
  const int nc = static_cast<int>(joint.vars.size());
  joint.mean = Eigen::VectorXd::Zero(nc);
  joint.cov = Eigen::MatrixXd::Zero(nc, nc);

  for (int t = 0; t < nc; ++t) {
    const int v = joint.vars[t];
    const auto& lg = std::get<LinearGaussianCPD>(net.cpd(v));
    long long cfg = 0;
    for (int p : lg.discrete_parents)
      cfg = cfg * net.cardinality(p) + disc_values[p];
    const auto& c = lg.configs[cfg];

    double mean = c.intercept;
    for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
      mean += c.coefficients[j] * joint.mean[joint.pos(lg.continuous_parents[j])];
    joint.mean[t] = mean;

    // Cov(v, u) for u already composed, then Var(v).
    for (int u = 0; u < t; ++u) {
      double cov = 0.0;
      for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
        cov += c.coefficients[j] *
               joint.cov(joint.pos(lg.continuous_parents[j]), u);
      joint.cov(t, u) = joint.cov(u, t) = cov;
    }
    double var = c.variance;
    for (std::size_t j = 0; j < lg.continuous_parents.size(); ++j)
      for (std::size_t l = 0; l < lg.continuous_parents.size(); ++l)
        var += c.coefficients[j] * c.coefficients[l] *
               joint.cov(joint.pos(lg.continuous_parents[j]),
                         joint.pos(lg.continuous_parents[l]));
    joint.cov(t, t) = var;
  }
  return joint;
}

}  // namespace

OracleResult enumerate_posterior(const HybridMixedNetwork& net,
                                 const Evidence& evidence) {
  const int n = net.size();
  std::vector<int> free_disc;
  for (int v = 0; v < n; ++v)
    if (net.is_discrete(v) && !evidence.contains(v)) free_disc.push_back(v);
  std::vector<int> obs_cont, free_cont;
  for (int v = 0; v < n; ++v)
    if (!net.is_discrete(v))
      (evidence.contains(v) ? obs_cont : free_cont).push_back(v);

  long long n_configs = 1;
  for (int v : free_disc) n_configs *= net.cardinality(v);

  struct PerConfig {
    double log_w;
    std::map<int, std::pair<double, double>> cond;  // free continuous
  };
  std::vector<PerConfig> table;
  std::vector<double> log_ws;
  std::vector<std::vector<int>> configs;

  std::vector<int> disc_values(n, 0);
  for (int v = 0; v < n; ++v)
    if (net.is_discrete(v) && evidence.contains(v))
      disc_values[v] = evidence.discrete_at(v);

  std::vector<int> cfg(free_disc.size(), 0);
  for (long long c = 0; c < n_configs; ++c) {
    for (std::size_t i = 0; i < free_disc.size(); ++i)
      disc_values[free_disc[i]] = cfg[i];

    double log_w = 0.0;
    // CPT product over discrete variables.
    for (int v = 0; v < n; ++v) {
      if (!net.is_discrete(v)) continue;
      const auto& t = std::get<TabularCPD>(net.cpd(v));
      long long row = 0;
      for (int p : t.parents) row = row * net.cardinality(p) + disc_values[p];
      const double entry = t.table[row * net.cardinality(v) + disc_values[v]];
      if (entry <= 0.0) {
        log_w = kNegInf;
        break;
      }
      log_w += std::log(entry);
    }
    // Constraint indicators.
    for (std::size_t rc = 0; rc < net.constraints().size() &&
                             log_w != kNegInf;
         ++rc) {
      const auto& rel = net.constraints()[rc];
      std::vector<int> tuple(rel.scope.size());
      for (std::size_t i = 0; i < rel.scope.size(); ++i)
        tuple[i] = disc_values[rel.scope[i]];
      if (!net.constraint_allows(static_cast<int>(rc), tuple)) log_w = kNegInf;
    }

    PerConfig pc;
    if (log_w != kNegInf && (!obs_cont.empty() || !free_cont.empty())) {
      const ContinuousJoint joint = compose_continuous(net, disc_values);
      if (!obs_cont.empty()) {
        const int no = static_cast<int>(obs_cont.size());
        Eigen::VectorXd x(no), mu(no);
        Eigen::MatrixXd S(no, no);
        for (int i = 0; i < no; ++i) {
          x[i] = evidence.at(obs_cont[i]);
          mu[i] = joint.mean[joint.pos(obs_cont[i])];
          for (int j = 0; j < no; ++j)
            S(i, j) = joint.cov(joint.pos(obs_cont[i]), joint.pos(obs_cont[j]));
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(S);
        const Eigen::VectorXd d = x - mu;
        const Eigen::VectorXd sol = llt.solve(d);
        double log_det = 0.0;
        for (int i = 0; i < no; ++i)
          log_det += 2.0 * std::log(llt.matrixLLT()(i, i));
        log_w += -0.5 * d.dot(sol) - 0.5 * (no * kLog2Pi + log_det);

        for (int u : free_cont) {
          Eigen::VectorXd cross(no);
          for (int i = 0; i < no; ++i)
            cross[i] = joint.cov(joint.pos(u), joint.pos(obs_cont[i]));
          const double mean = joint.mean[joint.pos(u)] + cross.dot(sol);
          const double var =
              joint.cov(joint.pos(u), joint.pos(u)) - cross.dot(llt.solve(cross));
          pc.cond[u] = {mean, var};
        }
      } else {
        for (int u : free_cont)
          pc.cond[u] = {joint.mean[joint.pos(u)],
                        joint.cov(joint.pos(u), joint.pos(u))};
      }
    }
    pc.log_w = log_w;
    table.push_back(std::move(pc));
    log_ws.push_back(log_w);
    configs.push_back(cfg);

    for (int i = static_cast<int>(cfg.size()) - 1; i >= 0; --i) {
      if (++cfg[i] < net.cardinality(free_disc[i])) break;
      cfg[i] = 0;
    }
  }

  OracleResult out;
  const double mx = *std::max_element(log_ws.begin(), log_ws.end());
  if (mx == kNegInf) {
    out.log_evidence = kNegInf;
    return out;
  }
  double total = 0.0;
  for (double lw : log_ws)
    if (lw != kNegInf) total += std::exp(lw - mx);
  out.log_evidence = mx + std::log(total);

  for (std::size_t i = 0; i < free_disc.size(); ++i)
    out.discrete[free_disc[i]] =
        std::vector<double>(net.cardinality(free_disc[i]), 0.0);
  for (std::size_t t = 0; t < table.size(); ++t) {
    if (log_ws[t] == kNegInf) continue;
    const double w = std::exp(log_ws[t] - mx) / total;
    for (std::size_t i = 0; i < free_disc.size(); ++i)
      out.discrete[free_disc[i]][configs[t][i]] += w;
  }
  for (int u : free_cont) {
    double mean = 0.0, second = 0.0;
    for (std::size_t t = 0; t < table.size(); ++t) {
      if (log_ws[t] == kNegInf) continue;
      const double w = std::exp(log_ws[t] - mx) / total;
      const auto& mv = table[t].cond.at(u);
      mean += w * mv.first;
      second += w * (mv.second + mv.first * mv.first);
    }
    out.continuous[u] = {mean, second - mean * mean};
  }
  return out;
}

HybridMixedNetwork random_small_net(Rng& rng, const SmallNetSpec& spec) {
  GeneratorParams params;
  params.n1 = 2 + static_cast<int>(rng.uniform_int(spec.max_discrete - 1));
  params.n2 = static_cast<int>(rng.uniform_int(spec.max_continuous + 1));
  params.k = 2 + static_cast<int>(rng.uniform_int(spec.max_card - 1));
  const int pairs = params.n1 * (params.n1 - 1) / 2;
  params.c1 = static_cast<int>(
      rng.uniform_int(std::min(pairs, spec.max_constraints) + 1));
  params.c2 = static_cast<int>(
      rng.uniform_int(params.n1 + params.n2 + 1));
  params.p = 1 + static_cast<int>(rng.uniform_int(3));
  // Keep at least one allowed tuple per relation and usually a consistent
  // joint instance.
  params.t = static_cast<int>(rng.uniform_int(params.k));
  params.seed = rng.next_u64();
  return generate(params);
}

Evidence random_consistent_evidence(const HybridMixedNetwork& net, Rng& rng,
                                    int count) {
  const double fraction =
      count == 0 ? 0.0
                 : std::min(0.99, static_cast<double>(count) / net.size());
  return select_evidence(net, fraction, rng.next_u64());
}

ConstraintRelation not_equal(const HybridMixedNetwork& net, int a, int b) {
  ConstraintRelation rel;
  rel.scope = {a, b};
  for (int i = 0; i < net.cardinality(a); ++i)
    for (int j = 0; j < net.cardinality(b); ++j)
      if (i != j) rel.allowed.push_back({i, j});
  return rel;
}

HybridMixedNetwork figure_network() {
  std::vector<Variable> vars = {
      {0, "A", VarKind::Discrete, 3}, {1, "B", VarKind::Discrete, 3},
      {2, "C", VarKind::Discrete, 3}, {3, "F", VarKind::Discrete, 3},
      {4, "D", VarKind::Continuous, 0}, {5, "G", VarKind::Continuous, 0}};

  TabularCPD pa{0, {}, {0.4, 0.35, 0.25}};
  TabularCPD pb{1, {0}, {0.2, 0.5, 0.3,  0.6, 0.1, 0.3,  0.25, 0.25, 0.5}};
  TabularCPD pc{2, {0}, {0.3, 0.3, 0.4,  0.2, 0.7, 0.1,  0.5, 0.2, 0.3}};
  std::vector<double> pf_table;
  for (int b = 0; b < 3; ++b)
    for (int c = 0; c < 3; ++c) {
      const double base[3] = {1.0 + b, 2.0 + c, 1.5};
      const double total = base[0] + base[1] + base[2];
      for (int f = 0; f < 3; ++f) pf_table.push_back(base[f] / total);
    }
  TabularCPD pf{3, {1, 2}, pf_table};

  LinearGaussianCPD pd;
  pd.child = 4;
  pd.discrete_parents = {0};
  pd.configs = {{-1.0, {}, 0.5}, {0.0, {}, 1.0}, {1.5, {}, 0.75}};
  LinearGaussianCPD pg;
  pg.child = 5;
  pg.continuous_parents = {4};
  pg.configs = {{0.5, {0.8}, 0.3}};

  std::vector<Cpd> cpds = {pa, pb, pc, pf, pd, pg};

  std::vector<ConstraintRelation> constraints;
  // Scopes (A,B), (A,C), (B,C), (C,F), all "not equal".
  const int scopes[4][2] = {{0, 1}, {0, 2}, {1, 2}, {2, 3}};
  for (const auto& s : scopes) {
    ConstraintRelation rel;
    rel.scope = {s[0], s[1]};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) rel.allowed.push_back({i, j});
    constraints.push_back(std::move(rel));
  }
  return build_network(std::move(vars), std::move(cpds),
                       std::move(constraints));
}

}  // namespace hmn::testsupport
