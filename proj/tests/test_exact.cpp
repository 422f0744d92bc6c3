#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmn/exact.hpp"
#include "support/oracle.hpp"

using namespace hmn;
namespace ts = hmn::testsupport;

namespace {

// P(A) = (0.5, 0.5), P(B|A) rows (0.9, 0.1) / (0.2, 0.8), constraint A != B.
HybridMixedNetwork constrained_chain() {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                {1, "B", VarKind::Discrete, 2}};
  TabularCPD pa{0, {}, {0.5, 0.5}};
  TabularCPD pb{1, {0}, {0.9, 0.1, 0.2, 0.8}};
  return build_network(vars, {pa, pb},
                       {ConstraintRelation{{0, 1}, {{0, 1}, {1, 0}}}});
}

CalibratedTree calibrate_default(const HybridMixedNetwork& net,
                                 const Evidence& ev) {
  const auto order = constrained_elimination_order(primal_graph(net), net);
  return calibrate(net, build_join_tree(net, order), ev);
}

}  // namespace

TEST_CASE("single binary variable with uniform prior") {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2}};
  TabularCPD pa{0, {}, {0.5, 0.5}};
  const auto net = build_network(vars, {pa}, {});
  const auto cal = calibrate_default(net, {});
  CHECK(cal.log_evidence() == doctest::Approx(0.0).epsilon(1e-12));
  const auto p = query_discrete_marginal(cal, 0);
  CHECK(p[0] == doctest::Approx(0.5));
  CHECK(p[1] == doctest::Approx(0.5));
}

TEST_CASE("constrained chain: 4-term enumeration values") {
  // mass(B=1) = 0.5*0.1, mass(B=0) = 0.5*0.2  ->  P(B=1) = 1/3, P(B) = (2/3, 1/3)
  const auto net = constrained_chain();
  const auto cal = calibrate_default(net, {});
  const auto pb = query_discrete_marginal(cal, 1);
  CHECK(pb[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(pb[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(cal.log_evidence() == doctest::Approx(std::log(0.15)).epsilon(1e-12));
}

TEST_CASE("evidence conflicting with a constraint is inconsistent") {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                {1, "B", VarKind::Discrete, 2}};
  TabularCPD pa{0, {}, {1.0, 0.0}};
  TabularCPD pb{1, {}, {1.0, 0.0}};
  const auto net = build_network(vars, {pa, pb},
                                 {ConstraintRelation{{0, 1}, {{0, 1}, {1, 0}}}});
  // A and B are both forced to 0 by their priors, but 0,0 is forbidden.
  try {
    (void)calibrate_default(net, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InconsistentEvidence);
  }
}

TEST_CASE("evidence variables report a point mass") {
  const auto net = constrained_chain();
  Evidence ev;
  ev.set(0, 1);
  const auto cal = calibrate_default(net, ev);
  const auto pa = query_discrete_marginal(cal, 0);
  CHECK(pa[0] == 0.0);
  CHECK(pa[1] == 1.0);
  const auto pb = query_discrete_marginal(cal, 1);
  CHECK(pb[0] == doctest::Approx(1.0).epsilon(1e-12));  // forced by !=
}

TEST_CASE("every covering node gives the same marginal") {
  const auto net = ts::figure_network();
  const auto order = constrained_elimination_order(primal_graph(net), net);
  const auto tree = build_join_tree(net, order);
  const auto cal = calibrate(net, tree, {});
  for (int var : net.discrete_ids()) {
    std::vector<std::vector<double>> per_node;
    for (std::size_t v = 0; v < tree.nodes.size(); ++v) {
      if (!std::binary_search(tree.nodes[v].chi.begin(),
                              tree.nodes[v].chi.end(), var))
        continue;
      const int keep[1] = {var};
      auto m = project_onto(cal.belief(static_cast<int>(v)), keep);
      std::vector<double> probs(net.cardinality(var), 0.0);
      double total = 0.0;
      for (int k = 0; k < net.cardinality(var); ++k) {
        if (!m.zero_mass(k)) probs[k] = std::exp(m.g(k));
        total += probs[k];
      }
      for (double& p : probs) p /= total;
      per_node.push_back(std::move(probs));
    }
    for (std::size_t i = 1; i < per_node.size(); ++i)
      for (std::size_t k = 0; k < per_node[0].size(); ++k)
        CHECK(per_node[i][k] == doctest::Approx(per_node[0][k]).epsilon(1e-12));
  }
}

TEST_CASE("log evidence is identical at every node") {
  const auto net = ts::figure_network();
  Evidence ev;
  ev.set(3, 1);   // F = 1
  ev.set(5, 0.25);  // G observed
  const auto cal = calibrate_default(net, ev);
  for (std::size_t v = 0; v < cal.tree().nodes.size(); ++v) {
    const double mass = total_log_mass(cal.belief(static_cast<int>(v))) +
                        cal.belief_log_offset(static_cast<int>(v));
    CHECK(mass == doctest::Approx(cal.log_evidence()).epsilon(1e-10));
  }
}

TEST_CASE("continuous query: discrete-mixture mean and variance") {
  // A ~ (0.5, 0.5), G | A ~ N(A, 1) -> mean 0.5, variance 1.25
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                {1, "G", VarKind::Continuous, 0}};
  TabularCPD pa{0, {}, {0.5, 0.5}};
  LinearGaussianCPD pg;
  pg.child = 1;
  pg.discrete_parents = {0};
  pg.configs = {{0.0, {}, 1.0}, {1.0, {}, 1.0}};
  const auto net = build_network(vars, {pa, pg}, {});
  const auto cal = calibrate_default(net, {});
  const auto m = query_continuous_moments(cal, 1);
  CHECK(m.mean(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(m.cov(0, 0) == doctest::Approx(1.25).epsilon(1e-12));
}

TEST_CASE("continuous query: prior passthrough and observed degenerate") {
  std::vector<Variable> vars = {{0, "G", VarKind::Continuous, 0}};
  LinearGaussianCPD pg;
  pg.child = 0;
  pg.configs = {{0.3, {}, 0.7}};
  const auto net = build_network(vars, {pg}, {});
  {
    const auto cal = calibrate_default(net, {});
    const auto m = query_continuous_moments(cal, 0);
    CHECK(m.mean(0) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(m.cov(0, 0) == doctest::Approx(0.7).epsilon(1e-12));
  }
  {
    Evidence ev;
    ev.set(0, 0.1);
    const auto cal = calibrate_default(net, ev);
    const auto m = query_continuous_moments(cal, 0);
    CHECK(m.mean(0) == doctest::Approx(0.1));
    CHECK(m.cov(0, 0) == 0.0);
  }
}

TEST_CASE("joint_probability examples") {
  const auto net = constrained_chain();
  const auto order = constrained_elimination_order(primal_graph(net), net);
  const auto tree = build_join_tree(net, order);

  Evidence empty;
  SUBCASE("forbidden tuple gives -inf") {
    Evidence assignment;
    assignment.set(0, 0);
    assignment.set(1, 0);
    CHECK(joint_probability(net, tree, empty, assignment) ==
          -std::numeric_limits<double>::infinity());
  }
  SUBCASE("allowed tuple: log(0.5 * 0.1)") {
    Evidence assignment;
    assignment.set(0, 0);
    assignment.set(1, 1);
    CHECK(joint_probability(net, tree, empty, assignment) ==
          doctest::Approx(std::log(0.05)).epsilon(1e-12));
  }
  SUBCASE("constraint-free total mass is one") {
    const auto free_net = [] {
      std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2}};
      TabularCPD pa{0, {}, {0.4, 0.6}};
      return build_network(vars, {pa}, {});
    }();
    const auto ftree = build_join_tree(free_net, {0});
    CHECK(joint_probability(free_net, ftree, {}, {}) ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("discrete marginals always sum to one") {
  Rng rng(808);
  for (int trial = 0; trial < 10; ++trial) {
    const auto net = ts::random_small_net(rng);
    const auto ev = ts::random_consistent_evidence(net, rng, net.size() / 5);
    const auto cal = calibrate_default(net, ev);
    for (int v : net.discrete_ids()) {
      const auto p = query_discrete_marginal(cal, v);
      double total = 0.0;
      for (double x : p) total += x;
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("oracle equivalence on random hybrid instances") {
  Rng rng(161803);
  int done = 0;
  while (done < 25) {
    const auto net = ts::random_small_net(rng);
    const auto ev = ts::random_consistent_evidence(net, rng, net.size() / 4);
    const auto oracle = ts::enumerate_posterior(net, ev);
    const auto cal = calibrate_default(net, ev);
    CHECK(cal.log_evidence() ==
          doctest::Approx(oracle.log_evidence).epsilon(1e-9));
    for (const auto& [v, dist] : oracle.discrete) {
      const auto got = query_discrete_marginal(cal, v);
      for (std::size_t k = 0; k < dist.size(); ++k)
        CHECK(std::abs(got[k] - dist[k]) < 1e-9);
    }
    for (const auto& [v, mv] : oracle.continuous) {
      const auto got = query_continuous_moments(cal, v);
      CHECK(std::abs(got.mean(0) - mv.first) < 1e-6);
      CHECK(std::abs(got.cov(0, 0) - mv.second) < 1e-6);
    }
    ++done;
  }
}

TEST_CASE("conditioned remainder tree reproduces joint probabilities") {
  // Sampling-style use: condition two discrete variables of the figure
  // network and check P(x1, e) against the full-tree answer.
  const auto net = ts::figure_network();
  const std::vector<int> cutset = {0, 3};  // A, F
  const auto rtree = build_conditioned_join_tree(net, cutset);
  const auto order = constrained_elimination_order(primal_graph(net), net);
  const auto ftree = build_join_tree(net, order);
  for (int a = 0; a < 3; ++a)
    for (int f = 0; f < 3; ++f) {
      Evidence assignment;
      assignment.set(0, a);
      assignment.set(3, f);
      const double via_remainder = joint_probability(net, rtree, {}, assignment);
      const double via_full = joint_probability(net, ftree, {}, assignment);
      if (via_full == -std::numeric_limits<double>::infinity())
        CHECK(via_remainder == via_full);
      else
        CHECK(via_remainder == doctest::Approx(via_full).epsilon(1e-10));
    }
}
