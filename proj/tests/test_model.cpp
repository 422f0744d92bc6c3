#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmn/model.hpp"
#include "support/oracle.hpp"

using namespace hmn;
namespace ts = hmn::testsupport;

namespace {

std::vector<Variable> discrete_vars(int n, int card) {
  std::vector<Variable> out;
  for (int i = 0; i < n; ++i)
    out.push_back({i, "X" + std::to_string(i), VarKind::Discrete, card});
  return out;
}

}  // namespace

TEST_CASE("figure-style network builds and validates") {
  const auto net = ts::figure_network();
  CHECK(net.size() == 6);
  CHECK(net.constraints().size() == 4);
  CHECK(net.is_discrete(0));
  CHECK_FALSE(net.is_discrete(4));
}

TEST_CASE("continuous variable with a discrete child is rejected") {
  std::vector<Variable> vars = {{0, "G", VarKind::Continuous, 0},
                                {1, "A", VarKind::Discrete, 2}};
  LinearGaussianCPD pg;
  pg.child = 0;
  pg.configs = {{0.0, {}, 1.0}};
  TabularCPD pa{1, {0}, {0.5, 0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(
      build_network(vars, {pg, pa}, {}), Error);
  try {
    build_network(vars, {pg, pa}, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ContinuousHasDiscreteChild);
  }
}

TEST_CASE("unnormalized CPT row is rejected") {
  auto vars = discrete_vars(1, 2);
  TabularCPD bad{0, {}, {0.6, 0.6}};
  try {
    build_network(vars, {bad}, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnnormalizedCPT);
  }
}

TEST_CASE("empty relation is rejected at build") {
  auto vars = discrete_vars(2, 2);
  TabularCPD p0{0, {}, {0.5, 0.5}};
  TabularCPD p1{1, {}, {0.5, 0.5}};
  ConstraintRelation rel;
  rel.scope = {0, 1};
  try {
    build_network(vars, {p0, p1}, {rel});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyRelation);
  }
}

TEST_CASE("cycle detection") {
  auto vars = discrete_vars(2, 2);
  TabularCPD p0{0, {1}, {0.5, 0.5, 0.5, 0.5}};
  TabularCPD p1{1, {0}, {0.5, 0.5, 0.5, 0.5}};
  try {
    build_network(vars, {p0, p1}, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CyclicGraph);
  }
}

TEST_CASE("dangling parent reference") {
  auto vars = discrete_vars(1, 2);
  TabularCPD p0{0, {3}, {0.5, 0.5, 0.5, 0.5}};
  try {
    build_network(vars, {p0}, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DanglingVariableReference);
  }
}

TEST_CASE("primal graph: P(F|B,C) alone induces a triangle") {
  auto vars = discrete_vars(3, 2);  // B=0, C=1, F=2
  TabularCPD pb{0, {}, {0.5, 0.5}};
  TabularCPD pc{1, {}, {0.5, 0.5}};
  TabularCPD pf{2, {0, 1}, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5}};
  const auto net = build_network(vars, {pb, pc, pf}, {});
  const auto g = primal_graph(net);
  CHECK(g.edge_count() == 3);
  CHECK(g.has_edge(2, 0));
  CHECK(g.has_edge(2, 1));
  CHECK(g.has_edge(0, 1));
}

TEST_CASE("primal graph: parentless priors give an edgeless graph") {
  auto vars = discrete_vars(4, 2);
  std::vector<Cpd> cpds;
  for (int i = 0; i < 4; ++i) cpds.emplace_back(TabularCPD{i, {}, {0.5, 0.5}});
  const auto net = build_network(vars, cpds, {});
  CHECK(primal_graph(net).edge_count() == 0);
}

TEST_CASE("primal graph equals the union over all function scopes") {
  const auto net = ts::figure_network();
  const auto g = primal_graph(net);
  UndirectedGraph expected;
  expected.n = net.size();
  expected.adj.resize(net.size());
  for (int f = 0; f < net.function_count(); ++f) {
    const auto scope = net.function_scope(FunctionId{f});
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j)
        expected.add_edge(scope[i], scope[j]);
  }
  for (int v = 0; v < net.size(); ++v) CHECK(g.adj[v] == expected.adj[v]);
  // Symmetric and loop-free by construction.
  for (int v = 0; v < net.size(); ++v) {
    CHECK(g.adj[v].count(v) == 0);
    for (int u : g.adj[v]) CHECK(g.adj[u].count(v) == 1);
  }
}

TEST_CASE("joint density: constraint violation gives log -inf") {
  auto vars = discrete_vars(2, 2);
  TabularCPD p0{0, {}, {0.5, 0.5}};
  TabularCPD p1{1, {}, {0.5, 0.5}};
  const auto net = build_network(vars, {p0, p1},
                                 {ConstraintRelation{{0, 1}, {{0, 1}, {1, 0}}}});
  const std::vector<double> violating = {0.0, 0.0};
  CHECK(log_joint_density(net, violating) ==
        -std::numeric_limits<double>::infinity());
  const std::vector<double> fine = {0.0, 1.0};
  CHECK(log_joint_density(net, fine) == doctest::Approx(std::log(0.25)));
}

TEST_CASE("joint density: single discrete factor") {
  auto vars = discrete_vars(1, 2);
  TabularCPD p0{0, {}, {0.3, 0.7}};
  const auto net = build_network(vars, {p0}, {});
  const std::vector<double> a0 = {0.0};
  CHECK(std::exp(log_joint_density(net, a0)) == doctest::Approx(0.3));
}

TEST_CASE("joint density: discrete prior times Gaussian density") {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                {1, "G", VarKind::Continuous, 0}};
  TabularCPD pa{0, {}, {0.5, 0.5}};
  LinearGaussianCPD pg;
  pg.child = 1;
  pg.discrete_parents = {0};
  pg.configs = {{0.0, {}, 1.0}, {1.0, {}, 1.0}};
  const auto net = build_network(vars, {pa, pg}, {});
  const std::vector<double> assignment = {1.0, 1.0};
  // 0.5 * N(1; 1, 1) = 0.5 / sqrt(2 pi)
  CHECK(std::exp(log_joint_density(net, assignment)) ==
        doctest::Approx(0.5 / std::sqrt(2.0 * M_PI)).epsilon(1e-12));
}

TEST_CASE("joint density: incomplete assignment is an error") {
  const auto net = ts::figure_network();
  std::vector<double> partial(5, 0.0);
  CHECK_THROWS_AS((void)log_joint_density(net, partial), Error);
}

TEST_CASE("all-discrete constraint-free nets sum to one over assignments") {
  Rng rng(20240501);
  for (int trial = 0; trial < 5; ++trial) {
    GeneratorParams params;
    params.n1 = 8 + static_cast<int>(rng.uniform_int(5));  // up to 12
    params.n2 = 0;
    params.k = 2;
    params.c1 = 0;
    params.c2 = static_cast<int>(rng.uniform_int(params.n1));
    params.p = 2;
    params.t = 0;
    params.seed = rng.next_u64();
    const auto net = generate(params);

    double total = 0.0;
    std::vector<double> assignment(params.n1, 0.0);
    const long long count = 1LL << params.n1;
    for (long long c = 0; c < count; ++c) {
      for (int i = 0; i < params.n1; ++i)
        assignment[i] = static_cast<double>((c >> i) & 1);
      total += std::exp(log_joint_density(net, assignment));
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}
