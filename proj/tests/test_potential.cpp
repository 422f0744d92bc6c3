#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hmn/potential.hpp"
#include "support/oracle.hpp"

using namespace hmn;
namespace ts = hmn::testsupport;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

HybridMixedNetwork two_binary_net() {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                {1, "B", VarKind::Discrete, 2}};
  TabularCPD pa{0, {}, {0.3, 0.7}};
  TabularCPD pb{1, {0}, {0.9, 0.1, 0.2, 0.8}};
  return build_network(vars, {pa, pb}, {});
}

// Random discrete-only potential over the given scope.
CGPotential random_discrete(Rng& rng, std::vector<int> vars,
                            std::vector<int> cards) {
  CGPotential p(std::move(vars), std::move(cards), {});
  for (int i = 0; i < p.config_count(); ++i)
    p.g(i) = std::log(rng.uniform_open());
  return p;
}

// Random proper CG potential: canonical form built from moments so every
// component is positive definite.
CGPotential random_cg(Rng& rng, std::vector<int> dvars, std::vector<int> cards,
                      std::vector<int> cvars) {
  const int nc = static_cast<int>(cvars.size());
  int count = 1;
  for (int c : cards) count *= c;
  std::vector<GaussianMoments> moments(count);
  for (auto& m : moments) {
    m.weight = rng.uniform_open();
    m.mean = Eigen::VectorXd::NullaryExpr(nc, [&](int) { return 2.0 * rng.uniform() - 1.0; });
    Eigen::MatrixXd a =
        Eigen::MatrixXd::NullaryExpr(nc, nc, [&](int, int) { return rng.uniform() - 0.5; });
    m.cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(nc, nc);
  }
  return potential_from_moments(std::move(dvars), std::move(cards),
                                std::move(cvars), moments);
}

bool close(const CGPotential& a, const CGPotential& b, double tol) {
  if (a.discrete_vars() != b.discrete_vars() ||
      a.continuous_vars() != b.continuous_vars())
    return false;
  for (int i = 0; i < a.config_count(); ++i) {
    if (a.zero_mass(i) != b.zero_mass(i)) return false;
    if (a.zero_mass(i)) continue;
    if (std::abs(a.g(i) - b.g(i)) > tol) return false;
    if (!a.continuous_vars().empty()) {
      if ((a.h(i) - b.h(i)).cwiseAbs().maxCoeff() > tol) return false;
      if ((a.K(i) - b.K(i)).cwiseAbs().maxCoeff() > tol) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("from_tabular encodes log entries") {
  const auto net = two_binary_net();
  const auto p = from_tabular(std::get<TabularCPD>(net.cpd(0)), net);
  CHECK(p.discrete_only());
  CHECK(p.g(0) == doctest::Approx(std::log(0.3)));
  CHECK(p.g(1) == doctest::Approx(std::log(0.7)));

  const auto pb = from_tabular(std::get<TabularCPD>(net.cpd(1)), net);
  CHECK(pb.config_count() == 4);
  // Entrywise against the table, accounting for the sorted (A, B) layout.
  const double expected[2][2] = {{0.9, 0.1}, {0.2, 0.8}};
  std::vector<int> cfg(2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      cfg[0] = a;
      cfg[1] = b;
      CHECK(pb.g(pb.index_of(cfg)) == doctest::Approx(std::log(expected[a][b])));
    }
}

TEST_CASE("from_tabular: zero entry becomes the zero-mass sentinel") {
  std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2}};
  TabularCPD pa{0, {}, {0.0, 1.0}};
  const auto net = build_network(vars, {pa}, {});
  const auto p = from_tabular(pa, net);
  CHECK(p.zero_mass(0));
  CHECK_FALSE(p.zero_mass(1));
}

TEST_CASE("from_linear_gaussian: standard normal canonical form") {
  std::vector<Variable> vars = {{0, "X", VarKind::Continuous, 0}};
  LinearGaussianCPD cpd;
  cpd.child = 0;
  cpd.configs = {{0.0, {}, 1.0}};
  const auto net = build_network(vars, {cpd}, {});
  const auto p = from_linear_gaussian(cpd, net);
  CHECK(p.K(0)(0, 0) == doctest::Approx(1.0));
  CHECK(p.h(0)(0) == doctest::Approx(0.0));
  CHECK(p.g(0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
  // Density at x = 0 is 1/sqrt(2 pi).
  CHECK(std::exp(p.g(0)) == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)));
}

TEST_CASE("from_linear_gaussian: zero coefficients decouple the parent") {
  std::vector<Variable> vars = {{0, "Z", VarKind::Continuous, 0},
                                {1, "X", VarKind::Continuous, 0}};
  LinearGaussianCPD pz;
  pz.child = 0;
  pz.configs = {{0.0, {}, 1.0}};
  LinearGaussianCPD px;
  px.child = 1;
  px.continuous_parents = {0};
  px.configs = {{0.3, {0.0}, 2.0}};
  const auto net = build_network(vars, {pz, px}, {});
  const auto p = from_linear_gaussian(px, net);
  CHECK(p.K(0)(0, 1) == doctest::Approx(0.0));
  CHECK(p.K(0)(1, 0) == doctest::Approx(0.0));
  CHECK(p.K(0)(0, 0) == doctest::Approx(0.0));  // parent block empty
  CHECK(p.K(0)(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("from_linear_gaussian: conditional density evaluates correctly") {
  // x | z ~ N(2z, 0.5); density at (x=2, z=1) must be N(2; 2, 0.5) = 1/sqrt(pi)
  std::vector<Variable> vars = {{0, "Z", VarKind::Continuous, 0},
                                {1, "X", VarKind::Continuous, 0}};
  LinearGaussianCPD pz;
  pz.child = 0;
  pz.configs = {{0.0, {}, 1.0}};
  LinearGaussianCPD px;
  px.child = 1;
  px.continuous_parents = {0};
  px.configs = {{0.0, {2.0}, 0.5}};
  const auto net = build_network(vars, {pz, px}, {});
  const auto p = from_linear_gaussian(px, net);
  Eigen::VectorXd v(2);
  v << 1.0, 2.0;  // continuous scope sorted: (Z, X)
  CHECK(std::exp(p.log_density(std::vector<int>{}, v)) ==
        doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-12));
  // Integrating the child back out leaves the all-ones function over z.
  const auto q = marginalize_continuous(p, {1});
  CHECK(q.g(0) == doctest::Approx(0.0));
  CHECK(q.h(0)(0) == doctest::Approx(0.0));
  CHECK(q.K(0)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("from_constraint: != relation") {
  const auto net = [] {
    std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 2},
                                  {1, "B", VarKind::Discrete, 2}};
    TabularCPD pa{0, {}, {0.5, 0.5}};
    TabularCPD pb{1, {}, {0.5, 0.5}};
    return build_network(vars, {pa, pb},
                         {ConstraintRelation{{0, 1}, {{0, 1}, {1, 0}}}});
  }();
  const auto p = from_constraint(net.constraints()[0], net);
  std::vector<int> cfg(2);
  cfg = {0, 0};
  CHECK(p.zero_mass(p.index_of(cfg)));
  cfg = {0, 1};
  CHECK(p.g(p.index_of(cfg)) == 0.0);
  cfg = {1, 0};
  CHECK(p.g(p.index_of(cfg)) == 0.0);
  cfg = {1, 1};
  CHECK(p.zero_mass(p.index_of(cfg)));
}

TEST_CASE("multiply: vacuous potential is the identity") {
  Rng rng(7);
  const auto p = random_cg(rng, {3, 5}, {2, 3}, {8, 9});
  const auto q = multiply(p, CGPotential());
  CHECK(close(p, q, 1e-14));
}

TEST_CASE("multiply: constraint deletes forbidden tuples") {
  const auto net = two_binary_net();
  auto pab = multiply(from_tabular(std::get<TabularCPD>(net.cpd(0)), net),
                      from_tabular(std::get<TabularCPD>(net.cpd(1)), net));
  ConstraintRelation rel{{0, 1}, {{0, 1}, {1, 0}}};
  const auto c = from_constraint(rel, net);
  const auto product = multiply(pab, c);
  std::vector<int> cfg = {0, 0};
  CHECK(product.zero_mass(product.index_of(cfg)));
  cfg = {1, 1};
  CHECK(product.zero_mass(product.index_of(cfg)));
  cfg = {0, 1};
  CHECK(product.g(product.index_of(cfg)) ==
        doctest::Approx(std::log(0.3 * 0.1)));
  cfg = {1, 0};
  CHECK(product.g(product.index_of(cfg)) ==
        doctest::Approx(std::log(0.7 * 0.2)));
}

TEST_CASE("multiply: product of two standard normals") {
  std::vector<GaussianMoments> m(1);
  m[0].weight = 1.0;
  m[0].mean = Eigen::VectorXd::Zero(1);
  m[0].cov = Eigen::MatrixXd::Identity(1, 1);
  const auto n01 = potential_from_moments({}, {}, {0}, m);
  const auto prod = multiply(n01, n01);
  CHECK(prod.K(0)(0, 0) == doctest::Approx(2.0));
  CHECK(prod.h(0)(0) == doctest::Approx(0.0));
  const auto moments = to_moments(prod);
  CHECK(moments[0].mean(0) == doctest::Approx(0.0));
  CHECK(moments[0].cov(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("multiply is commutative and associative on random potentials") {
  Rng rng(123);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = random_cg(rng, {0, 2}, {2, 3}, {10, 11});
    const auto b = random_cg(rng, {2, 4}, {3, 2}, {11, 12});
    const auto c = random_cg(rng, {4}, {2}, {10});
    CHECK(close(multiply(a, b), multiply(b, a), 1e-10));
    CHECK(close(multiply(multiply(a, b), c), multiply(a, multiply(b, c)),
                1e-10));
  }
}

TEST_CASE("marginalize_continuous: normalized Gaussian integrates to one") {
  std::vector<GaussianMoments> m(2);
  for (int i = 0; i < 2; ++i) {
    m[i].weight = 0.25 + 0.5 * i;
    m[i].mean = Eigen::VectorXd::Constant(1, 1.5 * i);
    m[i].cov = Eigen::MatrixXd::Constant(1, 1, 0.7);
  }
  const auto p = potential_from_moments({4}, {2}, {9}, m);
  const auto q = marginalize_continuous(p, {9});
  CHECK(q.discrete_only());
  CHECK(std::exp(q.g(0)) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::exp(q.g(1)) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("marginalize_continuous: bivariate Schur complement") {
  CGPotential p({}, {}, {0, 1});
  p.K(0) << 2, -1, -1, 2;
  p.h(0).setZero();
  p.g(0) = 0.0;
  const auto q = marginalize_continuous(p, {1});
  CHECK(q.K(0)(0, 0) == doctest::Approx(1.5));
  // Against the analytic bivariate marginal: precision 2 - 1/2 = 3/2.
}

TEST_CASE("marginalize_continuous: empty set is a no-op") {
  Rng rng(5);
  const auto p = random_cg(rng, {1}, {3}, {7, 8});
  CHECK(close(p, marginalize_continuous(p, {}), 0.0));
}

TEST_CASE("marginalize_continuous: improper block raises SingularBlock") {
  // A conditional's parent block is singular until the parent's own factor
  // arrives.
  std::vector<Variable> vars = {{0, "Z", VarKind::Continuous, 0},
                                {1, "X", VarKind::Continuous, 0}};
  LinearGaussianCPD pz;
  pz.child = 0;
  pz.configs = {{0.0, {}, 1.0}};
  LinearGaussianCPD px;
  px.child = 1;
  px.continuous_parents = {0};
  px.configs = {{0.0, {0.0}, 1.0}};  // beta = 0: z-block is exactly zero
  const auto net = build_network(vars, {pz, px}, {});
  const auto p = from_linear_gaussian(px, net);
  try {
    (void)marginalize_continuous(p, {0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularBlock);
  }
}

TEST_CASE("Fubini: sequential and one-shot continuous marginalization agree") {
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_cg(rng, {0}, {3}, {5, 6, 7});
    const auto one_shot = marginalize_continuous(p, {5, 7});
    const auto seq =
        marginalize_continuous(marginalize_continuous(p, {7}), {5});
    CHECK(close(one_shot, seq, 1e-10));
  }
}

TEST_CASE("marginalize_discrete: exact log-sum-exp for discrete-only") {
  Rng rng(42);
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_discrete(rng, {0, 1, 2}, {2, 3, 2});
    if (trial % 3 == 0) p.set_zero_mass(2);
    const auto q = marginalize_discrete(p, {1});
    // Brute-force sum per retained configuration.
    std::vector<int> cfg(3);
    for (int a = 0; a < 2; ++a)
      for (int c = 0; c < 2; ++c) {
        double sum = 0.0;
        for (int b = 0; b < 3; ++b) {
          cfg = {a, b, c};
          if (!p.zero_mass(p.index_of(cfg))) sum += std::exp(p.g(p.index_of(cfg)));
        }
        std::vector<int> rcfg = {a, c};
        const int idx = q.index_of(rcfg);
        if (sum == 0.0)
          CHECK(q.zero_mass(idx));
        else
          CHECK(q.g(idx) == doctest::Approx(std::log(sum)).epsilon(1e-12));
      }
  }
}

TEST_CASE("weak marginal: two-component mixture collapse") {
  // 0.5 N(0,1) + 0.5 N(2,1) -> weight 1, mean 1, variance 2
  std::vector<GaussianMoments> m(2);
  m[0] = {0.5, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1)};
  m[1] = {0.5, Eigen::VectorXd::Constant(1, 2.0),
          Eigen::MatrixXd::Identity(1, 1)};
  const auto p = potential_from_moments({3}, {2}, {6}, m);
  const auto q = marginalize_discrete(p, {3});
  const auto moments = to_moments(q);
  CHECK(moments[0].weight == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moments[0].mean(0) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(moments[0].cov(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("weak marginal: identical components just add weight") {
  std::vector<GaussianMoments> m(2);
  for (auto& x : m)
    x = {0.3, Eigen::VectorXd::Constant(1, 0.7),
         Eigen::MatrixXd::Constant(1, 1, 0.4)};
  const auto p = potential_from_moments({0}, {2}, {5}, m);
  const auto q = marginalize_discrete(p, {0});
  const auto moments = to_moments(q);
  CHECK(moments[0].weight == doctest::Approx(0.6).epsilon(1e-10));
  CHECK(moments[0].mean(0) == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(moments[0].cov(0, 0) == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("weak marginal: zero-mass component leaves the survivor unchanged") {
  std::vector<GaussianMoments> m(2);
  m[0] = {0.8, Eigen::VectorXd::Constant(1, -1.0),
          Eigen::MatrixXd::Constant(1, 1, 0.9)};
  m[1] = {0.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1)};
  const auto p = potential_from_moments({2}, {2}, {4}, m);
  const auto q = marginalize_discrete(p, {2});
  CHECK(q.g(0) == doctest::Approx(p.g(0)));
  CHECK(q.h(0)(0) == doctest::Approx(p.h(0)(0)));
  CHECK(q.K(0)(0, 0) == doctest::Approx(p.K(0)(0, 0)));
}

TEST_CASE("weak marginal preserves mixture weight, mean and covariance") {
  Rng rng(2024);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_cg(rng, {0, 1}, {2, 3}, {4, 5});
    const auto collapsed = marginalize_discrete(p, {0, 1});
    const auto cm = to_moments(collapsed).at(0);

    // Direct mixture-moment computation from the components.
    const auto parts = to_moments(p);
    double w = 0.0;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    for (const auto& m : parts) {
      w += m.weight;
      mean += m.weight * m.mean;
    }
    mean /= w;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    for (const auto& m : parts) {
      const Eigen::VectorXd d = m.mean - mean;
      cov += (m.weight / w) * (m.cov + d * d.transpose());
    }
    CHECK(cm.weight == doctest::Approx(w).epsilon(1e-10));
    CHECK((cm.mean - mean).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((cm.cov - cov).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("constraint multiplication never increases support") {
  Rng rng(77);
  const auto net = [] {
    std::vector<Variable> vars = {{0, "A", VarKind::Discrete, 3},
                                  {1, "B", VarKind::Discrete, 3}};
    TabularCPD pa{0, {}, {0.4, 0.3, 0.3}};
    TabularCPD pb{1, {}, {0.4, 0.3, 0.3}};
    return build_network(vars, {pa, pb}, {});
  }();
  for (int trial = 0; trial < 20; ++trial) {
    auto p = random_discrete(rng, {0, 1}, {3, 3});
    if (trial % 2) p.set_zero_mass(static_cast<int>(rng.uniform_int(9)));
    const auto c = from_constraint(ts::not_equal(net, 0, 1), net);
    const auto q = multiply(c, p);
    for (int i = 0; i < 9; ++i)
      if (p.zero_mass(i)) CHECK(q.zero_mass(i));
  }
}

TEST_CASE("reduce_evidence: discrete slice") {
  const auto net = two_binary_net();
  const auto pb = from_tabular(std::get<TabularCPD>(net.cpd(1)), net);
  Evidence ev;
  ev.set(0, 1);  // A = 1
  const auto sliced = reduce_evidence(pb, ev);
  CHECK(sliced.discrete_vars() == std::vector<int>{1});
  CHECK(sliced.g(0) == doctest::Approx(std::log(0.2)));
  CHECK(sliced.g(1) == doctest::Approx(std::log(0.8)));
}

TEST_CASE("reduce_evidence: continuous substitution on a standard normal") {
  std::vector<Variable> vars = {{0, "X", VarKind::Continuous, 0}};
  LinearGaussianCPD cpd;
  cpd.child = 0;
  cpd.configs = {{0.0, {}, 1.0}};
  const auto net = build_network(vars, {cpd}, {});
  const auto p = from_linear_gaussian(cpd, net);
  Evidence ev;
  ev.set(0, 0.0);
  const auto q = reduce_evidence(p, ev);
  CHECK(q.discrete_only());
  CHECK(q.g(0) == doctest::Approx(-0.5 * std::log(2.0 * M_PI)));
}

TEST_CASE("reduce_evidence: out-of-scope evidence is a no-op") {
  Rng rng(11);
  const auto p = random_cg(rng, {0}, {2}, {5});
  Evidence ev;
  ev.set(3, 1);
  CHECK(close(p, reduce_evidence(p, ev), 0.0));
}

TEST_CASE("to_moments: standard normal round trip") {
  CGPotential p({}, {}, {0});
  p.K(0) << 1.0;
  p.h(0) << 0.0;
  p.g(0) = -0.5 * std::log(2.0 * M_PI);
  const auto m = to_moments(p).at(0);
  CHECK(m.weight == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.mean(0) == doctest::Approx(0.0));
  CHECK(m.cov(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("to_moments: zero-mass component has weight zero") {
  CGPotential p({0}, {2}, {4});
  p.set_zero_mass(0);
  p.K(1) << 2.0;
  p.h(1) << 0.4;
  p.g(1) = -1.0;
  CHECK(to_moments(p)[0].weight == 0.0);
  CHECK(to_moments(p)[1].weight > 0.0);
}

TEST_CASE("to_moments and from_moments are inverse within 1e-10") {
  Rng rng(31337);
  for (int trial = 0; trial < 20; ++trial) {
    const auto p = random_cg(rng, {2}, {3}, {5, 6});
    const auto q = potential_from_moments(p.discrete_vars(), p.cards(),
                                          p.continuous_vars(), to_moments(p));
    CHECK(close(p, q, 1e-10));
  }
}

TEST_CASE("zero-mass sentinel absorbs through multiplication") {
  CGPotential p({0}, {2}, {});
  p.set_zero_mass(0);
  p.g(1) = -0.5;
  const auto q = multiply(p, p);
  CHECK(q.zero_mass(0));
  CHECK(q.g(1) == doctest::Approx(-1.0));
  CHECK(total_log_mass(p) == doctest::Approx(-0.5));
}
