#include "hmn/potential.hpp"

#include <algorithm>
#include <cmath>

namespace hmn {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

std::vector<int> sorted_union(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

std::vector<int> sorted_difference(const std::vector<int>& a,
                                   std::span<const int> b) {
  std::vector<int> bs(b.begin(), b.end());
  std::sort(bs.begin(), bs.end());
  std::vector<int> out;
  std::set_difference(a.begin(), a.end(), bs.begin(), bs.end(),
                      std::back_inserter(out));
  return out;
}

int position_of(const std::vector<int>& vars, int id) {
  auto it = std::lower_bound(vars.begin(), vars.end(), id);
  if (it == vars.end() || *it != id) return -1;
  return static_cast<int>(it - vars.begin());
}

Eigen::MatrixXd select_block(const Eigen::MatrixXd& m,
                             const std::vector<int>& rows,
                             const std::vector<int>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(i, j) = m(rows[i], cols[j]);
  return out;
}

Eigen::VectorXd select_vec(const Eigen::VectorXd& v,
                           const std::vector<int>& idx) {
  Eigen::VectorXd out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

// Cholesky of a symmetric positive definite matrix; throws SingularBlock on
// anything else (semi-definite, indefinite, non-finite).
struct Chol {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double log_det = 0.0;
};

Chol factorize_spd(const Eigen::MatrixXd& m) {
  Chol c;
  if (m.rows() == 0) return c;
  Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
  if (!sym.allFinite()) fail(ErrorCode::SingularBlock, "non-finite precision block");
  c.llt.compute(sym);
  if (c.llt.info() != Eigen::Success)
    fail(ErrorCode::SingularBlock, "precision block not positive definite");
  double ld = 0.0;
  const auto& L = c.llt.matrixLLT();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const double d = L(i, i);
    if (!(d > 0.0) || !std::isfinite(d))
      fail(ErrorCode::SingularBlock, "precision block not positive definite");
    ld += std::log(d);
  }
  c.log_det = 2.0 * ld;
  return c;
}

// log total mass of one live component: g + h.mu/2-term + Gaussian normalizer.
double component_log_mass(double g, const Eigen::VectorXd& h,
                          const Eigen::MatrixXd& K) {
  if (h.size() == 0) return g;
  Chol c = factorize_spd(K);
  const Eigen::VectorXd mu = c.llt.solve(h);
  return g + 0.5 * h.dot(mu) +
         0.5 * (static_cast<double>(h.size()) * kLog2Pi - c.log_det);
}

}  // namespace

CGPotential::CGPotential() : g_(1, 0.0) {}

CGPotential::CGPotential(std::vector<int> discrete_vars, std::vector<int> cards,
                         std::vector<int> continuous_vars)
    : dvars_(std::move(discrete_vars)),
      dcards_(std::move(cards)),
      cvars_(std::move(continuous_vars)) {
  // Keep scopes sorted by id; cards travel with their variable.
  std::vector<std::pair<int, int>> vc(dvars_.size());
  for (std::size_t i = 0; i < dvars_.size(); ++i)
    vc[i] = {dvars_[i], dcards_[i]};
  std::sort(vc.begin(), vc.end());
  for (std::size_t i = 0; i < vc.size(); ++i) {
    dvars_[i] = vc[i].first;
    dcards_[i] = vc[i].second;
  }
  std::sort(cvars_.begin(), cvars_.end());

  long long count = 1;
  for (int c : dcards_) count *= c;
  if (count > (1LL << 31))
    fail(ErrorCode::InvalidArgument, "potential table too large");
  g_.assign(static_cast<std::size_t>(count), 0.0);
  if (!cvars_.empty()) {
    const int nc = static_cast<int>(cvars_.size());
    h_.assign(g_.size(), Eigen::VectorXd::Zero(nc));
    K_.assign(g_.size(), Eigen::MatrixXd::Zero(nc, nc));
  }
}

void CGPotential::set_zero_mass(int idx) {
  g_[idx] = kNegativeInfinity;
  if (!cvars_.empty()) {
    h_[idx].setZero();
    K_[idx].setZero();
  }
}

int CGPotential::index_of(std::span<const int> cfg) const {
  int idx = 0;
  for (std::size_t i = 0; i < dvars_.size(); ++i)
    idx = idx * dcards_[i] + cfg[i];
  return idx;
}

void CGPotential::decode(int idx, std::span<int> cfg) const {
  for (int i = static_cast<int>(dvars_.size()) - 1; i >= 0; --i) {
    cfg[i] = idx % dcards_[i];
    idx /= dcards_[i];
  }
}

double CGPotential::log_at(std::span<const int> global) const {
  int idx = 0;
  for (std::size_t i = 0; i < dvars_.size(); ++i)
    idx = idx * dcards_[i] + global[dvars_[i]];
  return g_[idx];
}

double CGPotential::log_density(std::span<const int> cfg,
                                const Eigen::VectorXd& x) const {
  const int idx = index_of(cfg);
  if (zero_mass(idx)) return kNegativeInfinity;
  if (cvars_.empty()) return g_[idx];
  return g_[idx] + h_[idx].dot(x) - 0.5 * x.dot(K_[idx] * x);
}

// --- construction ------------------------------------------------------------

CGPotential from_tabular(const TabularCPD& cpd, const HybridMixedNetwork& net) {
  std::vector<int> vars = cpd.parents;
  vars.push_back(cpd.child);
  std::vector<int> cards;
  cards.reserve(vars.size());
  for (int v : vars) cards.push_back(net.cardinality(v));
  CGPotential out(vars, cards, {});

  const auto& dv = out.discrete_vars();
  std::vector<int> cfg(dv.size());
  const int child_card = net.cardinality(cpd.child);
  for (int idx = 0; idx < out.config_count(); ++idx) {
    out.decode(idx, cfg);
    long long row = 0;
    for (int p : cpd.parents)
      row = row * net.cardinality(p) + cfg[position_of(dv, p)];
    const double entry =
        cpd.table[row * child_card + cfg[position_of(dv, cpd.child)]];
    if (entry <= 0.0)
      out.set_zero_mass(idx);
    else
      out.g(idx) = std::log(entry);
  }
  return out;
}

CGPotential from_linear_gaussian(const LinearGaussianCPD& cpd,
                                 const HybridMixedNetwork& net) {
  std::vector<int> cvars = cpd.continuous_parents;
  cvars.push_back(cpd.child);
  std::vector<int> cards;
  for (int v : cpd.discrete_parents) cards.push_back(net.cardinality(v));
  CGPotential out(cpd.discrete_parents, cards, cvars);

  const auto& cv = out.continuous_vars();
  const int nc = static_cast<int>(cv.size());
  const int child_pos = position_of(cv, cpd.child);
  std::vector<int> parent_pos(cpd.continuous_parents.size());
  for (std::size_t j = 0; j < cpd.continuous_parents.size(); ++j)
    parent_pos[j] = position_of(cv, cpd.continuous_parents[j]);

  const auto& dv = out.discrete_vars();
  std::vector<int> cfg(dv.size());
  for (int idx = 0; idx < out.config_count(); ++idx) {
    out.decode(idx, cfg);
    long long ci = 0;
    for (int p : cpd.discrete_parents)
      ci = ci * net.cardinality(p) + cfg[position_of(dv, p)];
    const auto& c = cpd.configs[ci];
    const double inv_var = 1.0 / c.variance;

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nc, nc);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(nc);
    K(child_pos, child_pos) = inv_var;
    h[child_pos] = c.intercept * inv_var;
    for (std::size_t j = 0; j < parent_pos.size(); ++j) {
      const double bj = c.coefficients[j];
      K(child_pos, parent_pos[j]) -= bj * inv_var;
      K(parent_pos[j], child_pos) -= bj * inv_var;
      h[parent_pos[j]] -= c.intercept * bj * inv_var;
      for (std::size_t l = 0; l < parent_pos.size(); ++l)
        K(parent_pos[j], parent_pos[l]) += bj * c.coefficients[l] * inv_var;
    }
    out.g(idx) = -0.5 * c.intercept * c.intercept * inv_var -
                 0.5 * std::log(2.0 * 3.14159265358979323846 * c.variance);
    out.h(idx) = h;
    out.K(idx) = K;
  }
  return out;
}

CGPotential from_constraint(const ConstraintRelation& rel,
                            const HybridMixedNetwork& net) {
  std::vector<int> cards;
  for (int v : rel.scope) cards.push_back(net.cardinality(v));
  CGPotential out(rel.scope, cards, {});

  const auto& dv = out.discrete_vars();
  std::vector<int> scope_pos(rel.scope.size());
  for (std::size_t i = 0; i < rel.scope.size(); ++i)
    scope_pos[i] = position_of(dv, rel.scope[i]);

  // Mark allowed tuples; everything else is deleted (zero mass).
  std::vector<char> allowed(out.config_count(), 0);
  std::vector<int> cfg(dv.size());
  for (const auto& tuple : rel.allowed) {
    for (std::size_t i = 0; i < tuple.size(); ++i)
      cfg[scope_pos[i]] = tuple[i];
    allowed[out.index_of(cfg)] = 1;
  }
  for (int idx = 0; idx < out.config_count(); ++idx)
    if (!allowed[idx]) out.set_zero_mass(idx);
  return out;
}

CGPotential function_potential(const HybridMixedNetwork& net, FunctionId f) {
  const int n = net.size();
  if (f.is_cpd(n)) {
    if (const auto* t = std::get_if<TabularCPD>(&net.cpd(f.value)))
      return from_tabular(*t, net);
    return from_linear_gaussian(std::get<LinearGaussianCPD>(net.cpd(f.value)),
                                net);
  }
  return from_constraint(net.constraints()[f.constraint_index(n)], net);
}

CGPotential potential_from_moments(std::vector<int> discrete_vars,
                                   std::vector<int> cards,
                                   std::vector<int> continuous_vars,
                                   const std::vector<GaussianMoments>& moments) {
  CGPotential out(std::move(discrete_vars), std::move(cards),
                  std::move(continuous_vars));
  if (static_cast<int>(moments.size()) != out.config_count())
    fail(ErrorCode::InvalidArgument, "moment count mismatch");
  const int nc = out.continuous_dim();
  for (int idx = 0; idx < out.config_count(); ++idx) {
    const auto& m = moments[idx];
    if (m.weight <= 0.0) {
      out.set_zero_mass(idx);
      continue;
    }
    if (nc == 0) {
      out.g(idx) = std::log(m.weight);
      continue;
    }
    Chol c = factorize_spd(m.cov);
    Eigen::MatrixXd K = c.llt.solve(Eigen::MatrixXd::Identity(nc, nc));
    Eigen::VectorXd h = K * m.mean;
    out.K(idx) = K;
    out.h(idx) = h;
    out.g(idx) = std::log(m.weight) - 0.5 * h.dot(m.mean) -
                 0.5 * (nc * kLog2Pi + c.log_det);
  }
  return out;
}

// --- operators ---------------------------------------------------------------

CGPotential multiply(const CGPotential& a, const CGPotential& b) {
  const auto dvars = sorted_union(a.discrete_vars(), b.discrete_vars());
  std::vector<int> cards(dvars.size());
  std::vector<int> a_stride(dvars.size(), 0), b_stride(dvars.size(), 0);
  {
    // Strides of each source variable, mapped to the union scope.
    std::vector<int> as(a.discrete_vars().size()),
        bs(b.discrete_vars().size());
    int acc = 1;
    for (int i = static_cast<int>(as.size()) - 1; i >= 0; --i) {
      as[i] = acc;
      acc *= a.cards()[i];
    }
    acc = 1;
    for (int i = static_cast<int>(bs.size()) - 1; i >= 0; --i) {
      bs[i] = acc;
      acc *= b.cards()[i];
    }
    for (std::size_t i = 0; i < dvars.size(); ++i) {
      const int pa = position_of(a.discrete_vars(), dvars[i]);
      const int pb = position_of(b.discrete_vars(), dvars[i]);
      if (pa >= 0) {
        cards[i] = a.cards()[pa];
        a_stride[i] = as[pa];
      }
      if (pb >= 0) {
        if (pa >= 0 && b.cards()[pb] != cards[i])
          fail(ErrorCode::InvalidArgument, "cardinality mismatch in multiply");
        cards[i] = b.cards()[pb];
        b_stride[i] = bs[pb];
      }
    }
  }
  const auto cvars = sorted_union(a.continuous_vars(), b.continuous_vars());
  CGPotential out(dvars, cards, cvars);

  const int nc = out.continuous_dim();
  std::vector<int> a_cpos(a.continuous_vars().size()),
      b_cpos(b.continuous_vars().size());
  for (std::size_t i = 0; i < a_cpos.size(); ++i)
    a_cpos[i] = position_of(out.continuous_vars(), a.continuous_vars()[i]);
  for (std::size_t i = 0; i < b_cpos.size(); ++i)
    b_cpos[i] = position_of(out.continuous_vars(), b.continuous_vars()[i]);

  std::vector<int> cfg(dvars.size(), 0);
  int ia = 0, ib = 0;
  for (int idx = 0; idx < out.config_count(); ++idx) {
    const double g = a.g(ia) + b.g(ib);
    if (g == kNegativeInfinity || std::isnan(g)) {
      out.set_zero_mass(idx);
    } else {
      out.g(idx) = g;
      if (nc > 0) {
        auto& h = out.h(idx);
        auto& K = out.K(idx);
        if (!a.continuous_vars().empty()) {
          const auto& ha = a.h(ia);
          const auto& Ka = a.K(ia);
          for (std::size_t i = 0; i < a_cpos.size(); ++i) {
            h[a_cpos[i]] += ha[i];
            for (std::size_t j = 0; j < a_cpos.size(); ++j)
              K(a_cpos[i], a_cpos[j]) += Ka(i, j);
          }
        }
        if (!b.continuous_vars().empty()) {
          const auto& hb = b.h(ib);
          const auto& Kb = b.K(ib);
          for (std::size_t i = 0; i < b_cpos.size(); ++i) {
            h[b_cpos[i]] += hb[i];
            for (std::size_t j = 0; j < b_cpos.size(); ++j)
              K(b_cpos[i], b_cpos[j]) += Kb(i, j);
          }
        }
      }
    }
    // Odometer step, updating both source indices incrementally.
    for (int i = static_cast<int>(dvars.size()) - 1; i >= 0; --i) {
      ia += a_stride[i];
      ib += b_stride[i];
      if (++cfg[i] < cards[i]) break;
      ia -= a_stride[i] * cards[i];
      ib -= b_stride[i] * cards[i];
      cfg[i] = 0;
    }
  }
  return out;
}

CGPotential divide(const CGPotential& a, const CGPotential& b) {
  for (int v : b.discrete_vars())
    if (position_of(a.discrete_vars(), v) < 0)
      fail(ErrorCode::InvalidArgument, "divisor scope not contained");
  for (int v : b.continuous_vars())
    if (position_of(a.continuous_vars(), v) < 0)
      fail(ErrorCode::InvalidArgument, "divisor scope not contained");

  CGPotential out = a;
  const int nc = out.continuous_dim();
  std::vector<int> b_dpos(b.discrete_vars().size());
  for (std::size_t i = 0; i < b_dpos.size(); ++i)
    b_dpos[i] = position_of(a.discrete_vars(), b.discrete_vars()[i]);
  std::vector<int> b_cpos(b.continuous_vars().size());
  for (std::size_t i = 0; i < b_cpos.size(); ++i)
    b_cpos[i] = position_of(a.continuous_vars(), b.continuous_vars()[i]);

  std::vector<int> cfg(a.discrete_vars().size());
  std::vector<int> bcfg(b.discrete_vars().size());
  for (int idx = 0; idx < a.config_count(); ++idx) {
    if (out.zero_mass(idx)) continue;
    a.decode(idx, cfg);
    for (std::size_t i = 0; i < b_dpos.size(); ++i) bcfg[i] = cfg[b_dpos[i]];
    const int bi = b.index_of(bcfg);
    if (b.zero_mass(bi)) {
      out.set_zero_mass(idx);
      continue;
    }
    out.g(idx) -= b.g(bi);
    if (nc > 0 && !b.continuous_vars().empty()) {
      for (std::size_t i = 0; i < b_cpos.size(); ++i) {
        out.h(idx)[b_cpos[i]] -= b.h(bi)[i];
        for (std::size_t j = 0; j < b_cpos.size(); ++j)
          out.K(idx)(b_cpos[i], b_cpos[j]) -= b.K(bi)(i, j);
      }
    }
  }
  return out;
}

CGPotential marginalize_continuous(const CGPotential& p,
                                   const std::vector<int>& vars) {
  if (vars.empty()) return p;
  std::vector<int> out_pos, keep_pos;
  for (std::size_t i = 0; i < p.continuous_vars().size(); ++i) {
    if (std::find(vars.begin(), vars.end(), p.continuous_vars()[i]) !=
        vars.end())
      out_pos.push_back(static_cast<int>(i));
    else
      keep_pos.push_back(static_cast<int>(i));
  }
  if (out_pos.size() != vars.size())
    fail(ErrorCode::InvalidArgument,
         "marginalize_continuous: variable not in scope");

  std::vector<int> keep_vars;
  for (int i : keep_pos) keep_vars.push_back(p.continuous_vars()[i]);
  CGPotential out(p.discrete_vars(), p.cards(), keep_vars);

  const int no = static_cast<int>(out_pos.size());
  for (int idx = 0; idx < p.config_count(); ++idx) {
    if (p.zero_mass(idx)) {
      out.set_zero_mass(idx);
      continue;
    }
    const Eigen::MatrixXd Koo = select_block(p.K(idx), out_pos, out_pos);
    const Eigen::VectorXd ho = select_vec(p.h(idx), out_pos);
    Chol c = factorize_spd(Koo);
    const Eigen::VectorXd sol_h = c.llt.solve(ho);
    const double g = p.g(idx) + 0.5 * ho.dot(sol_h) +
                     0.5 * (no * kLog2Pi - c.log_det);
    out.g(idx) = g;
    if (!keep_pos.empty()) {
      const Eigen::MatrixXd Kko = select_block(p.K(idx), keep_pos, out_pos);
      const Eigen::MatrixXd Kok = select_block(p.K(idx), out_pos, keep_pos);
      out.h(idx) = select_vec(p.h(idx), keep_pos) - Kko * sol_h;
      out.K(idx) = select_block(p.K(idx), keep_pos, keep_pos) -
                   Kko * c.llt.solve(Kok);
    }
  }
  return out;
}

namespace {

// Collapse a mixture of live canonical components to moment-matched
// canonical form. Weights handled in shifted log space so tiny masses
// survive.
void collapse_group(const CGPotential& src, const std::vector<int>& members,
                    CGPotential& dst, int dst_idx) {
  std::vector<int> live;
  for (int j : members)
    if (!src.zero_mass(j)) live.push_back(j);
  if (live.empty()) {
    dst.set_zero_mass(dst_idx);
    return;
  }
  if (live.size() == 1) {
    dst.g(dst_idx) = src.g(live[0]);
    dst.h(dst_idx) = src.h(live[0]);
    dst.K(dst_idx) = src.K(live[0]);
    return;
  }
  const int nc = src.continuous_dim();
  std::vector<double> lw(live.size());
  std::vector<Eigen::VectorXd> mu(live.size());
  std::vector<Eigen::MatrixXd> cov(live.size());
  for (std::size_t t = 0; t < live.size(); ++t) {
    const int j = live[t];
    Chol c = factorize_spd(src.K(j));
    mu[t] = c.llt.solve(src.h(j));
    cov[t] = c.llt.solve(Eigen::MatrixXd::Identity(nc, nc));
    lw[t] = src.g(j) + 0.5 * src.h(j).dot(mu[t]) +
            0.5 * (nc * kLog2Pi - c.log_det);
  }
  const double m = *std::max_element(lw.begin(), lw.end());
  double total = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nc);
  for (std::size_t t = 0; t < live.size(); ++t) {
    lw[t] = std::exp(lw[t] - m);
    total += lw[t];
    mean += lw[t] * mu[t];
  }
  mean /= total;
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nc, nc);
  for (std::size_t t = 0; t < live.size(); ++t) {
    const Eigen::VectorXd d = mu[t] - mean;
    S += (lw[t] / total) * (cov[t] + d * d.transpose());
  }
  const double log_weight = m + std::log(total);

  Chol cs = factorize_spd(S);
  Eigen::MatrixXd K = cs.llt.solve(Eigen::MatrixXd::Identity(nc, nc));
  Eigen::VectorXd h = K * mean;
  dst.K(dst_idx) = K;
  dst.h(dst_idx) = h;
  dst.g(dst_idx) =
      log_weight - 0.5 * h.dot(mean) - 0.5 * (nc * kLog2Pi + cs.log_det);
}

}  // namespace

CGPotential marginalize_discrete(const CGPotential& p,
                                 const std::vector<int>& vars) {
  if (vars.empty()) return p;
  for (int v : vars)
    if (position_of(p.discrete_vars(), v) < 0)
      fail(ErrorCode::InvalidArgument,
           "marginalize_discrete: variable not in scope");

  const auto keep = sorted_difference(p.discrete_vars(), vars);
  std::vector<int> keep_cards(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    keep_cards[i] = p.cards()[position_of(p.discrete_vars(), keep[i])];
  CGPotential out(keep, keep_cards, p.continuous_vars());

  // Destination index of every source configuration.
  std::vector<int> keep_pos(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i)
    keep_pos[i] = position_of(p.discrete_vars(), keep[i]);
  std::vector<int> cfg(p.discrete_vars().size());
  std::vector<int> dst_of(p.config_count());
  for (int idx = 0; idx < p.config_count(); ++idx) {
    p.decode(idx, cfg);
    int d = 0;
    for (std::size_t i = 0; i < keep.size(); ++i)
      d = d * keep_cards[i] + cfg[keep_pos[i]];
    dst_of[idx] = d;
  }

  if (p.discrete_only()) {
    // Exact sum via shifted log-sum-exp per destination cell.
    std::vector<double> mx(out.config_count(), kNegativeInfinity);
    for (int idx = 0; idx < p.config_count(); ++idx)
      mx[dst_of[idx]] = std::max(mx[dst_of[idx]], p.g(idx));
    std::vector<double> acc(out.config_count(), 0.0);
    for (int idx = 0; idx < p.config_count(); ++idx)
      if (p.g(idx) != kNegativeInfinity)
        acc[dst_of[idx]] += std::exp(p.g(idx) - mx[dst_of[idx]]);
    for (int d = 0; d < out.config_count(); ++d) {
      if (mx[d] == kNegativeInfinity)
        out.set_zero_mass(d);
      else
        out.g(d) = mx[d] + std::log(acc[d]);
    }
    return out;
  }

  std::vector<std::vector<int>> groups(out.config_count());
  for (int idx = 0; idx < p.config_count(); ++idx)
    groups[dst_of[idx]].push_back(idx);
  for (int d = 0; d < out.config_count(); ++d)
    collapse_group(p, groups[d], out, d);
  return out;
}

CGPotential reduce_evidence(const CGPotential& p, const Evidence& ev) {
  // Discrete slice.
  std::vector<int> fixed_pos, fixed_val, keep_dpos;
  for (std::size_t i = 0; i < p.discrete_vars().size(); ++i) {
    const int v = p.discrete_vars()[i];
    if (ev.contains(v)) {
      fixed_pos.push_back(static_cast<int>(i));
      fixed_val.push_back(ev.discrete_at(v));
    } else {
      keep_dpos.push_back(static_cast<int>(i));
    }
  }
  // Continuous substitution positions.
  std::vector<int> obs_cpos, keep_cpos;
  Eigen::VectorXd obs_val(0);
  {
    std::vector<double> vals;
    for (std::size_t i = 0; i < p.continuous_vars().size(); ++i) {
      const int v = p.continuous_vars()[i];
      if (ev.contains(v)) {
        obs_cpos.push_back(static_cast<int>(i));
        vals.push_back(ev.at(v));
      } else {
        keep_cpos.push_back(static_cast<int>(i));
      }
    }
    obs_val = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
  }
  if (fixed_pos.empty() && obs_cpos.empty()) return p;

  std::vector<int> new_dvars, new_dcards;
  for (int i : keep_dpos) {
    new_dvars.push_back(p.discrete_vars()[i]);
    new_dcards.push_back(p.cards()[i]);
  }
  std::vector<int> new_cvars;
  for (int i : keep_cpos) new_cvars.push_back(p.continuous_vars()[i]);
  CGPotential out(new_dvars, new_dcards, new_cvars);

  std::vector<int> src_cfg(p.discrete_vars().size());
  std::vector<int> dst_cfg(new_dvars.size());
  for (int d = 0; d < out.config_count(); ++d) {
    out.decode(d, dst_cfg);
    for (std::size_t i = 0; i < keep_dpos.size(); ++i)
      src_cfg[keep_dpos[i]] = dst_cfg[i];
    for (std::size_t i = 0; i < fixed_pos.size(); ++i)
      src_cfg[fixed_pos[i]] = fixed_val[i];
    const int s = p.index_of(src_cfg);

    if (p.zero_mass(s)) {
      out.set_zero_mass(d);
      continue;
    }
    if (p.continuous_vars().empty()) {
      out.g(d) = p.g(s);
      continue;
    }
    const auto& h = p.h(s);
    const auto& K = p.K(s);
    double g = p.g(s);
    if (!obs_cpos.empty()) {
      const Eigen::VectorXd ho = select_vec(h, obs_cpos);
      const Eigen::MatrixXd Koo = select_block(K, obs_cpos, obs_cpos);
      g += ho.dot(obs_val) - 0.5 * obs_val.dot(Koo * obs_val);
    }
    out.g(d) = g;
    if (!keep_cpos.empty()) {
      Eigen::VectorXd hk = select_vec(h, keep_cpos);
      if (!obs_cpos.empty())
        hk -= select_block(K, keep_cpos, obs_cpos) * obs_val;
      out.h(d) = hk;
      out.K(d) = select_block(K, keep_cpos, keep_cpos);
    }
  }
  return out;
}

std::vector<GaussianMoments> to_moments(const CGPotential& p) {
  std::vector<GaussianMoments> out(p.config_count());
  const int nc = p.continuous_dim();
  for (int idx = 0; idx < p.config_count(); ++idx) {
    auto& m = out[idx];
    if (p.zero_mass(idx)) {
      m.weight = 0.0;
      m.mean = Eigen::VectorXd::Zero(nc);
      m.cov = Eigen::MatrixXd::Zero(nc, nc);
      continue;
    }
    if (nc == 0) {
      m.weight = std::exp(p.g(idx));
      continue;
    }
    Chol c = factorize_spd(p.K(idx));
    m.mean = c.llt.solve(p.h(idx));
    m.cov = c.llt.solve(Eigen::MatrixXd::Identity(nc, nc));
    m.weight = std::exp(p.g(idx) + 0.5 * p.h(idx).dot(m.mean) +
                        0.5 * (nc * kLog2Pi - c.log_det));
  }
  return out;
}

double total_log_mass(const CGPotential& p) {
  double mx = kNegativeInfinity;
  std::vector<double> lm(p.config_count(), kNegativeInfinity);
  for (int idx = 0; idx < p.config_count(); ++idx) {
    if (p.zero_mass(idx)) continue;
    lm[idx] = p.continuous_vars().empty()
                  ? p.g(idx)
                  : component_log_mass(p.g(idx), p.h(idx), p.K(idx));
    mx = std::max(mx, lm[idx]);
  }
  if (mx == kNegativeInfinity) return kNegativeInfinity;
  double acc = 0.0;
  for (double v : lm)
    if (v != kNegativeInfinity) acc += std::exp(v - mx);
  return mx + std::log(acc);
}

CGPotential project_onto(const CGPotential& p, std::span<const int> keep) {
  const auto cout_ = sorted_difference(p.continuous_vars(), keep);
  CGPotential q = marginalize_continuous(p, cout_);
  const auto dout = sorted_difference(q.discrete_vars(), keep);
  return marginalize_discrete(q, dout);
}

double normalize_max_g(CGPotential& p) {
  double mx = kNegativeInfinity;
  for (int idx = 0; idx < p.config_count(); ++idx)
    if (!p.zero_mass(idx)) mx = std::max(mx, p.g(idx));
  if (mx == kNegativeInfinity || mx == 0.0) return 0.0;
  for (int idx = 0; idx < p.config_count(); ++idx)
    if (!p.zero_mass(idx)) p.g(idx) -= mx;
  return mx;
}

}  // namespace hmn
