#include "hmn/sampler.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <variant>

namespace hmn {

namespace {

// Weighted accumulation with a running log-scale shift, so weights spanning
// hundreds of orders of magnitude reduce without overflow. Accumulation is
// in sample order, which keeps results deterministic.
class StreamingEstimator {
 public:
  StreamingEstimator(const HybridMixedNetwork& net,
                     const std::vector<int>& cutset,
                     const std::vector<int>& rem_discrete,
                     const std::vector<int>& rem_continuous)
      : net_(&net), cutset_(cutset) {
    for (int v : cutset)
      cutset_acc_[v].assign(net.cardinality(v), 0.0);
    for (int v : rem_discrete)
      disc_acc_[v].assign(net.cardinality(v), 0.0);
    for (int v : rem_continuous) cont_acc_[v] = {0.0, 0.0};
  }

  void add(const SampleRecord& rec) {
    const double lw = rec.log_weight;
    if (lw == kNegativeInfinity) return;
    if (lw > log_shift_) {
      const double factor =
          log_shift_ == kNegativeInfinity ? 0.0 : std::exp(log_shift_ - lw);
      rescale(factor);
      log_shift_ = lw;
    }
    const double w = std::exp(lw - log_shift_);
    total_ += w;
    for (std::size_t i = 0; i < cutset_.size(); ++i)
      cutset_acc_[cutset_[i]][rec.assignment[i]] += w;
    for (const auto& [v, belief] : rec.discrete_beliefs) {
      auto& acc = disc_acc_[v];
      for (std::size_t k = 0; k < belief.size(); ++k) acc[k] += w * belief[k];
    }
    for (const auto& [v, mv] : rec.continuous_moments) {
      auto& acc = cont_acc_[v];
      acc.first += w * mv.first;
      acc.second += w * (mv.second + mv.first * mv.first);
    }
  }

  bool empty() const { return total_ == 0.0; }

  MarginalEstimates finalize(const Evidence& evidence) const {
    if (empty())
      fail(ErrorCode::AllSamplesRejected, "every drawn sample was rejected");
    MarginalEstimates out;
    for (const auto& [v, acc] : cutset_acc_) {
      std::vector<double> p(acc);
      for (double& x : p) x /= total_;
      out.discrete[v] = std::move(p);
    }
    for (const auto& [v, acc] : disc_acc_) {
      std::vector<double> p(acc);
      for (double& x : p) x /= total_;
      out.discrete[v] = std::move(p);
    }
    for (const auto& [v, acc] : cont_acc_) {
      const double mean = acc.first / total_;
      const double var = std::max(0.0, acc.second / total_ - mean * mean);
      out.continuous[v] = {mean, var};
    }
    // Observed variables report their point values.
    for (const auto& [v, value] : evidence.values) {
      if (net_->is_discrete(v)) {
        std::vector<double> p(net_->cardinality(v), 0.0);
        p[static_cast<int>(value)] = 1.0;
        out.discrete[v] = std::move(p);
      } else {
        out.continuous[v] = {value, 0.0};
      }
    }
    return out;
  }

 private:
  void rescale(double factor) {
    total_ *= factor;
    for (auto& [v, acc] : cutset_acc_)
      for (double& x : acc) x *= factor;
    for (auto& [v, acc] : disc_acc_)
      for (double& x : acc) x *= factor;
    for (auto& [v, acc] : cont_acc_) {
      acc.first *= factor;
      acc.second *= factor;
    }
  }

  const HybridMixedNetwork* net_;
  std::vector<int> cutset_;
  std::map<int, std::vector<double>> cutset_acc_;
  std::map<int, std::vector<double>> disc_acc_;
  std::map<int, std::pair<double, double>> cont_acc_;
  double log_shift_ = kNegativeInfinity;
  double total_ = 0.0;
};

SampleRecord weigh_with_engine(const Calibrator& engine,
                               const HybridMixedNetwork& net,
                               const Evidence& evidence,
                               const std::vector<int>& cutset,
                               const std::vector<int>& values, double log_q,
                               const std::vector<int>& rem_discrete,
                               const std::vector<int>& rem_continuous) {
  SampleRecord rec;
  rec.assignment = values;
  rec.log_q = log_q;

  Evidence combined = evidence;
  for (std::size_t i = 0; i < cutset.size(); ++i)
    combined.set(cutset[i], values[i]);
  const CalibratedTree cal = engine.run(combined);
  rec.log_pjoint = cal.log_evidence();
  if (rec.log_pjoint == kNegativeInfinity) {
    rec.rejected = true;
    return rec;
  }
  rec.rejected = false;
  rec.log_weight = rec.log_pjoint - rec.log_q;
  for (int v : rem_discrete)
    rec.discrete_beliefs.emplace_back(v, query_discrete_marginal(cal, v));
  for (int v : rem_continuous) {
    const GaussianMoments m = query_continuous_moments(cal, v);
    rec.continuous_moments.emplace_back(v, std::make_pair(m.mean[0], m.cov(0, 0)));
  }
  return rec;
}

// Shared tail of both samplers: draw, weigh, accumulate, normalize. The
// time budget is charged from `start`, so proposal setup counts against it.
SamplingResult run_sampling_loop(
    const HybridMixedNetwork& net, const Evidence& evidence,
    const WCutset& cut, const std::function<DrawResult(Rng&)>& draw,
    long long n_samples, uint64_t seed, const SamplingOptions& options,
    const std::vector<int>& draw_order,
    std::chrono::steady_clock::time_point start) {
  const Calibrator engine(net, cut.remainder_tree);

  std::vector<int> rem_discrete, rem_continuous;
  for (int v : cut.remainder) {
    if (evidence.contains(v)) continue;
    (net.is_discrete(v) ? rem_discrete : rem_continuous).push_back(v);
  }

  // Map from draw order position to sorted-cutset position.
  std::vector<int> sorted_pos(draw_order.size());
  for (std::size_t i = 0; i < draw_order.size(); ++i)
    sorted_pos[i] = static_cast<int>(
        std::lower_bound(cut.cutset.begin(), cut.cutset.end(), draw_order[i]) -
        cut.cutset.begin());

  SamplingResult result;
  auto& set = result.samples;
  set.cutset = cut.cutset;
  StreamingEstimator estimator(net, cut.cutset, rem_discrete, rem_continuous);

  const bool degenerate = cut.cutset.empty();
  auto budget_spent = [&]() {
    if (!options.time_budget_seconds) return false;
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - start;
    return elapsed.count() >= *options.time_budget_seconds;
  };

  long long n = 0;
  while (true) {
    if (degenerate && n >= 1) break;
    if (!degenerate) {
      if (options.time_budget_seconds) {
        if (n > 0 && n % options.clock_check_interval == 0 && budget_spent())
          break;
      } else if (n >= n_samples) {
        break;
      }
    }
    Rng rng = Rng::stream(seed, static_cast<uint64_t>(n));
    const DrawResult d = draw(rng);

    SampleRecord rec;
    if (d.dead_end) {
      rec.rejected = true;
      rec.log_q = d.log_q;
      rec.assignment.assign(cut.cutset.size(), -1);
      for (std::size_t i = 0; i < draw_order.size(); ++i)
        if (d.values[i] >= 0) rec.assignment[sorted_pos[i]] = d.values[i];
    } else {
      std::vector<int> sorted_values(cut.cutset.size(), -1);
      for (std::size_t i = 0; i < draw_order.size(); ++i)
        sorted_values[sorted_pos[i]] = d.values[i];
      rec = weigh_with_engine(engine, net, evidence, cut.cutset, sorted_values,
                              d.log_q, rem_discrete, rem_continuous);
    }
    if (rec.rejected)
      ++set.rejection_count;
    else
      estimator.add(rec);
    if (options.keep_records) set.records.push_back(std::move(rec));
    ++n;
  }
  set.total_drawn = n;

  if (options.keep_records) {
    // Normalized weights over the accepted records.
    double mx = kNegativeInfinity;
    for (const auto& r : set.records)
      if (!r.rejected) mx = std::max(mx, r.log_weight);
    set.normalized_weights.assign(set.records.size(), 0.0);
    if (mx != kNegativeInfinity) {
      double total = 0.0;
      for (const auto& r : set.records)
        if (!r.rejected) total += std::exp(r.log_weight - mx);
      for (std::size_t j = 0; j < set.records.size(); ++j)
        if (!set.records[j].rejected)
          set.normalized_weights[j] =
              std::exp(set.records[j].log_weight - mx) / total;
    }
  }

  result.estimates = estimator.finalize(evidence);
  return result;
}

std::vector<int> evidence_ids(const Evidence& ev) {
  std::vector<int> out;
  for (const auto& [id, value] : ev.values) out.push_back(id);
  return out;
}

}  // namespace

OrderedBuckets build_ordered_buckets(const IjgpState& state,
                                     const std::vector<int>& cutset,
                                     const std::vector<int>& order) {
  if (order.size() != cutset.size())
    fail(ErrorCode::InvalidArgument, "order must be a permutation of cutset");
  std::vector<int> sorted_cut(cutset);
  std::sort(sorted_cut.begin(), sorted_cut.end());
  for (int v : order) {
    if (!std::binary_search(sorted_cut.begin(), sorted_cut.end(), v))
      fail(ErrorCode::InvalidArgument, "order must be a permutation of cutset");
    if (!state.net->is_discrete(v))
      fail(ErrorCode::InvalidArgument, "cutset variables must be discrete");
  }

  OrderedBuckets ob;
  ob.order = order;
  ob.buckets.resize(order.size());
  for (int v : order) ob.cards.push_back(state.net->cardinality(v));

  std::map<int, int> pos;
  for (std::size_t i = 0; i < order.size(); ++i)
    pos[order[i]] = static_cast<int>(i);

  // The F_pi filter: discrete-only, nonempty scope inside the cutset.
  auto place = [&](const CGPotential& f) {
    if (!f.discrete_only() || f.discrete_vars().empty()) return;
    int latest = -1;
    for (int v : f.discrete_vars()) {
      auto it = pos.find(v);
      if (it == pos.end()) return;  // mentions a non-cutset variable
      latest = std::max(latest, it->second);
    }
    ob.buckets[latest].push_back(f);
  };
  for (const auto& funcs : state.node_functions)
    for (const auto& f : funcs) place(f);
  for (const auto& msg : state.messages) place(msg);
  return ob;
}

DrawResult draw_sample(const OrderedBuckets& buckets, Rng& rng) {
  DrawResult out;
  int max_var = -1;
  for (int v : buckets.order) max_var = std::max(max_var, v);
  std::vector<int> global(max_var + 1, -1);

  for (std::size_t i = 0; i < buckets.order.size(); ++i) {
    const int var = buckets.order[i];
    const int card = buckets.cards[i];
    std::vector<double> logits(card, 0.0);
    for (int k = 0; k < card; ++k) {
      global[var] = k;
      double acc = 0.0;
      for (const auto& f : buckets.buckets[i]) {
        acc += f.log_at(global);
        if (acc == kNegativeInfinity) break;
      }
      logits[k] = acc;
    }
    double mx = kNegativeInfinity;
    for (double v : logits) mx = std::max(mx, v);
    if (mx == kNegativeInfinity) {
      out.dead_end = true;
      global[var] = -1;
      for (std::size_t j = i; j < buckets.order.size(); ++j)
        out.values.push_back(-1);
      return out;
    }
    std::vector<double> probs(card, 0.0);
    double total = 0.0;
    for (int k = 0; k < card; ++k) {
      if (logits[k] != kNegativeInfinity) probs[k] = std::exp(logits[k] - mx);
      total += probs[k];
    }
    const double u = rng.uniform() * total;
    int chosen = -1;
    double acc = 0.0;
    for (int k = 0; k < card; ++k) {
      if (probs[k] <= 0.0) continue;
      acc += probs[k];
      chosen = k;
      if (u < acc) break;
    }
    out.log_q += std::log(probs[chosen] / total);
    global[var] = chosen;
    out.values.push_back(chosen);
  }
  return out;
}

SampleRecord weigh_sample(const HybridMixedNetwork& net,
                          const JoinTreeDecomposition& remainder_tree,
                          const Evidence& evidence,
                          const std::vector<int>& cutset,
                          const std::vector<int>& values, double log_q) {
  Calibrator engine(net, remainder_tree);
  std::vector<int> rem_discrete, rem_continuous;
  std::vector<char> in_cut(net.size(), 0);
  for (int v : cutset) in_cut[v] = 1;
  for (int v = 0; v < net.size(); ++v) {
    if (in_cut[v] || evidence.contains(v)) continue;
    (net.is_discrete(v) ? rem_discrete : rem_continuous).push_back(v);
  }
  return weigh_with_engine(engine, net, evidence, cutset, values, log_q,
                           rem_discrete, rem_continuous);
}

SamplingResult ijgp_rb_sampling(const HybridMixedNetwork& net,
                                const Evidence& evidence, int i_bound,
                                int iterations, int w, long long n_samples,
                                uint64_t seed,
                                const SamplingOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  validate_evidence(net, evidence);
  if (iterations < 0 || n_samples < 0)
    fail(ErrorCode::InvalidArgument, "iterations and samples must be >= 0");

  const auto order = constrained_elimination_order(primal_graph(net), net);
  const auto graph = build_join_graph(net, order, i_bound);
  IjgpOptions ijgp_opts;
  ijgp_opts.max_iterations = iterations;
  ijgp_opts.tolerance = options.ijgp_tolerance;
  const IjgpState state = run_ijgp(net, graph, evidence, ijgp_opts);

  const WCutset cut = select_wcutset(net, w, evidence_ids(evidence));

  // Sampling order: cutset variables in reverse elimination order.
  std::vector<int> pi;
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    if (std::binary_search(cut.cutset.begin(), cut.cutset.end(), *it))
      pi.push_back(*it);

  const OrderedBuckets buckets = build_ordered_buckets(state, cut.cutset, pi);
  auto draw = [&buckets](Rng& rng) { return draw_sample(buckets, rng); };
  return run_sampling_loop(net, evidence, cut, draw, n_samples, seed, options,
                           pi, start);
}

SamplingResult pure_rb_sampling(const HybridMixedNetwork& net,
                                const Evidence& evidence, int w,
                                long long n_samples, uint64_t seed,
                                const SamplingOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  validate_evidence(net, evidence);
  if (n_samples < 0)
    fail(ErrorCode::InvalidArgument, "samples must be >= 0");

  const WCutset cut = select_wcutset(net, w, evidence_ids(evidence));

  // Prior proposal, ancestral: cutset variables in topological order.
  std::vector<int> pi;
  for (int v : net.topological_order())
    if (std::binary_search(cut.cutset.begin(), cut.cutset.end(), v))
      pi.push_back(v);

  auto draw = [&net, &evidence, &pi](Rng& rng) {
    DrawResult out;
    std::vector<int> assigned(net.size(), -1);
    for (const auto& [id, value] : evidence.values)
      if (net.is_discrete(id)) assigned[id] = static_cast<int>(value);

    for (int v : pi) {
      const auto& cpd = std::get<TabularCPD>(net.cpd(v));
      const int card = net.cardinality(v);
      std::vector<double> q(card, 0.0);

      // Average the CPT rows over every configuration of the unassigned
      // parents (the uniform-fill reading of "use the prior").
      std::vector<int> free_parents;
      for (int p : cpd.parents)
        if (assigned[p] < 0) free_parents.push_back(p);
      std::vector<int> cfg(free_parents.size(), 0);
      long long n_cfg = 1;
      for (int p : free_parents) n_cfg *= net.cardinality(p);
      for (long long c = 0; c < n_cfg; ++c) {
        long long row = 0;
        std::size_t fp = 0;
        for (int p : cpd.parents) {
          const int value = assigned[p] >= 0 ? assigned[p] : cfg[fp++];
          row = row * net.cardinality(p) + value;
        }
        for (int k = 0; k < card; ++k) q[k] += cpd.table[row * card + k];
        for (int i = static_cast<int>(free_parents.size()) - 1; i >= 0; --i) {
          if (++cfg[i] < net.cardinality(free_parents[i])) break;
          cfg[i] = 0;
        }
      }
      double total = 0.0;
      for (double x : q) total += x;
      const double u = rng.uniform() * total;
      int chosen = -1;
      double acc = 0.0;
      for (int k = 0; k < card; ++k) {
        if (q[k] <= 0.0) continue;
        acc += q[k];
        chosen = k;
        if (u < acc) break;
      }
      out.log_q += std::log(q[chosen] / total);
      assigned[v] = chosen;
      out.values.push_back(chosen);
    }
    return out;
  };
  return run_sampling_loop(net, evidence, cut, draw, n_samples, seed, options,
                           pi, start);
}

MarginalEstimates estimate_marginals(const WeightedSampleSet& set,
                                     const HybridMixedNetwork& net,
                                     const Evidence& evidence) {
  std::vector<int> rem_discrete, rem_continuous;
  std::vector<char> in_cut(net.size(), 0);
  for (int v : set.cutset) in_cut[v] = 1;
  for (int v = 0; v < net.size(); ++v) {
    if (in_cut[v] || evidence.contains(v)) continue;
    (net.is_discrete(v) ? rem_discrete : rem_continuous).push_back(v);
  }
  StreamingEstimator estimator(net, set.cutset, rem_discrete, rem_continuous);
  for (const auto& rec : set.records)
    if (!rec.rejected) estimator.add(rec);
  return estimator.finalize(evidence);
}

}  // namespace hmn
