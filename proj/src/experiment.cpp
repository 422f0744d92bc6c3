#include "hmn/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "hmn/exact.hpp"
#include "hmn/ijgp.hpp"
#include "hmn/rng.hpp"
#include "hmn/sampler.hpp"

namespace hmn {

namespace {

using nlohmann::json;

GeneratorParams params_from_json(const json& j) {
  GeneratorParams p;
  p.n1 = j.at("n1").get<int>();
  p.n2 = j.at("n2").get<int>();
  p.k = j.at("k").get<int>();
  p.c1 = j.at("c1").get<int>();
  p.c2 = j.at("c2").get<int>();
  p.p = j.at("p").get<int>();
  p.t = j.at("t").get<int>();
  return p;
}

double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}

// Estimated calibration footprint of a join tree, in table cells (Gaussian
// components weighted by the squared continuous clique size).
long long estimated_cells(const HybridMixedNetwork& net,
                          const JoinTreeDecomposition& jt) {
  long long total = 0;
  for (const auto& node : jt.nodes) {
    long long cells = 1;
    long long ncont = 0;
    for (int v : node.chi) {
      if (net.is_discrete(v))
        cells *= net.cardinality(v);
      else
        ++ncont;
      if (cells > (1LL << 40)) return std::numeric_limits<long long>::max();
    }
    total += cells * (1 + ncont * ncont);
  }
  return total;
}

struct ExactReference {
  std::map<int, std::vector<double>> discrete;          // unobserved only
  std::map<int, std::pair<double, double>> continuous;  // unobserved only
};

ExactReference exact_reference(const HybridMixedNetwork& net,
                               const CalibratedTree& cal, const Evidence& ev) {
  ExactReference ref;
  for (int v = 0; v < net.size(); ++v) {
    if (ev.contains(v)) continue;
    if (net.is_discrete(v)) {
      ref.discrete[v] = query_discrete_marginal(cal, v);
    } else {
      const auto m = query_continuous_moments(cal, v);
      ref.continuous[v] = {m.mean[0], m.cov(0, 0)};
    }
  }
  return ref;
}

void fill_continuous_errors(
    const ExactReference& ref,
    const std::map<int, std::pair<double, double>>& approx, CellResult& cell) {
  if (ref.continuous.empty()) return;
  double mean_err = 0.0, var_err = 0.0;
  int n = 0;
  for (const auto& [v, exact_mv] : ref.continuous) {
    auto it = approx.find(v);
    if (it == approx.end()) return;
    mean_err += std::abs(it->second.first - exact_mv.first);
    var_err += std::abs(it->second.second - exact_mv.second);
    ++n;
  }
  cell.cont_mean_abs_err = mean_err / n;
  cell.cont_var_abs_err = var_err / n;
}

// Keep only the variables the exact reference covers (the unobserved
// discrete ones).
std::map<int, std::vector<double>> restrict_to(
    const std::map<int, std::vector<double>>& approx,
    const std::map<int, std::vector<double>>& reference) {
  std::map<int, std::vector<double>> out;
  for (const auto& [v, dist] : reference) {
    (void)dist;
    out[v] = approx.at(v);
  }
  return out;
}

CellResult run_ijgp_cell(const HybridMixedNetwork& net, const Evidence& ev,
                         const JoinGraphDecomposition& graph, int i,
                         const ExactReference& ref,
                         const ExperimentConfig& config) {
  CellResult cell;
  cell.algorithm = "ijgp";
  cell.i = i;
  cell.w = 0;
  const auto t0 = std::chrono::steady_clock::now();
  IjgpOptions opts;
  opts.tolerance = config.ijgp_tolerance;
  if (config.time_budget_seconds) {
    opts.max_iterations = 1000000;
    opts.time_budget_seconds = *config.time_budget_seconds;
  } else {
    opts.max_iterations = config.ijgp_iterations;
  }
  const IjgpState state = run_ijgp(net, graph, ev, opts);

  std::map<int, std::vector<double>> approx;
  for (const auto& [v, dist] : ref.discrete) {
    (void)dist;
    approx[v] = approx_discrete_marginal(state, v);
  }
  cell.metrics = compute_errors(ref.discrete, approx);
  cell.valid = true;
  std::map<int, std::pair<double, double>> cont;
  try {
    for (const auto& [v, mv] : ref.continuous) {
      (void)mv;
      const auto m = approx_continuous_moments(state, v);
      cont[v] = {m.mean[0], m.cov(0, 0)};
    }
    fill_continuous_errors(ref, cont, cell);
  } catch (const Error&) {
    // improper continuous belief on a loopy graph: leave unreported
  }
  if (config.record_wall_time) cell.wall_ms = elapsed_ms(t0);
  return cell;
}

CellResult run_sampler_cell(const HybridMixedNetwork& net, const Evidence& ev,
                            int i, int w, uint64_t cell_seed,
                            const ExactReference& ref,
                            const ExperimentConfig& config) {
  CellResult cell;
  cell.algorithm = i == 0 ? "pure-rb" : "ijgp-rb";
  cell.i = i;
  cell.w = w;
  const auto t0 = std::chrono::steady_clock::now();
  SamplingOptions opts;
  opts.keep_records = false;
  opts.ijgp_tolerance = config.ijgp_tolerance;
  opts.time_budget_seconds = config.time_budget_seconds;
  try {
    SamplingResult result =
        i == 0 ? pure_rb_sampling(net, ev, w, config.samples_per_cell,
                                  cell_seed, opts)
               : ijgp_rb_sampling(net, ev, i, config.ijgp_iterations, w,
                                  config.samples_per_cell, cell_seed, opts);
    cell.rejection_rate = result.samples.rejection_rate();
    cell.metrics = compute_errors(
        ref.discrete, restrict_to(result.estimates.discrete, ref.discrete));
    cell.valid = true;
    fill_continuous_errors(ref, result.estimates.continuous, cell);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::AllSamplesRejected) throw;
    cell.rejection_rate = 1.0;
  }
  if (config.record_wall_time) cell.wall_ms = elapsed_ms(t0);
  return cell;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument,
         std::string("bad config JSON: ") + e.what());
  }
  ExperimentConfig cfg;
  const auto& jp = doc.at("params");
  if (jp.is_array())
    for (const auto& j : jp) cfg.params.push_back(params_from_json(j));
  else
    cfg.params.push_back(params_from_json(jp));
  cfg.instances = doc.value("instances", 1);
  cfg.evidence_fraction = doc.value("evidence_fraction", 0.1);
  cfg.ijgp_iterations = doc.value("ijgp_iterations", 10);
  cfg.ijgp_tolerance = doc.value("ijgp_tolerance", 1e-8);
  if (doc.contains("time_budget_seconds") &&
      !doc["time_budget_seconds"].is_null())
    cfg.time_budget_seconds = doc["time_budget_seconds"].get<double>();
  cfg.samples_per_cell = doc.value("samples_per_cell", 1000LL);
  cfg.record_wall_time = doc.value("record_wall_time", true);
  if (doc.contains("i_values"))
    cfg.i_values = doc["i_values"].get<std::vector<int>>();
  if (doc.contains("w_values"))
    cfg.w_values = doc["w_values"].get<std::vector<int>>();
  cfg.memory_guard_cells = doc.value("memory_guard_cells", 20000000LL);
  cfg.seed = doc.value("seed", uint64_t{1});
  cfg.output_csv = doc.value("output_csv", std::string("results.csv"));
  if (cfg.instances < 1 || cfg.evidence_fraction < 0.0 ||
      cfg.evidence_fraction >= 1.0 ||
      (cfg.time_budget_seconds && *cfg.time_budget_seconds <= 0.0) ||
      cfg.i_values.empty() || cfg.w_values.empty())
    fail(ErrorCode::InvalidArgument, "invalid experiment configuration");
  return cfg;
}

ErrorReport run_experiment(const ExperimentConfig& config) {
  ErrorReport report;
  report.i_values = config.i_values;
  report.w_values = config.w_values;

  long long instance_id = 0;
  for (std::size_t cls = 0; cls < config.params.size(); ++cls) {
    for (int inst = 0; inst < config.instances; ++inst, ++instance_id) {
      const uint64_t inst_seed =
          Rng::stream(config.seed, static_cast<uint64_t>(instance_id))
              .next_u64();
      GeneratorParams params = config.params[cls];
      params.seed = inst_seed;

      InstanceResult result;
      result.instance_id = instance_id;
      result.tightness = params.t;
      result.seed = inst_seed;

      const auto net = generate(params);
      const auto evidence = select_evidence(
          net, config.evidence_fraction, Rng::stream(inst_seed, 1).next_u64());

      const auto order = constrained_elimination_order(primal_graph(net), net);
      const auto tree = build_join_tree(net, order);
      if (estimated_cells(net, tree) > config.memory_guard_cells) {
        std::cerr << "instance " << instance_id
                  << ": exact solve exceeds the memory guard, skipped\n";
        result.skipped = true;
        report.instances.push_back(std::move(result));
        continue;
      }
      const auto cal = calibrate(net, tree, evidence);
      const ExactReference ref = exact_reference(net, cal, evidence);

      // Join graphs are shared by the IJGP row.
      std::map<int, JoinGraphDecomposition> graphs;
      for (int i : config.i_values)
        if (i > 0) graphs.emplace(i, build_join_graph(net, order, i));

      int cell_index = 0;
      for (int w : config.w_values) {
        for (int i : config.i_values) {
          const uint64_t cell_seed =
              Rng::stream(inst_seed, 100 + static_cast<uint64_t>(cell_index))
                  .next_u64();
          ++cell_index;
          if (w == 0 && i > 0)
            result.cells.push_back(
                run_ijgp_cell(net, evidence, graphs.at(i), i, ref, config));
          else
            result.cells.push_back(
                run_sampler_cell(net, evidence, i, w, cell_seed, ref, config));
        }
      }
      report.instances.push_back(std::move(result));
    }
  }
  write_report_csv(report, config);
  return report;
}

double ErrorReport::mean_cell(const std::string& metric, int w, int i) const {
  double acc = 0.0;
  int n = 0;
  for (const auto& inst : instances) {
    if (inst.skipped) continue;
    for (const auto& cell : inst.cells) {
      if (cell.w != w || cell.i != i) continue;
      double v = std::numeric_limits<double>::quiet_NaN();
      if (metric == "abs" && cell.valid) v = cell.metrics.absolute;
      if (metric == "rel" && cell.valid) v = cell.metrics.relative;
      if (metric == "kl" && cell.valid) v = cell.metrics.kl;
      if (metric == "rejection" && cell.rejection_rate >= 0)
        v = cell.rejection_rate;
      if (!std::isnan(v)) {
        acc += v;
        ++n;
      }
    }
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : acc / n;
}

void write_report_csv(const ErrorReport& report,
                      const ExperimentConfig& config) {
  std::ofstream csv(config.output_csv);
  if (!csv)
    fail(ErrorCode::InvalidArgument,
         "cannot open " + config.output_csv + " for writing");
  csv << "instance_id,T,algorithm,i,w,abs_err,rel_err,kl,kl_summed,"
         "rejection_rate,wall_ms\n";
  std::ofstream cont_csv(config.output_csv + ".continuous.csv");
  cont_csv << "instance_id,T,algorithm,i,w,cont_mean_abs_err,"
              "cont_var_abs_err\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& inst : report.instances) {
    if (inst.skipped) continue;
    for (const auto& cell : inst.cells) {
      csv << inst.instance_id << ',' << inst.tightness << ','
          << cell.algorithm << ',' << cell.i << ',' << cell.w << ','
          << format_number(cell.valid ? cell.metrics.absolute : nan) << ','
          << format_number(cell.valid ? cell.metrics.relative : nan) << ','
          << format_number(cell.valid ? cell.metrics.kl : nan) << ','
          << format_number(cell.valid ? cell.metrics.kl_summed : nan) << ','
          << format_number(cell.rejection_rate >= 0 ? cell.rejection_rate
                                                    : nan)
          << ',' << format_number(cell.wall_ms) << '\n';
      cont_csv << inst.instance_id << ',' << inst.tightness << ','
               << cell.algorithm << ',' << cell.i << ',' << cell.w << ','
               << format_number(cell.cont_mean_abs_err >= 0
                                    ? cell.cont_mean_abs_err
                                    : nan)
               << ','
               << format_number(
                      cell.cont_var_abs_err >= 0 ? cell.cont_var_abs_err : nan)
               << '\n';
    }
  }
}

std::string report_summary(const ErrorReport& report) {
  std::ostringstream out;
  const struct {
    const char* key;
    const char* title;
  } metrics[] = {{"rel", "Relative Error"},
                 {"abs", "Absolute Error"},
                 {"kl", "K-L distance"},
                 {"rejection", "Rejection rate"}};
  int usable = 0;
  for (const auto& inst : report.instances)
    if (!inst.skipped) ++usable;
  out << "instances: " << usable << " (" << report.instances.size() - usable
      << " skipped)\n";
  for (const auto& m : metrics) {
    out << '\n' << m.title << '\n';
    out << "      ";
    for (int i : report.i_values) {
      char head[16];
      std::snprintf(head, sizeof(head), "i=%-9d", i);
      out << head;
    }
    out << '\n';
    for (int w : report.w_values) {
      char rowh[16];
      std::snprintf(rowh, sizeof(rowh), "w=%-4d", w);
      out << rowh;
      for (int i : report.i_values) {
        const double v = report.mean_cell(m.key, w, i);
        char buf[16];
        if (std::isnan(v))
          std::snprintf(buf, sizeof(buf), "%-10s", "-");
        else
          std::snprintf(buf, sizeof(buf), "%-10.5f", v);
        out << buf;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace hmn
