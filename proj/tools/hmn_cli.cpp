// Command line front end: generate | exact | ijgp | sample | benchmark.
// Exit codes: 0 success, 2 validation failure, 3 inconsistent evidence.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hmn/exact.hpp"
#include "hmn/experiment.hpp"
#include "hmn/generator.hpp"
#include "hmn/ijgp.hpp"
#include "hmn/json_io.hpp"
#include "hmn/sampler.hpp"

namespace {

using nlohmann::ordered_json;

std::string read_input(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path);
  if (!in) hmn::fail(hmn::ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text << std::endl;
    return;
  }
  std::ofstream out(path);
  if (!out) hmn::fail(hmn::ErrorCode::InvalidArgument, "cannot open " + path);
  out << text << std::endl;
}

ordered_json marginals_json(const hmn::HybridMixedNetwork& net,
                            const std::map<int, std::vector<double>>& discrete,
                            const std::map<int, std::pair<double, double>>& continuous) {
  ordered_json doc;
  doc["discrete"] = ordered_json::object();
  for (const auto& [v, dist] : discrete)
    doc["discrete"][net.variable(v).name] = dist;
  doc["continuous"] = ordered_json::object();
  for (const auto& [v, mv] : continuous) {
    ordered_json jm;
    jm["mean"] = mv.first;
    jm["variance"] = mv.second;
    doc["continuous"][net.variable(v).name] = std::move(jm);
  }
  return doc;
}

int run(int argc, char** argv) {
  CLI::App app{"Inference engine for hybrid mixed networks"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand(
      "generate", "Generate a random instance (network JSON to --output)");
  hmn::GeneratorParams params;
  double evidence_fraction = 0.0;
  std::string gen_output = "-";
  uint64_t gen_seed = 0;
  gen->add_option("--n1", params.n1, "discrete variable count")->required();
  gen->add_option("--n2", params.n2, "continuous variable count")->required();
  gen->add_option("-k,--cardinality", params.k, "discrete cardinality")
      ->required();
  gen->add_option("--c1", params.c1, "constraint count")->required();
  gen->add_option("--c2", params.c2, "CPD count")->required();
  gen->add_option("-p,--parents", params.p, "parents per CPD")->required();
  gen->add_option("-t,--tightness", params.t, "forbidden tuples per constraint")
      ->required();
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--evidence-fraction", evidence_fraction,
                  "fraction of variables observed via a forward sample");
  gen->add_option("-o,--output", gen_output, "output path (- for stdout)");

  // exact
  auto* exact_cmd =
      app.add_subcommand("exact", "Exact posterior marginals (join tree)");
  std::string exact_net, exact_output = "-";
  exact_cmd->add_option("network", exact_net, "network JSON path")->required();
  exact_cmd->add_option("-o,--output", exact_output, "output path");

  // ijgp
  auto* ijgp_cmd = app.add_subcommand("ijgp", "Bounded iterative propagation");
  std::string ijgp_net, ijgp_output = "-";
  int ijgp_i = 2, ijgp_iters = 10;
  double ijgp_tol = 1e-8;
  ijgp_cmd->add_option("network", ijgp_net, "network JSON path")->required();
  ijgp_cmd->add_option("-i,--i-bound", ijgp_i, "adjusted i-bound")->required();
  ijgp_cmd->add_option("--iterations", ijgp_iters, "maximum rounds");
  ijgp_cmd->add_option("--tolerance", ijgp_tol, "residual tolerance");
  ijgp_cmd->add_option("-o,--output", ijgp_output, "output path");

  // sample
  auto* sample_cmd =
      app.add_subcommand("sample", "Rao-Blackwellised importance sampling");
  std::string sample_net, sample_output = "-", mode = "ijgp-rb";
  int sample_i = 2, sample_w = 0, sample_iters = 10;
  long long n_samples = 1000;
  std::optional<double> time_budget;
  uint64_t sample_seed = 0;
  sample_cmd->add_option("network", sample_net, "network JSON path")
      ->required();
  sample_cmd->add_option("--mode", mode, "ijgp-rb | pure-rb")
      ->check(CLI::IsMember({"ijgp-rb", "pure-rb"}));
  sample_cmd->add_option("-i,--i-bound", sample_i, "adjusted i-bound");
  sample_cmd->add_option("-w", sample_w, "cutset width bound");
  sample_cmd->add_option("-n,--samples", n_samples, "sample count");
  sample_cmd->add_option("--time-budget", time_budget,
                         "draw until this many seconds elapse");
  sample_cmd->add_option("--ijgp-iterations", sample_iters, "IJGP rounds");
  sample_cmd->add_option("--seed", sample_seed, "sampling seed");
  sample_cmd->add_option("-o,--output", sample_output, "output path");

  // benchmark
  auto* bench_cmd = app.add_subcommand(
      "benchmark", "Run the full evaluation grid from a config file");
  std::string bench_config, bench_output;
  bench_cmd->add_option("config", bench_config, "experiment config JSON")
      ->required();
  bench_cmd->add_option("-o,--output", bench_output,
                        "override the config's output_csv");

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    params.seed = gen_seed;
    const auto net = hmn::generate(params);
    hmn::Evidence ev;
    if (evidence_fraction > 0.0)
      ev = hmn::select_evidence(net, evidence_fraction,
                                hmn::Rng::stream(gen_seed, 1).next_u64());
    write_output(gen_output, hmn::network_to_json(net, ev));
    return 0;
  }

  if (exact_cmd->parsed()) {
    auto [net, ev] = hmn::parse_network_json(read_input(exact_net));
    const auto order =
        hmn::constrained_elimination_order(hmn::primal_graph(net), net);
    const auto tree = hmn::build_join_tree(net, order);
    const auto cal = hmn::calibrate(net, tree, ev);
    std::map<int, std::vector<double>> discrete;
    std::map<int, std::pair<double, double>> continuous;
    for (int v = 0; v < net.size(); ++v) {
      if (net.is_discrete(v))
        discrete[v] = hmn::query_discrete_marginal(cal, v);
      else {
        const auto m = hmn::query_continuous_moments(cal, v);
        continuous[v] = {m.mean[0], m.cov(0, 0)};
      }
    }
    ordered_json doc = marginals_json(net, discrete, continuous);
    doc["log_evidence_probability"] = cal.log_evidence();
    write_output(exact_output, doc.dump(2));
    return 0;
  }

  if (ijgp_cmd->parsed()) {
    auto [net, ev] = hmn::parse_network_json(read_input(ijgp_net));
    const auto order =
        hmn::constrained_elimination_order(hmn::primal_graph(net), net);
    const auto graph = hmn::build_join_graph(net, order, ijgp_i);
    hmn::IjgpOptions opts;
    opts.max_iterations = ijgp_iters;
    opts.tolerance = ijgp_tol;
    const auto state = hmn::run_ijgp(net, graph, ev, opts);
    std::map<int, std::vector<double>> discrete;
    std::map<int, std::pair<double, double>> continuous;
    for (int v = 0; v < net.size(); ++v) {
      if (net.is_discrete(v))
        discrete[v] = hmn::approx_discrete_marginal(state, v);
      else {
        const auto m = hmn::approx_continuous_moments(state, v);
        continuous[v] = {m.mean[0], m.cov(0, 0)};
      }
    }
    ordered_json doc = marginals_json(net, discrete, continuous);
    doc["iterations"] = state.iterations;
    doc["converged"] = state.converged;
    doc["residual"] = state.residual;
    write_output(ijgp_output, doc.dump(2));
    return 0;
  }

  if (sample_cmd->parsed()) {
    auto [net, ev] = hmn::parse_network_json(read_input(sample_net));
    hmn::SamplingOptions opts;
    opts.keep_records = false;
    opts.time_budget_seconds = time_budget;
    const auto result =
        mode == "pure-rb"
            ? hmn::pure_rb_sampling(net, ev, sample_w, n_samples, sample_seed,
                                    opts)
            : hmn::ijgp_rb_sampling(net, ev, sample_i, sample_iters, sample_w,
                                    n_samples, sample_seed, opts);
    ordered_json doc = marginals_json(net, result.estimates.discrete,
                                      result.estimates.continuous);
    doc["mode"] = mode;
    doc["samples_drawn"] = result.samples.total_drawn;
    doc["rejection_rate"] = result.samples.rejection_rate();
    write_output(sample_output, doc.dump(2));
    return 0;
  }

  if (bench_cmd->parsed()) {
    auto config = hmn::parse_experiment_config(read_input(bench_config));
    if (!bench_output.empty()) config.output_csv = bench_output;
    const auto report = hmn::run_experiment(config);
    std::cout << hmn::report_summary(report);
    std::cout << "\nwrote " << config.output_csv << "\n";
    return 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const hmn::Error& e) {
    std::cerr << "error [" << hmn::error_code_name(e.code()) << "]: "
              << e.what() << "\n";
    if (e.code() == hmn::ErrorCode::InconsistentEvidence ||
        e.code() == hmn::ErrorCode::AllSamplesRejected)
      return 3;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
