// Python bindings. Networks and results travel as JSON strings; the hmn
// package wraps these with dict-based helpers.

#include <pybind11/pybind11.h>

#include <map>
#include <string>

#include <json.hpp>

#include "hmn/exact.hpp"
#include "hmn/experiment.hpp"
#include "hmn/generator.hpp"
#include "hmn/ijgp.hpp"
#include "hmn/json_io.hpp"
#include "hmn/metrics.hpp"
#include "hmn/sampler.hpp"

namespace py = pybind11;

namespace {

using nlohmann::ordered_json;

ordered_json marginals_json(
    const hmn::HybridMixedNetwork& net,
    const std::map<int, std::vector<double>>& discrete,
    const std::map<int, std::pair<double, double>>& continuous) {
  ordered_json doc;
  doc["discrete"] = ordered_json::object();
  for (const auto& [v, dist] : discrete)
    doc["discrete"][net.variable(v).name] = dist;
  doc["continuous"] = ordered_json::object();
  for (const auto& [v, mv] : continuous) {
    doc["continuous"][net.variable(v).name] = {{"mean", mv.first},
                                               {"variance", mv.second}};
  }
  return doc;
}

std::string generate_network(int n1, int n2, int k, int c1, int c2, int p,
                             int t, uint64_t seed, double evidence_fraction) {
  hmn::GeneratorParams params{n1, n2, k, c1, c2, p, t, seed};
  const auto net = hmn::generate(params);
  hmn::Evidence ev;
  if (evidence_fraction > 0.0)
    ev = hmn::select_evidence(net, evidence_fraction,
                              hmn::Rng::stream(seed, 1).next_u64());
  return hmn::network_to_json(net, ev);
}

std::string exact_marginals(const std::string& network_json) {
  auto [net, ev] = hmn::parse_network_json(network_json);
  const auto order =
      hmn::constrained_elimination_order(hmn::primal_graph(net), net);
  const auto cal = hmn::calibrate(net, hmn::build_join_tree(net, order), ev);
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
  return doc.dump();
}

std::string ijgp_marginals(const std::string& network_json, int i_bound,
                           int iterations, double tolerance) {
  auto [net, ev] = hmn::parse_network_json(network_json);
  const auto order =
      hmn::constrained_elimination_order(hmn::primal_graph(net), net);
  const auto graph = hmn::build_join_graph(net, order, i_bound);
  hmn::IjgpOptions opts;
  opts.max_iterations = iterations;
  opts.tolerance = tolerance;
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
  return doc.dump();
}

std::string sample_marginals(const std::string& network_json,
                             const std::string& mode, int i_bound, int w,
                             long long samples, uint64_t seed,
                             int ijgp_iterations) {
  auto [net, ev] = hmn::parse_network_json(network_json);
  hmn::SamplingOptions opts;
  opts.keep_records = false;
  const auto result =
      mode == "pure-rb"
          ? hmn::pure_rb_sampling(net, ev, w, samples, seed, opts)
          : hmn::ijgp_rb_sampling(net, ev, i_bound, ijgp_iterations, w,
                                  samples, seed, opts);
  ordered_json doc = marginals_json(net, result.estimates.discrete,
                                    result.estimates.continuous);
  doc["samples_drawn"] = result.samples.total_drawn;
  doc["rejection_rate"] = result.samples.rejection_rate();
  return doc.dump();
}

std::string error_metrics(const std::string& exact_json,
                          const std::string& approx_json) {
  const auto parse = [](const std::string& text) {
    std::map<int, std::vector<double>> out;
    int next = 0;
    for (const auto& [name, dist] : ordered_json::parse(text).items()) {
      (void)name;
      out[next++] = dist.get<std::vector<double>>();
    }
    return out;
  };
  const auto m = hmn::compute_errors(parse(exact_json), parse(approx_json));
  ordered_json doc;
  doc["absolute"] = m.absolute;
  doc["relative"] = m.relative;
  doc["kl"] = m.kl;
  doc["kl_summed"] = m.kl_summed;
  return doc.dump();
}

std::string run_benchmark(const std::string& config_json) {
  const auto config = hmn::parse_experiment_config(config_json);
  const auto report = hmn::run_experiment(config);
  return hmn::report_summary(report);
}

}  // namespace

PYBIND11_MODULE(_hmn, m) {
  m.doc() = "Inference engine for hybrid mixed networks";
  m.def("generate_network", &generate_network, py::arg("n1"), py::arg("n2"),
        py::arg("k"), py::arg("c1"), py::arg("c2"), py::arg("p"), py::arg("t"),
        py::arg("seed") = 0, py::arg("evidence_fraction") = 0.0);
  m.def("exact_marginals", &exact_marginals, py::arg("network_json"));
  m.def("ijgp_marginals", &ijgp_marginals, py::arg("network_json"),
        py::arg("i_bound"), py::arg("iterations") = 10,
        py::arg("tolerance") = 1e-8);
  m.def("sample_marginals", &sample_marginals, py::arg("network_json"),
        py::arg("mode") = "ijgp-rb", py::arg("i_bound") = 2, py::arg("w") = 0,
        py::arg("samples") = 1000, py::arg("seed") = 0,
        py::arg("ijgp_iterations") = 10);
  m.def("error_metrics", &error_metrics, py::arg("exact_json"),
        py::arg("approx_json"));
  m.def("run_benchmark", &run_benchmark, py::arg("config_json"));

  py::register_exception<hmn::Error>(m, "HmnError");
}
