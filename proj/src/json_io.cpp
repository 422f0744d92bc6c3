#include "hmn/json_io.hpp"

#include <set>

#include <json.hpp>

namespace hmn {

namespace {

using nlohmann::ordered_json;

int lookup(const std::map<std::string, int>& ids, const std::string& name) {
  auto it = ids.find(name);
  if (it == ids.end())
    fail(ErrorCode::DanglingVariableReference, "unknown variable: " + name);
  return it->second;
}

}  // namespace

std::pair<HybridMixedNetwork, Evidence> parse_network_json(
    const std::string& text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::InvalidArgument, std::string("bad JSON: ") + e.what());
  }

  std::vector<Variable> variables;
  std::map<std::string, int> ids;
  for (const auto& jv : doc.at("variables")) {
    Variable v;
    v.id = static_cast<int>(variables.size());
    v.name = jv.at("name").get<std::string>();
    const auto kind = jv.at("kind").get<std::string>();
    if (kind == "discrete") {
      v.kind = VarKind::Discrete;
      v.cardinality = jv.at("cardinality").get<int>();
    } else if (kind == "continuous") {
      v.kind = VarKind::Continuous;
    } else {
      fail(ErrorCode::InvalidArgument, "variable kind must be discrete|continuous");
    }
    ids[v.name] = v.id;
    variables.push_back(std::move(v));
  }

  std::vector<Cpd> cpds;
  for (const auto& jc : doc.at("cpds")) {
    const int child = lookup(ids, jc.at("child").get<std::string>());
    if (jc.contains("table")) {
      TabularCPD cpd;
      cpd.child = child;
      for (const auto& p : jc.value("parents", ordered_json::array()))
        cpd.parents.push_back(lookup(ids, p.get<std::string>()));
      cpd.table = jc.at("table").get<std::vector<double>>();
      cpds.emplace_back(std::move(cpd));
    } else {
      LinearGaussianCPD cpd;
      cpd.child = child;
      for (const auto& p : jc.value("discrete_parents", ordered_json::array()))
        cpd.discrete_parents.push_back(lookup(ids, p.get<std::string>()));
      for (const auto& p : jc.value("continuous_parents", ordered_json::array()))
        cpd.continuous_parents.push_back(lookup(ids, p.get<std::string>()));
      for (const auto& jcfg : jc.at("configs")) {
        LinearGaussianCPD::Config cfg;
        cfg.intercept = jcfg.at("intercept").get<double>();
        cfg.coefficients = jcfg.value("coefficients", std::vector<double>{});
        cfg.variance = jcfg.at("variance").get<double>();
        cpd.configs.push_back(std::move(cfg));
      }
      cpds.emplace_back(std::move(cpd));
    }
  }

  std::vector<ConstraintRelation> constraints;
  for (const auto& jr : doc.value("constraints", ordered_json::array())) {
    ConstraintRelation rel;
    std::vector<int> cards;
    for (const auto& s : jr.at("scope")) {
      const int id = lookup(ids, s.get<std::string>());
      rel.scope.push_back(id);
      if (variables[id].kind != VarKind::Discrete)
        fail(ErrorCode::InvalidArgument, "constraint scope must be discrete");
      cards.push_back(variables[id].cardinality);
    }
    // The file stores no-goods; flip them into the allowed set.
    std::set<std::vector<int>> forbidden;
    for (const auto& jt : jr.at("forbidden"))
      forbidden.insert(jt.get<std::vector<int>>());
    long long count = 1;
    for (int c : cards) count *= c;
    std::vector<int> tuple(rel.scope.size(), 0);
    for (long long i = 0; i < count; ++i) {
      if (!forbidden.count(tuple)) rel.allowed.push_back(tuple);
      for (int j = static_cast<int>(tuple.size()) - 1; j >= 0; --j) {
        if (++tuple[j] < cards[j]) break;
        tuple[j] = 0;
      }
    }
    constraints.push_back(std::move(rel));
  }

  Evidence evidence;
  const ordered_json ev_obj = doc.value("evidence", ordered_json::object());
  for (const auto& [name, value] : ev_obj.items())
    evidence.set(lookup(ids, name), value.get<double>());

  auto net = build_network(std::move(variables), std::move(cpds),
                           std::move(constraints));
  validate_evidence(net, evidence);
  return {std::move(net), std::move(evidence)};
}

std::string network_to_json(const HybridMixedNetwork& net,
                            const Evidence& evidence, int indent) {
  ordered_json doc;
  doc["variables"] = ordered_json::array();
  for (const auto& v : net.variables()) {
    ordered_json jv;
    jv["name"] = v.name;
    if (v.kind == VarKind::Discrete) {
      jv["kind"] = "discrete";
      jv["cardinality"] = v.cardinality;
    } else {
      jv["kind"] = "continuous";
    }
    doc["variables"].push_back(std::move(jv));
  }

  doc["cpds"] = ordered_json::array();
  for (int v = 0; v < net.size(); ++v) {
    ordered_json jc;
    jc["child"] = net.variable(v).name;
    if (const auto* t = std::get_if<TabularCPD>(&net.cpd(v))) {
      jc["parents"] = ordered_json::array();
      for (int p : t->parents) jc["parents"].push_back(net.variable(p).name);
      jc["table"] = t->table;
    } else {
      const auto& lg = std::get<LinearGaussianCPD>(net.cpd(v));
      jc["discrete_parents"] = ordered_json::array();
      for (int p : lg.discrete_parents)
        jc["discrete_parents"].push_back(net.variable(p).name);
      jc["continuous_parents"] = ordered_json::array();
      for (int p : lg.continuous_parents)
        jc["continuous_parents"].push_back(net.variable(p).name);
      jc["configs"] = ordered_json::array();
      for (const auto& cfg : lg.configs) {
        ordered_json jcfg;
        jcfg["intercept"] = cfg.intercept;
        jcfg["coefficients"] = cfg.coefficients;
        jcfg["variance"] = cfg.variance;
        jc["configs"].push_back(std::move(jcfg));
      }
    }
    doc["cpds"].push_back(std::move(jc));
  }

  doc["constraints"] = ordered_json::array();
  for (const auto& rel : net.constraints()) {
    ordered_json jr;
    jr["scope"] = ordered_json::array();
    std::vector<int> cards;
    for (int id : rel.scope) {
      jr["scope"].push_back(net.variable(id).name);
      cards.push_back(net.cardinality(id));
    }
    std::set<std::vector<int>> allowed(rel.allowed.begin(), rel.allowed.end());
    jr["forbidden"] = ordered_json::array();
    long long count = 1;
    for (int c : cards) count *= c;
    std::vector<int> tuple(rel.scope.size(), 0);
    for (long long i = 0; i < count; ++i) {
      if (!allowed.count(tuple)) jr["forbidden"].push_back(tuple);
      for (int j = static_cast<int>(tuple.size()) - 1; j >= 0; --j) {
        if (++tuple[j] < cards[j]) break;
        tuple[j] = 0;
      }
    }
    doc["constraints"].push_back(std::move(jr));
  }

  doc["evidence"] = ordered_json::object();
  for (const auto& [id, value] : evidence.values) {
    if (net.is_discrete(id))
      doc["evidence"][net.variable(id).name] = static_cast<int>(value);
    else
      doc["evidence"][net.variable(id).name] = value;
  }
  return doc.dump(indent);
}

namespace {

ordered_json node_to_json(const HybridMixedNetwork& net,
                          const std::vector<int>& chi,
                          const std::vector<int>& psi) {
  ordered_json jn;
  jn["vars"] = ordered_json::array();
  for (int v : chi) jn["vars"].push_back(net.variable(v).name);
  jn["functions"] = ordered_json::array();
  for (int f : psi) {
    if (f < net.size())
      jn["functions"].push_back("cpd:" + net.variable(f).name);
    else
      jn["functions"].push_back("constraint:" + std::to_string(f - net.size()));
  }
  return jn;
}

}  // namespace

std::string decomposition_to_json(const HybridMixedNetwork& net,
                                  const JoinTreeDecomposition& jt,
                                  int indent) {
  ordered_json doc;
  doc["type"] = "join_tree";
  doc["nodes"] = ordered_json::array();
  for (const auto& node : jt.nodes)
    doc["nodes"].push_back(node_to_json(net, node.chi, node.psi));
  doc["edges"] = ordered_json::array();
  for (std::size_t e = 0; e < jt.edges.size(); ++e) {
    ordered_json je;
    je["a"] = jt.edges[e].first;
    je["b"] = jt.edges[e].second;
    je["separator"] = ordered_json::array();
    for (int v : jt.separators[e]) je["separator"].push_back(net.variable(v).name);
    doc["edges"].push_back(std::move(je));
  }
  doc["strong_root"] = jt.strong_root;
  doc["adjusted_width"] = adjusted_width(jt, net);
  return doc.dump(indent);
}

std::string decomposition_to_json(const HybridMixedNetwork& net,
                                  const JoinGraphDecomposition& jg,
                                  int indent) {
  ordered_json doc;
  doc["type"] = "join_graph";
  doc["i_bound"] = jg.i_bound;
  doc["nodes"] = ordered_json::array();
  for (const auto& node : jg.nodes)
    doc["nodes"].push_back(node_to_json(net, node.chi, node.psi));
  doc["edges"] = ordered_json::array();
  for (const auto& e : jg.edges) {
    ordered_json je;
    je["a"] = e.a;
    je["b"] = e.b;
    je["label"] = ordered_json::array();
    for (int v : e.label) je["label"].push_back(net.variable(v).name);
    doc["edges"].push_back(std::move(je));
  }
  doc["adjusted_width"] = adjusted_width(jg, net);
  doc["has_oversized"] = jg.has_oversized;
  return doc.dump(indent);
}

}  // namespace hmn
