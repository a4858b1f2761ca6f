#include "limid/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "limid/error.hpp"

namespace limid {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParseError(where + ": " + what); }

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::string as_string(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

double as_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

VarId lookup(const InfluenceDiagram& d, const json& j, const std::string& where) {
  const std::string name = as_string(j, where);
  auto id = d.find(name);
  if (!id) fail(where, "unknown variable \"" + name + "\"");
  return *id;
}

Table parse_table(const InfluenceDiagram& d, VarId owner, const json& j, const std::string& where) {
  Table t;
  const json& parents = require(j, "parents", where);
  if (!parents.is_array()) fail(where + ".parents", "expected an array");
  std::size_t columns = 1;
  for (std::size_t k = 0; k < parents.size(); ++k) {
    const VarId p = lookup(d, parents[k], where + ".parents[" + std::to_string(k) + "]");
    t.parents.push_back(p);
    if (d.var(p).kind == VarKind::value) fail(where + ".parents", "value variable " + d.var(p).name + " used as a parent");
    columns *= static_cast<std::size_t>(std::max(d.cardinality(p), 0));
  }
  const json& table = require(j, "table", where);
  if (!table.is_array()) fail(where + ".table", "expected an array");
  for (std::size_t k = 0; k < table.size(); ++k)
    t.values.push_back(as_number(table[k], where + ".table[" + std::to_string(k) + "]"));
  const std::size_t rows = d.var(owner).kind == VarKind::chance ? static_cast<std::size_t>(d.cardinality(owner)) : 1;
  if (t.values.size() != rows * columns)
    fail(where + ".table", "variable " + d.var(owner).name + " expects " + std::to_string(rows * columns) +
                               " entries, got " + std::to_string(t.values.size()));
  return t;
}

}  // namespace

DiagramDocument document_from_json(const json& doc) {
  if (!doc.is_object()) fail("document", "expected an object");
  DiagramDocument out;
  InfluenceDiagram& d = out.diagram;

  const json& vars = require(doc, "variables", "document");
  if (!vars.is_array()) fail("variables", "expected an array");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "variables[" + std::to_string(i) + "]";
    const json& v = vars[i];
    Variable var;
    var.name = as_string(require(v, "id", where), where + ".id");
    if (d.find(var.name)) fail(where + ".id", "duplicate variable id \"" + var.name + "\"");
    const std::string kind = as_string(require(v, "kind", where), where + ".kind");
    if (kind == "chance")
      var.kind = VarKind::chance;
    else if (kind == "decision")
      var.kind = VarKind::decision;
    else if (kind == "value")
      var.kind = VarKind::value;
    else
      fail(where + ".kind", "unknown kind \"" + kind + "\"");
    if (auto it = v.find("states"); it != v.end()) {
      if (!it->is_array()) fail(where + ".states", "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k)
        var.states.push_back(as_string((*it)[k], where + ".states[" + std::to_string(k) + "]"));
    }
    if (auto it = v.find("cardinality"); it != v.end()) {
      if (!it->is_number_integer()) fail(where + ".cardinality", "expected an integer");
      var.cardinality = it->get<int>();
    } else if (var.kind != VarKind::value) {
      if (var.states.empty()) fail(where, "missing key \"cardinality\"");
      var.cardinality = static_cast<int>(var.states.size());
    }
    if (var.kind != VarKind::value && var.cardinality < 1) fail(where + ".cardinality", "must be at least 1");
    d.variables.push_back(std::move(var));
  }

  if (auto it = doc.find("arcs"); it != doc.end()) {
    if (!it->is_array()) fail("arcs", "expected an array");
    for (std::size_t k = 0; k < it->size(); ++k) {
      const std::string where = "arcs[" + std::to_string(k) + "]";
      const json& a = (*it)[k];
      if (!a.is_array() || a.size() != 2) fail(where, "expected [from, to]");
      d.arcs.emplace_back(lookup(d, a[0], where + "[0]"), lookup(d, a[1], where + "[1]"));
    }
  }

  auto read_tables = [&](const char* key, std::map<VarId, Table>& into, VarKind kind) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_object()) fail(key, "expected an object");
    for (const auto& [name, body] : it->items()) {
      const std::string where = std::string(key) + "." + name;
      auto id = d.find(name);
      if (!id) fail(where, "unknown variable \"" + name + "\"");
      if (d.var(*id).kind != kind) fail(where, "variable " + name + " has kind " + std::string(to_string(d.var(*id).kind)));
      into[*id] = parse_table(d, *id, body, where);
    }
  };
  read_tables("cpts", d.cpts, VarKind::chance);
  read_tables("rewards", d.rewards, VarKind::value);

  if (auto it = doc.find("decomposition"); it != doc.end() && !it->is_null()) {
    TreeDecomposition t;
    const json& clusters = require(*it, "clusters", "decomposition");
    if (!clusters.is_array()) fail("decomposition.clusters", "expected an array");
    for (std::size_t i = 0; i < clusters.size(); ++i) {
      const std::string where = "decomposition.clusters[" + std::to_string(i) + "]";
      if (!clusters[i].is_array()) fail(where, "expected an array");
      std::vector<VarId> cluster;
      for (std::size_t k = 0; k < clusters[i].size(); ++k)
        cluster.push_back(lookup(d, clusters[i][k], where + "[" + std::to_string(k) + "]"));
      std::sort(cluster.begin(), cluster.end());
      cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
      t.clusters.push_back(std::move(cluster));
    }
    if (auto e = it->find("edges"); e != it->end()) {
      if (!e->is_array()) fail("decomposition.edges", "expected an array");
      for (std::size_t k = 0; k < e->size(); ++k) {
        const std::string where = "decomposition.edges[" + std::to_string(k) + "]";
        const json& edge = (*e)[k];
        if (!edge.is_array() || edge.size() != 2 || !edge[0].is_number_integer() || !edge[1].is_number_integer())
          fail(where, "expected [i, j]");
        const int a = edge[0].get<int>(), b = edge[1].get<int>();
        if (a < 0 || b < 0 || a >= t.size() || b >= t.size()) fail(where, "node index out of range");
        t.edges.emplace_back(a, b);
      }
    }
    if (auto r = it->find("root"); r != it->end() && !r->is_null()) {
      if (!r->is_number_integer()) fail("decomposition.root", "expected an integer");
      const int root = r->get<int>();
      if (root < 0 || root >= t.size()) fail("decomposition.root", "node index out of range");
      try {
        t = root_and_order(t, root);
      } catch (const InvalidArgument& e) {
        fail("decomposition", e.what());
      }
    }
    out.decomposition = std::move(t);
  }
  return out;
}

DiagramDocument parse_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  return document_from_json(doc);
}

json diagram_to_json(const InfluenceDiagram& d) {
  json doc = json::object();
  json vars = json::array();
  for (const Variable& v : d.variables) {
    json jv = {{"id", v.name}, {"kind", std::string(to_string(v.kind))}};
    if (v.kind != VarKind::value) jv["cardinality"] = v.cardinality;
    if (!v.states.empty()) jv["states"] = v.states;
    vars.push_back(std::move(jv));
  }
  doc["variables"] = std::move(vars);

  auto arcs = d.arcs;
  std::sort(arcs.begin(), arcs.end());
  json ja = json::array();
  for (const auto& [from, to] : arcs) ja.push_back({d.var(from).name, d.var(to).name});
  doc["arcs"] = std::move(ja);

  auto tables = [&d](const std::map<VarId, Table>& m) {
    json out = json::object();
    for (const auto& [id, t] : m) {
      json parents = json::array();
      for (VarId p : t.parents) parents.push_back(d.var(p).name);
      out[d.var(id).name] = {{"parents", std::move(parents)}, {"table", t.values}};
    }
    return out;
  };
  doc["cpts"] = tables(d.cpts);
  doc["rewards"] = tables(d.rewards);
  return doc;
}

json decomposition_to_json(const InfluenceDiagram& d, const TreeDecomposition& t) {
  json clusters = json::array();
  for (const auto& c : t.clusters) {
    json jc = json::array();
    for (VarId v : c) jc.push_back(d.var(v).name);
    clusters.push_back(std::move(jc));
  }
  json edges = json::array();
  for (const auto& [a, b] : t.edges) edges.push_back({a, b});
  json out = {{"clusters", std::move(clusters)}, {"edges", std::move(edges)}, {"width", t.width()}};
  if (t.root) out["root"] = *t.root;
  return out;
}

json strategy_to_json(const InfluenceDiagram& d, const Strategy& s) {
  json out = json::object();
  for (const auto& [dec, p] : s.policies) {
    json parents = json::array();
    for (VarId q : p.parents) parents.push_back(d.var(q).name);
    out[d.var(dec).name] = {{"parents", std::move(parents)}, {"table", p.table}};
  }
  return out;
}

Strategy strategy_from_json(const InfluenceDiagram& d, const json& j) {
  if (!j.is_object()) fail("strategy", "expected an object");
  Strategy s;
  for (const auto& [name, body] : j.items()) {
    const std::string where = "strategy." + name;
    auto id = d.find(name);
    if (!id || d.var(*id).kind != VarKind::decision) fail(where, "not a decision variable");
    Policy p;
    p.decision = *id;
    const json& parents = require(body, "parents", where);
    if (!parents.is_array()) fail(where + ".parents", "expected an array");
    for (std::size_t k = 0; k < parents.size(); ++k)
      p.parents.push_back(lookup(d, parents[k], where + ".parents[" + std::to_string(k) + "]"));
    const json& table = require(body, "table", where);
    if (!table.is_array()) fail(where + ".table", "expected an array");
    for (std::size_t k = 0; k < table.size(); ++k)
      p.table.push_back(as_number(table[k], where + ".table[" + std::to_string(k) + "]"));
    s.policies[*id] = std::move(p);
  }
  return s;
}

json report_to_json(const ValidationReport& report) {
  json out = json::array();
  for (const auto& v : report) out.push_back({{"variable", v.variable}, {"message", v.message}});
  return out;
}

json stats_to_json(const InfluenceDiagram& d, const SolverStats& stats) {
  json nodes = json::array();
  for (const auto& n : stats.nodes) {
    json cluster = json::array();
    for (VarId v : n.cluster) cluster.push_back(d.var(v).name);
    json jn = {{"node", n.node}, {"cluster", std::move(cluster)}, {"K", n.k_size},
               {"A", n.a_size},  {"B", n.b_size},                 {"C", n.c_size}};
    jn["t"] = n.smallest_positive ? json(*n.smallest_positive) : json(nullptr);
    jn["bound"] = std::isfinite(n.bound) ? json(n.bound) : json(nullptr);
    nodes.push_back(std::move(jn));
  }
  return nodes;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

bool same_structure(const InfluenceDiagram& a, const InfluenceDiagram& b) {
  if (a.size() != b.size()) return false;
  for (VarId i = 0; i < a.size(); ++i) {
    const Variable& x = a.var(i);
    const Variable& y = b.var(i);
    if (x.name != y.name || x.kind != y.kind || x.cardinality != y.cardinality || x.states != y.states) return false;
  }
  auto arcs_a = a.arcs, arcs_b = b.arcs;
  std::sort(arcs_a.begin(), arcs_a.end());
  std::sort(arcs_b.begin(), arcs_b.end());
  if (arcs_a != arcs_b) return false;
  auto same_tables = [](const std::map<VarId, Table>& x, const std::map<VarId, Table>& y) {
    if (x.size() != y.size()) return false;
    for (auto i = x.begin(), j = y.begin(); i != x.end(); ++i, ++j)
      if (i->first != j->first || i->second.parents != j->second.parents || i->second.values != j->second.values)
        return false;
    return true;
  };
  return same_tables(a.cpts, b.cpts) && same_tables(a.rewards, b.rewards);
}

}  // namespace limid
