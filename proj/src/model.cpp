#include "lazybn/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "lazybn/error.hpp"
#include "lazybn/graphs.hpp"

namespace lazybn {

using json = nlohmann::json;

int Variable::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == state) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::string var_label(const std::string& name) { return "variable '" + name + "'"; }

/// Maps each file-order index of a CPT to its canonical index.
std::vector<std::size_t> file_to_canonical(const std::vector<VarId>& file_order, const VarSet& domain,
                                           const std::vector<int>& domain_cards) {
  std::vector<std::size_t> canon_stride(domain.size(), 1);
  for (std::size_t k = domain.size(); k-- > 1;) canon_stride[k - 1] = canon_stride[k] * domain_cards[k];

  std::vector<int> cards(file_order.size());
  std::vector<std::size_t> stride(file_order.size());
  for (std::size_t k = 0; k < file_order.size(); ++k) {
    const auto pos = std::lower_bound(domain.begin(), domain.end(), file_order[k]) - domain.begin();
    cards[k] = domain_cards[pos];
    stride[k] = canon_stride[pos];
  }
  const std::size_t n = table_size(domain_cards);
  std::vector<std::size_t> map(n);
  std::vector<int> counter(file_order.size(), 0);
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    map[i] = offset;
    for (std::size_t k = file_order.size(); k-- > 0;) {
      offset += stride[k];
      if (++counter[k] < cards[k]) break;
      offset -= stride[k] * cards[k];
      counter[k] = 0;
    }
  }
  return map;
}

}  // namespace

BayesianNetwork::BayesianNetwork(std::vector<Variable> variables, std::vector<CptSpec> cpts)
    : variables_(std::move(variables)) {
  const std::size_t n = variables_.size();
  std::set<std::string> names;
  for (std::size_t i = 0; i < n; ++i) {
    Variable& v = variables_[i];
    v.id = static_cast<VarId>(i);
    if (v.name.empty()) throw ValidationError("variable #" + std::to_string(i) + " has an empty name");
    if (!names.insert(v.name).second) throw ValidationError(var_label(v.name) + ": duplicate name");
    if (v.cardinality() < 2) throw ValidationError(var_label(v.name) + ": needs at least two states");
  }

  parents_.assign(n, {});
  children_.assign(n, {});
  cpts_.assign(n, nullptr);
  std::vector<bool> seen(n, false);
  std::vector<const CptSpec*> by_child(n, nullptr);
  for (const CptSpec& c : cpts) {
    if (c.child < 0 || static_cast<std::size_t>(c.child) >= n)
      throw ValidationError("CPT for unknown child index " + std::to_string(c.child));
    const Variable& v = variables_[c.child];
    if (seen[c.child]) throw ValidationError(var_label(v.name) + ": more than one CPT");
    seen[c.child] = true;
    std::set<VarId> distinct;
    for (VarId p : c.parents) {
      if (p < 0 || static_cast<std::size_t>(p) >= n)
        throw ValidationError(var_label(v.name) + ": unknown parent index " + std::to_string(p));
      if (p == c.child) throw ValidationError(var_label(v.name) + ": is its own parent");
      if (!distinct.insert(p).second) throw ValidationError(var_label(v.name) + ": repeated parent");
    }
    parents_[c.child] = c.parents;
    by_child[c.child] = &c;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) throw ValidationError(var_label(variables_[i].name) + ": missing CPT");
  }

  try {
    topo_ = topological_sort(parents_);
  } catch (const StructuralError&) {
    // report a variable that is still unsorted, by name
    std::vector<int> indegree(n, 0);
    for (std::size_t i = 0; i < n; ++i) indegree[i] = static_cast<int>(parents_[i].size());
    std::vector<VarId> ready;
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] == 0) ready.push_back(static_cast<VarId>(i));
    }
    std::vector<bool> done(n, false);
    while (!ready.empty()) {
      const VarId v = ready.back();
      ready.pop_back();
      done[v] = true;
      for (std::size_t i = 0; i < n; ++i) {
        for (VarId p : parents_[i]) {
          if (p == v && --indegree[i] == 0) ready.push_back(static_cast<VarId>(i));
        }
      }
    }
    std::size_t bad = 0;
    while (done[bad]) ++bad;
    throw ValidationError(var_label(variables_[bad].name) + ": lies on a directed cycle");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (VarId p : parents_[i]) children_[p].push_back(static_cast<VarId>(i));
  }
  for (auto& ch : children_) std::sort(ch.begin(), ch.end());

  for (std::size_t i = 0; i < n; ++i) {
    const CptSpec& c = *by_child[i];
    const Variable& v = variables_[i];
    std::vector<VarId> file_order = c.parents;
    file_order.push_back(static_cast<VarId>(i));
    const VarSet domain = make_set(file_order);
    const std::vector<int> cards = cardinalities(domain);
    const std::size_t expected = table_size(cards);
    if (c.table.size() != expected)
      throw ValidationError(var_label(v.name) + ": CPT has " + std::to_string(c.table.size()) + " entries, expected " +
                            std::to_string(expected));
    const int child_card = v.cardinality();
    for (std::size_t block = 0; block < expected; block += child_card) {
      double sum = 0.0;
      for (int s = 0; s < child_card; ++s) {
        const double x = c.table[block + s];
        if (!std::isfinite(x) || x < 0.0) throw ValidationError(var_label(v.name) + ": CPT entry is negative or not finite");
        sum += x;
      }
      if (std::abs(sum - 1.0) > kCptTolerance) {
        std::ostringstream msg;
        msg << var_label(v.name) << ": CPT column " << block / child_card << " sums to " << sum;
        throw ValidationError(msg.str());
      }
    }
    const auto map = file_to_canonical(file_order, domain, cards);
    std::vector<double> table(expected);
    for (std::size_t k = 0; k < expected; ++k) table[map[k]] = c.table[k];
    VarSet tail = make_set(c.parents);
    cpts_[i] = make_factor(Potential({static_cast<VarId>(i)}, std::move(tail), cards, std::move(table)));
  }
}

std::vector<int> BayesianNetwork::cardinalities(const VarSet& vars) const {
  std::vector<int> out;
  out.reserve(vars.size());
  for (VarId v : vars) out.push_back(cardinality(v));
  return out;
}

VarId BayesianNetwork::id_of(std::string_view name) const {
  for (const auto& v : variables_) {
    if (v.name == name) return v.id;
  }
  throw ValidationError("unknown variable '" + std::string(name) + "'");
}

VarSet BayesianNetwork::family(VarId id) const {
  std::vector<VarId> fa = parents(id);
  fa.push_back(id);
  return make_set(std::move(fa));
}

CptSpec BayesianNetwork::cpt_spec(VarId id) const {
  CptSpec spec;
  spec.child = id;
  spec.parents = parents(id);
  std::vector<VarId> file_order = spec.parents;
  file_order.push_back(id);
  const Potential& p = *cpt(id);
  const auto map = file_to_canonical(file_order, p.domain(), p.cards());
  spec.table.resize(p.size());
  for (std::size_t k = 0; k < p.size(); ++k) spec.table[k] = p.table()[map[k]];
  return spec;
}

bool operator==(const BayesianNetwork& a, const BayesianNetwork& b) {
  if (a.variables_ != b.variables_ || a.parents_ != b.parents_) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.cpts_[i]->table() != b.cpts_[i]->table()) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON I/O

BayesianNetwork parse_network(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("network: ") + e.what());
  }
  std::vector<Variable> vars;
  std::vector<CptSpec> cpts;
  try {
    if (!doc.is_object()) throw ParseError("network: top level must be an object");
    for (const auto& jv : doc.at("variables")) {
      Variable v;
      v.name = jv.at("name").get<std::string>();
      v.states = jv.at("states").get<std::vector<std::string>>();
      vars.push_back(std::move(v));
    }
    for (const auto& jc : doc.at("cpts")) {
      CptSpec c;
      c.child = jc.at("child").get<VarId>();
      c.parents = jc.at("parents").get<std::vector<VarId>>();
      c.table = jc.at("table").get<std::vector<double>>();
      cpts.push_back(std::move(c));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("network: ") + e.what());
  }
  return BayesianNetwork(std::move(vars), std::move(cpts));
}

BayesianNetwork load_network(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_network(buf.str());
}

std::string network_to_json(const BayesianNetwork& net) {
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : net.variables()) doc["variables"].push_back({{"name", v.name}, {"states", v.states}});
  doc["cpts"] = json::array();
  for (std::size_t i = 0; i < net.size(); ++i) {
    CptSpec c = net.cpt_spec(static_cast<VarId>(i));
    doc["cpts"].push_back({{"child", c.child}, {"parents", c.parents}, {"table", c.table}});
  }
  return doc.dump(1) + "\n";
}

void save_network(const BayesianNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << network_to_json(net);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

namespace {

void assign(const BayesianNetwork& net, Evidence& e, std::string_view name, std::string_view state) {
  const VarId id = net.id_of(name);
  const int s = net.variable(id).state_index(state);
  if (s < 0) throw ValidationError("unknown state '" + std::string(state) + "' of variable '" + std::string(name) + "'");
  if (e.contains(id)) throw ValidationError("duplicate evidence for variable '" + std::string(name) + "'");
  e.set(id, s);
}

}  // namespace

Evidence parse_evidence(const BayesianNetwork& net, const std::vector<std::string>& items) {
  Evidence e;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("evidence '" + item + "' is not of the form name=state");
    assign(net, e, std::string_view(item).substr(0, eq), std::string_view(item).substr(eq + 1));
  }
  return e;
}

Evidence load_evidence(const BayesianNetwork& net, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("evidence: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("evidence: top level must be an object");
  Evidence e;
  for (const auto& [name, state] : doc.items()) {
    if (!state.is_string()) throw ParseError("evidence: state of '" + name + "' must be a string");
    assign(net, e, name, state.get<std::string>());
  }
  return e;
}

}  // namespace lazybn
