#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "lazybn/bench.hpp"
#include "lazybn/cli.hpp"
#include "lazybn/engine.hpp"
#include "lazybn/error.hpp"
#include "lazybn/model.hpp"
#include "lazybn/oracle.hpp"

namespace py = pybind11;
using namespace lazybn;

namespace {

using NamedEvidence = std::map<std::string, std::string>;
using Posteriors = std::map<std::string, std::vector<double>>;

Evidence to_evidence(const BayesianNetwork& net, const NamedEvidence& named) {
  std::vector<std::string> items;
  for (const auto& [var, state] : named) items.push_back(var + "=" + state);
  return parse_evidence(net, items);
}

NamedEvidence to_named(const BayesianNetwork& net, const Evidence& e) {
  NamedEvidence out;
  for (const auto& [v, s] : e) out[net.variable(v).name] = net.variable(v).states.at(s);
  return out;
}

std::vector<double> point_mass(const BayesianNetwork& net, VarId v, int state) {
  std::vector<double> p(net.cardinality(v), 0.0);
  p[state] = 1.0;
  return p;
}

py::dict infer(const BayesianNetwork& net, const NamedEvidence& named, const std::string& backend, bool minimalize,
               int root, bool check_invariants) {
  const Evidence e = to_evidence(net, named);
  const JunctionTree tree = build_junction_tree(net);
  SessionOptions o;
  o.backend = parse_backend(backend);
  o.minimalize_tails = minimalize;
  o.root = root;
  o.check_invariants = check_invariants;
  Posteriors post;
  double pe = 0.0;
  std::uint64_t max_size = 0;
  {
    py::gil_scoped_release nogil;
    PropagationSession s(net, tree, o);
    s.enter_evidence(e);
    s.propagate();
    pe = s.probability_of_evidence();
    if (pe <= 0.0) throw ImpossibleEvidence("evidence has zero probability");
    for (VarId v = 0; v < static_cast<VarId>(net.size()); ++v) {
      post[net.variable(v).name] = e.contains(v) ? point_mass(net, v, e.state(v)) : s.posterior(v);
    }
    max_size = s.metrics().max_potential_size;
  }
  py::dict out;
  out["posteriors"] = post;
  out["probability_of_evidence"] = pe;
  out["max_potential_size"] = max_size;
  return out;
}

Posteriors oracle(const BayesianNetwork& net, const NamedEvidence& named) {
  const auto all = oracle_posteriors(net, to_evidence(net, named));
  Posteriors out;
  for (VarId v = 0; v < static_cast<VarId>(net.size()); ++v) out[net.variable(v).name] = all[v];
  return out;
}

py::dict tree_summary(const BayesianNetwork& net) {
  const JunctionTree t = build_junction_tree(net);
  std::vector<std::vector<std::string>> cliques;
  for (const auto& c : t.cliques) {
    auto& names = cliques.emplace_back();
    for (VarId v : c) names.push_back(net.variable(v).name);
  }
  std::vector<std::pair<int, int>> edges;
  for (const auto& s : t.edges) edges.emplace_back(s.a, s.b);
  py::dict out;
  out["cliques"] = cliques;
  out["edges"] = edges;
  out["max_clique_size"] = t.max_clique_size();
  out["total_clique_size"] = t.total_clique_size();
  out["summary"] = summary_line(net, t);
  return out;
}

}  // namespace

PYBIND11_MODULE(_lazybn, m) {
  m.doc() = "Lazy propagation in Bayesian networks";

  auto base = py::register_exception<Error>(m, "LazyBNError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<ImpossibleEvidence>(m, "ImpossibleEvidence", base.ptr());
  py::register_exception<StructuralError>(m, "StructuralError", base.ptr());
  py::register_exception<InvariantViolation>(m, "InvariantViolation", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<BayesianNetwork>(m, "Network")
      .def("__len__", &BayesianNetwork::size)
      .def_property_readonly("names",
                             [](const BayesianNetwork& n) {
                               std::vector<std::string> out;
                               for (const auto& v : n.variables()) out.push_back(v.name);
                               return out;
                             })
      .def("states", [](const BayesianNetwork& n, const std::string& name) { return n.variable(n.id_of(name)).states; })
      .def("parents",
           [](const BayesianNetwork& n, const std::string& name) {
             std::vector<std::string> out;
             for (VarId p : n.parents(n.id_of(name))) out.push_back(n.variable(p).name);
             return out;
           })
      .def("to_json", &network_to_json)
      .def("save", [](const BayesianNetwork& n, const std::filesystem::path& p) { save_network(n, p); })
      .def("__eq__", [](const BayesianNetwork& a, const BayesianNetwork& b) { return a == b; });

  m.def("parse_network", [](const std::string& text) { return parse_network(text); }, py::arg("text"));
  m.def("load_network", [](const std::filesystem::path& p) { return load_network(p); }, py::arg("path"));
  m.def(
      "gen_network",
      [](int n, int max_parents, int min_states, int max_states, std::uint64_t seed) {
        GeneratorParams p;
        p.num_variables = n;
        p.max_parents = max_parents;
        p.min_states = min_states;
        p.max_states = max_states;
        p.seed = seed;
        return gen_network(p);
      },
      py::arg("num_variables") = 50, py::arg("max_parents") = 5, py::arg("min_states") = 2, py::arg("max_states") = 5,
      py::arg("seed") = 1);
  m.def(
      "gen_evidence",
      [](const BayesianNetwork& net, int k, std::uint64_t seed) { return to_named(net, gen_evidence(net, k, seed)); },
      py::arg("network"), py::arg("k"), py::arg("seed"));
  m.def("junction_tree", &tree_summary, py::arg("network"));
  m.def("infer", &infer, py::arg("network"), py::arg("evidence") = NamedEvidence{}, py::arg("backend") = "ve",
        py::arg("minimalize") = false, py::arg("root") = 0, py::arg("check_invariants") = false);
  m.def("oracle_posteriors", &oracle, py::arg("network"), py::arg("evidence") = NamedEvidence{});
  m.def(
      "oracle_probability_of_evidence",
      [](const BayesianNetwork& net, const NamedEvidence& e) {
        return oracle_probability_of_evidence(net, to_evidence(net, e));
      },
      py::arg("network"), py::arg("evidence") = NamedEvidence{});
  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
