#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lazybn/potential.hpp"

namespace lazybn {

struct Variable {
  VarId id = 0;
  std::string name;
  std::vector<std::string> states;

  int cardinality() const { return static_cast<int>(states.size()); }
  /// Index of `state`, or -1.
  int state_index(std::string_view state) const;

  friend bool operator==(const Variable&, const Variable&) = default;
};

/// CPT as it appears in a network file: parents in listed order, child fastest.
struct CptSpec {
  VarId child = 0;
  std::vector<VarId> parents;
  std::vector<double> table;
};

/// Discrete Bayesian network. Immutable once constructed.
class BayesianNetwork {
 public:
  /// Validates every invariant; throws ValidationError naming the offending variable.
  BayesianNetwork(std::vector<Variable> variables, std::vector<CptSpec> cpts);

  std::size_t size() const { return variables_.size(); }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(VarId id) const { return variables_.at(id); }
  int cardinality(VarId id) const { return variables_.at(id).cardinality(); }
  std::vector<int> cardinalities(const VarSet& vars) const;
  /// Throws ValidationError for unknown names.
  VarId id_of(std::string_view name) const;

  /// Parents in the order they were listed.
  const std::vector<VarId>& parents(VarId id) const { return parents_.at(id); }
  const std::vector<VarId>& children(VarId id) const { return children_.at(id); }
  /// fa(X) as a sorted set.
  VarSet family(VarId id) const;
  /// P(X | pa(X)) in canonical layout, head {X}.
  const FactorPtr& cpt(VarId id) const { return cpts_.at(id); }
  /// CPT of `id` re-laid-out in file order.
  CptSpec cpt_spec(VarId id) const;
  /// Parents precede children; ties go to the smaller id.
  const std::vector<VarId>& topological_order() const { return topo_; }

  friend bool operator==(const BayesianNetwork& a, const BayesianNetwork& b);

 private:
  std::vector<Variable> variables_;
  std::vector<std::vector<VarId>> parents_;
  std::vector<std::vector<VarId>> children_;
  std::vector<FactorPtr> cpts_;
  std::vector<VarId> topo_;
};

/// Tolerance on per-configuration CPT sums.
inline constexpr double kCptTolerance = 1e-6;

BayesianNetwork parse_network(std::string_view json_text);
BayesianNetwork load_network(const std::filesystem::path& path);
std::string network_to_json(const BayesianNetwork& net);
void save_network(const BayesianNetwork& net, const std::filesystem::path& path);

/// Resolves "name=state" strings against `net`.
Evidence parse_evidence(const BayesianNetwork& net, const std::vector<std::string>& items);
/// Reads a `{"name": "state", ...}` document.
Evidence load_evidence(const BayesianNetwork& net, const std::filesystem::path& path);

}  // namespace lazybn
