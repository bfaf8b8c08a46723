#pragma once

#include <cstdint>
#include <vector>

#include "lazybn/model.hpp"

namespace lazybn {

/// Full joint over every variable, ids ascending, last variable fastest.
struct JointTable {
  VarSet domain;
  std::vector<int> cards;
  std::vector<double> table;
};

inline constexpr std::uint64_t kOracleMaxEntries = std::uint64_t{1} << 24;

/// Throws NumericError when the joint would exceed kOracleMaxEntries.
JointTable joint_table(const BayesianNetwork& net);

/// Marginal over `vars` (sorted) of the joint restricted to `e`, unnormalized.
std::vector<double> oracle_restricted_marginal(const BayesianNetwork& net, const Evidence& e, const VarSet& vars);

/// P(x | e). Throws ImpossibleEvidence on zero mass, DomainError if x is observed.
std::vector<double> oracle_posterior(const BayesianNetwork& net, const Evidence& e, VarId x);

/// P(x | e) for every variable in one pass; observed variables get point masses.
/// Throws ImpossibleEvidence on zero mass.
std::vector<std::vector<double>> oracle_posteriors(const BayesianNetwork& net, const Evidence& e);

/// P(e), possibly 0.
double oracle_probability_of_evidence(const BayesianNetwork& net, const Evidence& e);

}  // namespace lazybn
