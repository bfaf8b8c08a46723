#include "lazybn/oracle.hpp"

#include <string>

#include "lazybn/error.hpp"

namespace lazybn {

namespace {

// Enumerates every configuration, ids ascending with the last one fastest,
// calling f(config, joint probability).
template <class F>
void enumerate(const BayesianNetwork& net, F&& f) {
  const std::size_t n = net.size();
  std::uint64_t total = 1;
  for (std::size_t v = 0; v < n; ++v) {
    total *= static_cast<std::uint64_t>(net.cardinality(static_cast<VarId>(v)));
    if (total > kOracleMaxEntries)
      throw NumericError("oracle: joint table exceeds " + std::to_string(kOracleMaxEntries) + " entries");
  }
  std::vector<CptSpec> specs;
  specs.reserve(n);
  for (std::size_t v = 0; v < n; ++v) specs.push_back(net.cpt_spec(static_cast<VarId>(v)));

  std::vector<int> config(n, 0);
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    double p = 1.0;
    for (const auto& s : specs) {
      std::size_t offset = 0;
      for (VarId par : s.parents) offset = offset * net.cardinality(par) + config[par];
      offset = offset * net.cardinality(s.child) + config[s.child];
      p *= s.table[offset];
    }
    f(config, p);
    for (std::size_t k = n; k-- > 0;) {
      if (++config[k] < net.cardinality(static_cast<VarId>(k))) break;
      config[k] = 0;
    }
  }
}

bool consistent(const std::vector<int>& config, const Evidence& e) {
  for (const auto& [v, s] : e) {
    if (config[v] != s) return false;
  }
  return true;
}

}  // namespace

JointTable joint_table(const BayesianNetwork& net) {
  JointTable out;
  for (std::size_t v = 0; v < net.size(); ++v) {
    out.domain.push_back(static_cast<VarId>(v));
    out.cards.push_back(net.cardinality(static_cast<VarId>(v)));
  }
  enumerate(net, [&](const std::vector<int>&, double p) { out.table.push_back(p); });
  return out;
}

std::vector<double> oracle_restricted_marginal(const BayesianNetwork& net, const Evidence& e, const VarSet& vars) {
  for (const auto& [v, s] : e) {
    if (v < 0 || static_cast<std::size_t>(v) >= net.size() || s < 0 || s >= net.cardinality(v))
      throw ValidationError("oracle: evidence out of range");
  }
  std::size_t size = 1;
  for (VarId v : vars) size *= static_cast<std::size_t>(net.cardinality(v));
  std::vector<double> out(size, 0.0);
  enumerate(net, [&](const std::vector<int>& config, double p) {
    if (!consistent(config, e)) return;
    std::size_t offset = 0;
    for (VarId v : vars) offset = offset * net.cardinality(v) + config[v];
    out[offset] += p;
  });
  return out;
}

std::vector<double> oracle_posterior(const BayesianNetwork& net, const Evidence& e, VarId x) {
  if (x < 0 || static_cast<std::size_t>(x) >= net.size()) throw DomainError("oracle: unknown variable");
  if (e.contains(x)) throw DomainError("oracle: posterior of an observed variable");
  std::vector<double> m = oracle_restricted_marginal(net, e, {x});
  double total = 0.0;
  for (double p : m) total += p;
  if (!(total > 0.0)) throw ImpossibleEvidence("evidence has zero probability");
  for (double& p : m) p /= total;
  return m;
}

std::vector<std::vector<double>> oracle_posteriors(const BayesianNetwork& net, const Evidence& e) {
  for (const auto& [v, s] : e) {
    if (v < 0 || static_cast<std::size_t>(v) >= net.size() || s < 0 || s >= net.cardinality(v))
      throw ValidationError("oracle: evidence out of range");
  }
  std::vector<std::vector<double>> out(net.size());
  for (std::size_t v = 0; v < net.size(); ++v) out[v].assign(net.cardinality(static_cast<VarId>(v)), 0.0);
  double total = 0.0;
  enumerate(net, [&](const std::vector<int>& config, double p) {
    if (!consistent(config, e)) return;
    total += p;
    for (std::size_t v = 0; v < config.size(); ++v) out[v][config[v]] += p;
  });
  if (!(total > 0.0)) throw ImpossibleEvidence("evidence has zero probability");
  for (auto& dist : out) {
    for (double& p : dist) p /= total;
  }
  return out;
}

double oracle_probability_of_evidence(const BayesianNetwork& net, const Evidence& e) {
  const std::vector<double> m = oracle_restricted_marginal(net, e, {});
  return m[0];
}

}  // namespace lazybn
