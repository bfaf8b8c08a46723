#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "lazybn/backends.hpp"
#include "lazybn/graphs.hpp"
#include "lazybn/model.hpp"
#include "lazybn/potential.hpp"
#include "lazybn/query.hpp"

namespace lazybn {

struct Metrics {
  /// Largest s(phi) over every table materialized by the session.
  std::uint64_t max_potential_size = 0;
  std::uint64_t messages_computed = 0;
  std::uint64_t tables_multiplied = 0;
  std::uint64_t tables_created = 0;
  std::chrono::nanoseconds elapsed{0};
};

struct SessionOptions {
  BackendKind backend = BackendKind::VE;
  bool minimalize_tails = false;
  int root = 0;
  /// Self-checks: AR structure, message domains, constancy of dropped tail variables.
  bool check_invariants = true;
};

/// Factors of `factors` connected to `separator` through shared variables.
DecomposedPotential relevant_potentials(const DecomposedPotential& factors, const VarSet& separator);

/// Drops factors whose head variables are all barren w.r.t. (factors, target, evidence).
DecomposedPotential remove_barren(const DecomposedPotential& factors, const VarSet& target, const Evidence& evidence);

/// Removes every tail variable that is d-separated from all head variables
/// given the rest of the tail and the observed variables, slicing it at
/// state 0. With `check`, the slices along a dropped variable must agree
/// within 1e-9 or InvariantViolation is thrown.
DecomposedPotential minimalize_tails(const DecomposedPotential& message, const DirectedGraph& dag,
                                     const Evidence& evidence, bool check = true);

/// Constancy checks run by minimalize_tails on this thread so far.
std::uint64_t tail_constancy_checks();

/// Lazy propagation over a junction tree. The network and tree must outlive
/// the session. Not thread-safe; distinct sessions may share net and tree.
class PropagationSession {
 public:
  PropagationSession(const BayesianNetwork& net, const JunctionTree& tree, SessionOptions options = {});

  const SessionOptions& options() const { return options_; }
  const BayesianNetwork& network() const { return *net_; }
  const JunctionTree& tree() const { return *tree_; }
  const Evidence& evidence() const { return evidence_; }

  /// Instantiates every clique factor. Allowed once, before propagation.
  void enter_evidence(const Evidence& e);

  /// Collect toward the root, then distribute away from it.
  void propagate();
  bool propagated() const { return propagated_; }

  /// Computes and stores the message from -> to. Every other message into
  /// `from` must already be present.
  const DecomposedPotential& compute_message(int from, int to);
  const std::optional<DecomposedPotential>& message(int from, int to) const;

  const DecomposedPotential& clique_potential(int clique) const { return clique_potentials_.at(clique); }
  /// The clique's own potential combined with all messages it has received.
  DecomposedPotential clique_marginal(int clique) const;

  /// P(x | evidence). Requires propagate(); x must not be observed.
  std::vector<double> posterior(VarId x);
  /// Normalized marginal over `vars`, which must lie in a single clique.
  Potential joint_posterior(const VarSet& vars);
  /// P(evidence); 0 when the evidence is impossible.
  double probability_of_evidence();
  /// Product of the scalars left by fully instantiated factors.
  double evidence_constant() const { return evidence_constant_; }

  const Metrics& metrics() const { return metrics_; }

 private:
  int edge_slot(int from, int to) const;
  DecomposedPotential incoming(int clique, int except) const;
  DecomposedPotential solve_query(DecomposedPotential factors, const VarSet& target);
  const DecomposedPotential& compute_message_impl(int from, int to, bool collect);
  void absorb(TableStats& stats, std::chrono::steady_clock::time_point start);

  const BayesianNetwork* net_;
  const JunctionTree* tree_;
  SessionOptions options_;
  DirectedGraph dag_;
  std::vector<int> topo_rank_;
  std::vector<DecomposedPotential> clique_potentials_;
  /// Per tree edge: [a -> b, b -> a].
  std::vector<std::array<std::optional<DecomposedPotential>, 2>> mailboxes_;
  Evidence evidence_;
  bool evidence_entered_ = false;
  bool propagated_ = false;
  double evidence_constant_ = 1.0;
  /// Factors disconnected from the separator during collect; they carry
  /// probability mass that the root never sees.
  std::vector<FactorPtr> dropped_;
  std::optional<double> probability_of_evidence_;
  Metrics metrics_;
};

/// Builds a session whose cliques hold their assigned CPTs.
PropagationSession initialize(const BayesianNetwork& net, const JunctionTree& tree, SessionOptions options = {});

}  // namespace lazybn
