#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "lazybn/potential.hpp"
#include "lazybn/query.hpp"

namespace lazybn {

struct SolveOptions {
  /// Run the structural self-checks (AR single-head discipline, acyclicity).
  bool check_invariants = true;
  /// Position of each variable id in a topological order of the original
  /// network. AR breaks ties between reversible arcs with it; empty means by id.
  std::span<const int> topo_rank;
};

/// Variable elimination: each non-target variable is summed out of the
/// product of the factors mentioning it, in min-fill-weight order.
DecomposedPotential ve_solve(const Query& q, const SolveOptions& opts = {});

/// Symbolic probabilistic inference: factors are combined pairwise inside
/// each group of source potentials until one factor per group remains.
DecomposedPotential spi_solve(const Query& q, const SolveOptions& opts = {});

/// Arc reversal: every eliminated variable is first made childless by
/// reversing its outgoing arcs, then removed as barren.
DecomposedPotential ar_solve(const Query& q, const SolveOptions& opts = {});

/// Structure checks run by ar_solve on this thread so far.
std::uint64_t ar_structure_checks();

DecomposedPotential solve(BackendKind kind, const Query& q, const SolveOptions& opts = {});

/// Groups factors linked through shared non-target variables. Factors whose
/// domain lies inside `target` must already be removed. Groups come out
/// ordered by their first factor.
std::vector<std::vector<FactorPtr>> identify_source_potentials(std::span<const FactorPtr> factors, const VarSet& target);

/// A live SPI factor with its creation sequence number.
struct SpiFactor {
  FactorPtr factor;
  std::uint64_t seq = 0;
};

/// Picks the candidate pair (indices into `live`) whose combination, after
/// summing out every non-target variable found only in that pair, is
/// smallest. Ties go to the lexicographically smaller union domain, then to
/// the earlier-created pair.
std::pair<std::size_t, std::size_t> spi_select_pair(std::span<const std::pair<std::size_t, std::size_t>> candidates,
                                                    std::span<const SpiFactor> live, const VarSet& target);

struct ReversedArc {
  Potential child;                  ///< phi'(X | I, J, K)
  std::optional<Potential> parent;  ///< phi'(Y | X, I, J, K), absent when not requested
};

/// Reverses Y -> X where phi_y = phi(Y | I, J) and phi_x = phi(X | Y, J, K).
ReversedArc reverse_arc(const Potential& phi_y, const Potential& phi_x, bool compute_parent = true);

}  // namespace lazybn
