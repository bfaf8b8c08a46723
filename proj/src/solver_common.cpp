#include "solver_common.hpp"

namespace lazybn::detail {

VarSet domain_of(std::span<const FactorPtr> factors) {
  VarSet dom;
  for (const auto& f : factors) dom = set_union(dom, f->domain());
  return dom;
}

std::vector<int> cardinality_table(std::span<const FactorPtr> factors) {
  const VarSet dom = domain_of(factors);
  std::vector<int> cards(dom.empty() ? 0 : static_cast<std::size_t>(dom.back()) + 1, 0);
  for (const auto& f : factors) {
    for (std::size_t k = 0; k < f->domain().size(); ++k) cards[f->domain()[k]] = f->cards()[k];
  }
  return cards;
}

std::vector<VarId> elimination_order(std::span<const FactorPtr> factors, const VarSet& target) {
  const DecomposedPotential pot(std::vector<FactorPtr>(factors.begin(), factors.end()));
  const VarSet eliminate = set_difference(pot.domain(), target);
  if (eliminate.empty()) return {};
  const UndirectedGraph moral = moralize(domain_graph(pot));
  return min_fill_weight_order(moral, eliminate, cardinality_table(factors)).order;
}

}  // namespace lazybn::detail
