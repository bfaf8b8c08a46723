#pragma once

#include <span>
#include <vector>

#include "lazybn/graphs.hpp"
#include "lazybn/potential.hpp"

namespace lazybn::detail {

/// Cardinality per variable id (0 where unknown), gathered from the factors.
std::vector<int> cardinality_table(std::span<const FactorPtr> factors);

/// Min-fill-weight order over the moral domain graph of `factors` for dom \ target.
std::vector<VarId> elimination_order(std::span<const FactorPtr> factors, const VarSet& target);

VarSet domain_of(std::span<const FactorPtr> factors);

}  // namespace lazybn::detail
