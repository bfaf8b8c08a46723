#include <algorithm>

#include "../solver_common.hpp"
#include "lazybn/backends.hpp"
#include "lazybn/error.hpp"

namespace lazybn {

DecomposedPotential ve_solve(const Query& q, const SolveOptions& opts) {
  if (opts.check_invariants) check_query(q);
  std::vector<FactorPtr> live(q.potentials.begin(), q.potentials.end());

  for (VarId y : detail::elimination_order(live, q.target)) {
    std::vector<FactorPtr> bucket;
    std::vector<FactorPtr> rest;
    for (auto& f : live) (f->contains(y) ? bucket : rest).push_back(std::move(f));
    if (bucket.empty()) {
      live = std::move(rest);
      continue;
    }
    rest.push_back(make_factor(sum_out(contract(bucket), {y})));
    live = std::move(rest);
  }
  return DecomposedPotential(std::move(live));
}

DecomposedPotential solve(BackendKind kind, const Query& q, const SolveOptions& opts) {
  switch (kind) {
    case BackendKind::VE:
      return ve_solve(q, opts);
    case BackendKind::SPI:
      return spi_solve(q, opts);
    case BackendKind::AR:
      return ar_solve(q, opts);
  }
  throw ValidationError("unknown backend");
}

}  // namespace lazybn
