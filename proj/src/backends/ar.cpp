#include <algorithm>
#include <map>
#include <queue>
#include <string>

#include "../solver_common.hpp"
#include "lazybn/backends.hpp"
#include "lazybn/error.hpp"
#include "lazybn/graphs.hpp"

namespace lazybn {

ReversedArc reverse_arc(const Potential& phi_y, const Potential& phi_x, bool compute_parent) {
  if (phi_y.head().size() != 1 || phi_x.head().size() != 1)
    throw StructuralError("reverse_arc: both potentials need a single head variable");
  const VarId y = phi_y.head().front();
  const VarId x = phi_x.head().front();
  if (!set_contains(phi_x.tail(), y)) throw StructuralError("reverse_arc: no arc from the parent to the child");
  if (phi_y.contains(x)) throw StructuralError("reverse_arc: child already in the parent's domain");

  const Potential joint = multiply(phi_y, phi_x);
  Potential child = sum_out(joint, {y});
  if (!compute_parent) return {std::move(child), std::nullopt};
  Potential parent = divide(joint, child).relabel({y});
  return {std::move(child), std::move(parent)};
}

namespace {

thread_local std::uint64_t structure_checks = 0;

void check_structure(const std::vector<FactorPtr>& live) {
  ++structure_checks;
  std::map<VarId, int> heads;
  for (const auto& f : live) {
    if (f->head().size() > 1) throw InvariantViolation("ar: factor with more than one head variable");
    if (f->head().size() == 1 && ++heads[f->head().front()] > 1)
      throw InvariantViolation("ar: two factors share head variable " + std::to_string(f->head().front()));
  }
  if (!domain_graph(DecomposedPotential(live)).directed_acyclic())
    throw InvariantViolation("ar: factor graph has a directed cycle");
}

/// Rank of every head variable in a topological order of the current factor
/// graph; ties follow the original network order when known.
std::map<VarId, int> current_topological_rank(const std::vector<FactorPtr>& live, std::span<const int> topo_rank) {
  std::map<VarId, std::vector<VarId>> children;
  std::map<VarId, int> indegree;
  for (const auto& f : live) {
    for (VarId v : f->domain()) indegree.emplace(v, 0);
  }
  for (const auto& f : live) {
    if (f->head().empty()) continue;
    const VarId h = f->head().front();
    for (VarId t : f->tail()) {
      children[t].push_back(h);
      ++indegree[h];
    }
  }
  auto priority = [&](VarId v) {
    return std::pair<int, VarId>(static_cast<std::size_t>(v) < topo_rank.size() ? topo_rank[v] : v, v);
  };
  using Item = std::pair<std::pair<int, VarId>, VarId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> ready;
  for (const auto& [v, d] : indegree) {
    if (d == 0) ready.push({priority(v), v});
  }
  std::map<VarId, int> rank;
  while (!ready.empty()) {
    const VarId v = ready.top().second;
    ready.pop();
    rank[v] = static_cast<int>(rank.size());
    for (VarId c : children[v]) {
      if (--indegree[c] == 0) ready.push({priority(c), c});
    }
  }
  if (rank.size() != indegree.size()) throw StructuralError("ar: factor graph has a directed cycle");
  return rank;
}

}  // namespace

DecomposedPotential ar_solve(const Query& q, const SolveOptions& opts) {
  if (opts.check_invariants) check_query(q);
  std::vector<FactorPtr> live(q.potentials.begin(), q.potentials.end());
  for (const auto& f : live) {
    if (f->head().size() > 1) throw StructuralError("ar: input factor with more than one head variable");
  }
  const std::vector<VarId> order = detail::elimination_order(live, q.target);
  for (VarId y : order) {
    int holders = 0;
    for (const auto& f : live) holders += (f->head().size() == 1 && f->head().front() == y) ? 1 : 0;
    if (holders != 1)
      throw StructuralError("ar: variable " + std::to_string(y) + " has " + std::to_string(holders) +
                            " factors with it as head, expected one");
  }
  if (opts.check_invariants) check_structure(live);

  auto find_head = [&](VarId v) {
    return std::find_if(live.begin(), live.end(),
                        [v](const FactorPtr& f) { return f->head().size() == 1 && f->head().front() == v; });
  };

  for (VarId y : order) {
    const auto rank = current_topological_rank(live, opts.topo_rank);
    std::vector<VarId> children;
    bool has_likelihood = false;
    for (const auto& f : live) {
      if (!f->contains(y)) continue;
      if (f->head().empty()) {
        has_likelihood = true;
      } else if (f->head().front() != y) {
        children.push_back(f->head().front());
      }
    }
    std::sort(children.begin(), children.end(), [&](VarId a, VarId b) { return rank.at(a) < rank.at(b); });

    bool parent_live = true;
    for (std::size_t k = 0; k < children.size(); ++k) {
      const bool keep_parent = has_likelihood || k + 1 < children.size();
      auto py = find_head(y);
      auto px = find_head(children[k]);
      ReversedArc rev = reverse_arc(**py, **px, keep_parent);
      *px = make_factor(std::move(rev.child));
      if (rev.parent) {
        *py = make_factor(std::move(*rev.parent));
      } else {
        live.erase(py);
        parent_live = false;
      }
      if (opts.check_invariants) check_structure(live);
    }

    if (!parent_live) continue;
    // Y is now childless. Alone it sums to one; with likelihoods attached it
    // folds into a new likelihood over the remaining variables.
    std::vector<FactorPtr> bucket;
    std::vector<FactorPtr> rest;
    for (auto& f : live) (f->contains(y) ? bucket : rest).push_back(std::move(f));
    if (has_likelihood) rest.push_back(make_factor(sum_out(contract(bucket), {y})));
    live = std::move(rest);
    if (opts.check_invariants) check_structure(live);
  }
  return DecomposedPotential(std::move(live));
}

std::uint64_t ar_structure_checks() { return structure_checks; }

}  // namespace lazybn
