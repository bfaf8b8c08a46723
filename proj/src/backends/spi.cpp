#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "../solver_common.hpp"
#include "lazybn/backends.hpp"
#include "lazybn/error.hpp"

namespace lazybn {

std::vector<std::vector<FactorPtr>> identify_source_potentials(std::span<const FactorPtr> factors, const VarSet& target) {
  const std::size_t m = factors.size();
  std::vector<std::size_t> root(m);
  std::iota(root.begin(), root.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (root[x] != x) x = root[x] = root[root[x]];
    return x;
  };
  std::map<VarId, std::size_t> first_holder;
  for (std::size_t i = 0; i < m; ++i) {
    for (VarId v : factors[i]->domain()) {
      if (set_contains(target, v)) continue;
      auto [it, fresh] = first_holder.emplace(v, i);
      if (!fresh) {
        const std::size_t a = find(it->second);
        const std::size_t b = find(i);
        if (a != b) root[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::vector<FactorPtr>> groups;
  std::map<std::size_t, std::size_t> group_of_root;
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t r = find(i);
    auto [it, fresh] = group_of_root.emplace(r, groups.size());
    if (fresh) groups.emplace_back();
    groups[it->second].push_back(factors[i]);
  }
  return groups;
}

namespace {

/// Non-target variables of `a` u `b` that no other live factor mentions.
VarSet eliminable_by_pair(const Potential& a, const Potential& b, const std::map<VarId, int>& occurrences,
                          const VarSet& target) {
  VarSet out;
  for (VarId v : set_union(a.domain(), b.domain())) {
    if (set_contains(target, v)) continue;
    const int in_pair = (a.contains(v) ? 1 : 0) + (b.contains(v) ? 1 : 0);
    if (occurrences.at(v) == in_pair) out.push_back(v);
  }
  return out;
}

std::map<VarId, int> count_occurrences(std::span<const SpiFactor> live) {
  std::map<VarId, int> occ;
  for (const auto& f : live) {
    for (VarId v : f.factor->domain()) ++occ[v];
  }
  return occ;
}

std::uint64_t result_size(const Potential& a, const Potential& b, const VarSet& summed) {
  std::uint64_t s = 1;
  for (VarId v : set_difference(set_union(a.domain(), b.domain()), summed)) {
    const auto c = static_cast<std::uint64_t>(a.contains(v) ? a.cardinality(v) : b.cardinality(v));
    s = s > std::numeric_limits<std::uint64_t>::max() / c ? std::numeric_limits<std::uint64_t>::max() : s * c;
  }
  return s;
}

}  // namespace

std::pair<std::size_t, std::size_t> spi_select_pair(std::span<const std::pair<std::size_t, std::size_t>> candidates,
                                                    std::span<const SpiFactor> live, const VarSet& target) {
  if (candidates.empty()) throw DomainError("spi_select_pair: empty candidate set");
  const auto occ = count_occurrences(live);
  using Key = std::tuple<std::uint64_t, VarSet, std::uint64_t, std::uint64_t>;
  std::optional<Key> best;
  std::pair<std::size_t, std::size_t> chosen{};
  for (const auto& [i, j] : candidates) {
    const Potential& a = *live[i].factor;
    const Potential& b = *live[j].factor;
    const VarSet summed = eliminable_by_pair(a, b, occ, target);
    Key key{result_size(a, b, summed), set_union(a.domain(), b.domain()), std::min(live[i].seq, live[j].seq),
            std::max(live[i].seq, live[j].seq)};
    if (!best || key < *best) {
      best = std::move(key);
      chosen = {i, j};
    }
  }
  return chosen;
}

DecomposedPotential spi_solve(const Query& q, const SolveOptions& opts) {
  if (opts.check_invariants) check_query(q);

  DecomposedPotential out;
  std::vector<FactorPtr> active;
  for (const auto& f : q.potentials) {
    if (set_includes(q.target, f->domain())) {
      out.add(f);  // idle
    } else {
      active.push_back(f);
    }
  }

  std::uint64_t next_seq = 0;
  for (auto& group : identify_source_potentials(active, q.target)) {
    std::vector<SpiFactor> live;
    for (auto& f : group) live.push_back({std::move(f), next_seq++});

    while (live.size() > 1) {
      std::vector<std::pair<std::size_t, std::size_t>> candidates;
      for (std::size_t i = 0; i < live.size(); ++i) {
        for (std::size_t j = i + 1; j < live.size(); ++j) {
          if (!set_disjoint(live[i].factor->domain(), live[j].factor->domain())) candidates.emplace_back(i, j);
        }
      }
      if (candidates.empty()) throw InvariantViolation("spi: source group split into unrelated factors");
      const auto [i, j] = spi_select_pair(candidates, live, q.target);
      const auto occ = count_occurrences(live);
      const Potential& a = *live[i].factor;
      const Potential& b = *live[j].factor;
      const VarSet summed = eliminable_by_pair(a, b, occ, q.target);
      FactorPtr merged = make_factor(sum_out(multiply(a, b), summed));
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(j));
      live.erase(live.begin() + static_cast<std::ptrdiff_t>(i));
      live.push_back({std::move(merged), next_seq++});
    }

    // A group that started as a single factor still owes its eliminations.
    FactorPtr last = std::move(live.front().factor);
    const VarSet leftover = set_difference(last->domain(), q.target);
    if (!leftover.empty()) last = make_factor(sum_out(*last, leftover));
    out.add(std::move(last));
  }
  return out;
}

}  // namespace lazybn
