#include "lazybn/engine.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lazybn/error.hpp"

namespace lazybn {

// ---------------------------------------------------------------------------
// message helpers

DecomposedPotential relevant_potentials(const DecomposedPotential& factors, const VarSet& separator) {
  const auto& fs = factors.factors();
  std::vector<bool> taken(fs.size(), false);
  VarSet reached = separator;
  bool grew = true;
  bool first = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < fs.size(); ++i) {
      if (taken[i] || set_disjoint(fs[i]->domain(), reached)) continue;
      taken[i] = true;
      grew = true;
      if (!first) reached = set_union(reached, fs[i]->domain());
    }
    if (first) {
      // The seed is every factor meeting the separator; widen from there.
      for (std::size_t i = 0; i < fs.size(); ++i) {
        if (taken[i]) reached = set_union(reached, fs[i]->domain());
      }
      first = false;
    }
  }
  DecomposedPotential out;
  for (std::size_t i = 0; i < fs.size(); ++i) {
    if (taken[i]) out.add(fs[i]);
  }
  return out;
}

DecomposedPotential remove_barren(const DecomposedPotential& factors, const VarSet& target, const Evidence& evidence) {
  const VarSet barren = barren_variables(domain_graph(factors), target, evidence);
  if (barren.empty()) return factors;
  DecomposedPotential out;
  for (const auto& f : factors) {
    if (f->head().empty() || !set_includes(barren, f->head())) out.add(f);
  }
  return out;
}

namespace {

constexpr double kConstancyTolerance = 1e-9;

thread_local std::uint64_t constancy_checks = 0;

bool constant_along(const Potential& p, VarId v, double tol) {
  const std::size_t stride = p.stride(v);
  const auto card = static_cast<std::size_t>(p.cardinality(v));
  const auto& t = p.table();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if ((i / stride) % card != 0) continue;
    for (std::size_t s = 1; s < card; ++s) {
      if (std::abs(t[i + s * stride] - t[i]) > tol) return false;
    }
  }
  return true;
}

}  // namespace

DecomposedPotential minimalize_tails(const DecomposedPotential& message, const DirectedGraph& dag,
                                     const Evidence& evidence, bool check) {
  const VarSet observed = evidence.variables();
  DecomposedPotential out;
  for (const auto& f : message) {
    if (f->head().empty()) {
      out.add(f);
      continue;
    }
    FactorPtr cur = f;
    bool changed = true;
    while (changed) {
      changed = false;
      for (VarId t : cur->tail()) {
        VarSet given = set_union(set_difference(cur->tail(), {t}), observed);
        const std::vector<bool> reach = d_connected(dag, t, given);
        const bool independent =
            std::none_of(cur->head().begin(), cur->head().end(), [&](VarId h) { return reach[h]; });
        if (!independent) continue;
        if (check) ++constancy_checks;
        if (check && !constant_along(*cur, t, kConstancyTolerance))
          throw InvariantViolation("minimalize_tails: factor varies along d-separated variable " + std::to_string(t));
        Evidence slice;
        slice.set(t, 0);
        cur = make_factor(instantiate(*cur, slice));
        changed = true;
        break;
      }
    }
    out.add(std::move(cur));
  }
  return out;
}

std::uint64_t tail_constancy_checks() { return constancy_checks; }

// ---------------------------------------------------------------------------
// session

PropagationSession::PropagationSession(const BayesianNetwork& net, const JunctionTree& tree, SessionOptions options)
    : net_(&net), tree_(&tree), options_(options), dag_(DirectedGraph::of(net)) {
  if (tree.size() == 0) throw StructuralError("junction tree has no cliques");
  if (options_.root < 0 || static_cast<std::size_t>(options_.root) >= tree.size())
    throw DomainError("root clique " + std::to_string(options_.root) + " out of range");
  topo_rank_.assign(net.size(), 0);
  const auto& order = net.topological_order();
  for (std::size_t i = 0; i < order.size(); ++i) topo_rank_[order[i]] = static_cast<int>(i);

  clique_potentials_.resize(tree.size());
  for (std::size_t c = 0; c < tree.size(); ++c) {
    for (VarId v : tree.assigned[c]) clique_potentials_[c].add(net.cpt(v));
  }
  mailboxes_.resize(tree.edges.size());
}

PropagationSession initialize(const BayesianNetwork& net, const JunctionTree& tree, SessionOptions options) {
  return PropagationSession(net, tree, options);
}

void PropagationSession::absorb(TableStats& stats, std::chrono::steady_clock::time_point start) {
  metrics_.max_potential_size = std::max(metrics_.max_potential_size, stats.max_table_size);
  metrics_.tables_created += stats.tables_created;
  metrics_.tables_multiplied += stats.tables_multiplied;
  metrics_.elapsed += std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start);
  stats = {};
}

namespace {

/// Meters a block of session work and folds it into the metrics on exit, even on error.
template <class Fold>
class Metered {
 public:
  explicit Metered(Fold fold) : fold_(std::move(fold)), meter_(stats_), start_(std::chrono::steady_clock::now()) {}
  ~Metered() { fold_(stats_, start_); }
  Metered(const Metered&) = delete;
  Metered& operator=(const Metered&) = delete;

 private:
  Fold fold_;
  TableStats stats_;
  TableMeter meter_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

#define LAZYBN_METERED                                                                                         \
  auto fold_ = [this](TableStats& s, std::chrono::steady_clock::time_point t) { absorb(s, t); };              \
  Metered<decltype(fold_)> metered_(fold_)

void PropagationSession::enter_evidence(const Evidence& e) {
  if (propagated_) throw DomainError("evidence must be entered before propagation");
  if (evidence_entered_) throw DomainError("evidence already entered");
  for (const auto& [v, s] : e) {
    if (v < 0 || static_cast<std::size_t>(v) >= net_->size())
      throw ValidationError("evidence on unknown variable " + std::to_string(v));
    if (s >= net_->cardinality(v))
      throw ValidationError("evidence state out of range for variable '" + net_->variable(v).name + "'");
  }
  evidence_ = e;
  evidence_entered_ = true;
  if (e.empty()) return;
  LAZYBN_METERED;
  for (auto& pot : clique_potentials_) {
    DecomposedPotential next;
    for (const auto& f : pot) {
      const bool touched = std::any_of(f->domain().begin(), f->domain().end(), [&](VarId v) { return e.contains(v); });
      if (!touched) {
        next.add(f);
        continue;
      }
      Potential p = instantiate(*f, e);
      if (p.domain().empty()) {
        evidence_constant_ *= p.table()[0];
      } else {
        next.add(make_factor(std::move(p)));
      }
    }
    pot = std::move(next);
  }
}

int PropagationSession::edge_slot(int from, int to) const {
  if (from < 0 || static_cast<std::size_t>(from) >= tree_->size()) throw DomainError("clique index out of range");
  for (const auto& [nbr, e] : tree_->adjacency[from]) {
    if (nbr == to) return 2 * e + (tree_->edges[e].a == from ? 0 : 1);
  }
  throw DomainError("cliques " + std::to_string(from) + " and " + std::to_string(to) + " are not adjacent");
}

const std::optional<DecomposedPotential>& PropagationSession::message(int from, int to) const {
  const int slot = edge_slot(from, to);
  return mailboxes_[slot / 2][slot % 2];
}

DecomposedPotential PropagationSession::incoming(int clique, int except) const {
  DecomposedPotential out = clique_potentials_.at(clique);
  for (const auto& [nbr, e] : tree_->adjacency[clique]) {
    if (nbr == except) continue;
    const auto& msg = message(nbr, clique);
    if (!msg) {
      if (except >= 0)
        throw DomainError("message " + std::to_string(nbr) + " -> " + std::to_string(clique) + " not yet computed");
      continue;
    }
    out = combine(out, *msg);
  }
  return out;
}

DecomposedPotential PropagationSession::clique_marginal(int clique) const { return incoming(clique, -1); }

DecomposedPotential PropagationSession::solve_query(DecomposedPotential factors, const VarSet& target) {
  SolveOptions opts;
  opts.check_invariants = options_.check_invariants;
  opts.topo_rank = topo_rank_;
  Query q{remove_barren(factors, target, evidence_), target, evidence_};
  return solve(options_.backend, q, opts);
}

const DecomposedPotential& PropagationSession::compute_message(int from, int to) {
  LAZYBN_METERED;
  return compute_message_impl(from, to, false);
}

const DecomposedPotential& PropagationSession::compute_message_impl(int from, int to, bool collect) {
  const int slot = edge_slot(from, to);
  const VarSet target = set_difference(tree_->edges[slot / 2].vars, evidence_.variables());

  const DecomposedPotential all = incoming(from, to);
  DecomposedPotential relevant = relevant_potentials(all, target);
  if (collect) {
    for (const auto& f : all) {
      if (std::find(relevant.begin(), relevant.end(), f) == relevant.end()) dropped_.push_back(f);
    }
  }
  DecomposedPotential msg = solve_query(std::move(relevant), target);
  if (options_.minimalize_tails) msg = minimalize_tails(msg, dag_, evidence_, options_.check_invariants);
  if (options_.check_invariants) {
    for (const auto& f : msg) {
      if (!set_includes(target, f->domain()))
        throw InvariantViolation("message " + std::to_string(from) + " -> " + std::to_string(to) +
                                 " leaves the separator");
    }
  }
  ++metrics_.messages_computed;
  auto& box = mailboxes_[slot / 2][slot % 2];
  box = std::move(msg);
  return *box;
}

void PropagationSession::propagate() {
  if (propagated_) throw DomainError("session already propagated");
  LAZYBN_METERED;
  const int k = static_cast<int>(tree_->size());
  std::vector<int> parent(k, -1);
  std::vector<int> preorder;
  std::vector<int> stack{options_.root};
  std::vector<bool> seen(k, false);
  seen[options_.root] = true;
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    preorder.push_back(c);
    for (auto it = tree_->adjacency[c].rbegin(); it != tree_->adjacency[c].rend(); ++it) {
      if (!seen[it->first]) {
        seen[it->first] = true;
        parent[it->first] = c;
        stack.push_back(it->first);
      }
    }
  }
  for (auto it = preorder.rbegin(); it != preorder.rend(); ++it) {
    if (parent[*it] >= 0) compute_message_impl(*it, parent[*it], true);
  }
  for (int c : preorder) {
    for (const auto& [nbr, e] : tree_->adjacency[c]) {
      if (parent[nbr] == c) compute_message_impl(c, nbr, false);
    }
  }
  propagated_ = true;
}

Potential PropagationSession::joint_posterior(const VarSet& vars) {
  if (!propagated_) throw DomainError("posterior requested before propagation");
  for (VarId v : vars) {
    if (v < 0 || static_cast<std::size_t>(v) >= net_->size()) throw DomainError("unknown variable " + std::to_string(v));
    if (evidence_.contains(v)) throw DomainError("posterior of observed variable '" + net_->variable(v).name + "'");
  }
  const int clique = tree_->smallest_clique_containing(vars);
  if (clique < 0) throw DomainError("variables do not share a clique");
  // zero mass may sit in the evidence constant or in a part of the tree x never sees
  if (!(probability_of_evidence() > 0.0)) throw ImpossibleEvidence("evidence has zero probability");
  LAZYBN_METERED;
  DecomposedPotential rel = relevant_potentials(clique_marginal(clique), vars);
  Potential p = contract(solve_query(std::move(rel), vars));
  const VarSet missing = set_difference(vars, p.domain());
  if (!missing.empty()) p = multiply(p, Potential::ones(missing, net_->cardinalities(missing)));
  p = sum_out(p, set_difference(p.domain(), vars));
  auto [normalized, total] = normalize(p);
  return normalized;
}

std::vector<double> PropagationSession::posterior(VarId x) { return joint_posterior({x}).table(); }

double PropagationSession::probability_of_evidence() {
  if (!propagated_) throw DomainError("probability of evidence requested before propagation");
  if (probability_of_evidence_) return *probability_of_evidence_;
  LAZYBN_METERED;
  auto mass = [this](DecomposedPotential factors) {
    const Potential p = contract(solve_query(std::move(factors), {}));
    double total = 0.0;
    for (double x : p.table()) total += x;
    return total;
  };
  double result = evidence_constant_;
  if (result > 0.0) result *= mass(clique_marginal(options_.root));
  if (result > 0.0 && !dropped_.empty()) result *= mass(DecomposedPotential(dropped_));
  probability_of_evidence_ = result;
  return result;
}

}  // namespace lazybn
