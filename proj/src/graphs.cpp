#include "lazybn/graphs.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "lazybn/error.hpp"

namespace lazybn {

namespace {

std::size_t idx(VarId v) { return static_cast<std::size_t>(v); }

void check_vertex(VarId v, std::size_t n) {
  if (v < 0 || idx(v) >= n) throw DomainError("vertex " + std::to_string(v) + " out of range");
}

std::size_t capacity_for(const VarSet& vars) { return vars.empty() ? 0 : idx(vars.back()) + 1; }

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent[b] = a;
    return true;
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// MixedGraph

MixedGraph::MixedGraph(std::size_t n) : n_(n), present_(n, 0), arcs_(n * n, 0) {}

void MixedGraph::add_vertex(VarId v) {
  check_vertex(v, n_);
  present_[idx(v)] = 1;
}

bool MixedGraph::has_vertex(VarId v) const { return v >= 0 && idx(v) < n_ && present_[idx(v)] != 0; }

VarSet MixedGraph::vertices() const {
  VarSet out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (present_[i]) out.push_back(static_cast<VarId>(i));
  }
  return out;
}

void MixedGraph::add_arc(VarId from, VarId to) {
  if (from == to) throw DomainError("self-loop on vertex " + std::to_string(from));
  add_vertex(from);
  add_vertex(to);
  arcs_[idx(from) * n_ + idx(to)] = 1;
}

void MixedGraph::add_undirected(VarId a, VarId b) {
  add_arc(a, b);
  add_arc(b, a);
}

bool MixedGraph::has_arc(VarId from, VarId to) const {
  return has_vertex(from) && has_vertex(to) && arcs_[idx(from) * n_ + idx(to)] != 0;
}

VarSet MixedGraph::children(VarId v) const {
  VarSet out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (is_directed(v, static_cast<VarId>(j))) out.push_back(static_cast<VarId>(j));
  }
  return out;
}

VarSet MixedGraph::parents(VarId v) const {
  VarSet out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (is_directed(static_cast<VarId>(j), v)) out.push_back(static_cast<VarId>(j));
  }
  return out;
}

VarSet MixedGraph::neighbours(VarId v) const {
  VarSet out;
  for (std::size_t j = 0; j < n_; ++j) {
    if (is_undirected(v, static_cast<VarId>(j))) out.push_back(static_cast<VarId>(j));
  }
  return out;
}

void MixedGraph::add_observed_child(VarSet scope) {
  for (VarId v : scope) add_vertex(v);
  observed_.push_back(std::move(scope));
}

bool MixedGraph::directed_acyclic() const {
  std::vector<int> indegree(n_, 0);
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if (is_directed(static_cast<VarId>(i), static_cast<VarId>(j))) ++indegree[j];
    }
  }
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n_; ++i) {
    if (present_[i] && indegree[i] == 0) stack.push_back(i);
  }
  std::size_t visited = 0;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    ++visited;
    for (std::size_t j = 0; j < n_; ++j) {
      if (is_directed(static_cast<VarId>(i), static_cast<VarId>(j)) && --indegree[j] == 0) stack.push_back(j);
    }
  }
  return visited == vertices().size();
}

// ---------------------------------------------------------------------------
// UndirectedGraph

UndirectedGraph::UndirectedGraph(std::size_t n) : n_(n), present_(n, 0), adj_(n * n, 0) {}

void UndirectedGraph::add_vertex(VarId v) {
  check_vertex(v, n_);
  present_[idx(v)] = 1;
}

bool UndirectedGraph::has_vertex(VarId v) const { return v >= 0 && idx(v) < n_ && present_[idx(v)] != 0; }

VarSet UndirectedGraph::vertices() const {
  VarSet out;
  for (std::size_t i = 0; i < n_; ++i) {
    if (present_[i]) out.push_back(static_cast<VarId>(i));
  }
  return out;
}

void UndirectedGraph::add_edge(VarId a, VarId b) {
  if (a == b) throw DomainError("self-loop on vertex " + std::to_string(a));
  add_vertex(a);
  add_vertex(b);
  adj_[idx(a) * n_ + idx(b)] = 1;
  adj_[idx(b) * n_ + idx(a)] = 1;
}

bool UndirectedGraph::has_edge(VarId a, VarId b) const {
  return has_vertex(a) && has_vertex(b) && adj_[idx(a) * n_ + idx(b)] != 0;
}

VarSet UndirectedGraph::neighbours(VarId v) const {
  VarSet out;
  if (!has_vertex(v)) return out;
  const std::uint8_t* row = &adj_[idx(v) * n_];
  for (std::size_t j = 0; j < n_; ++j) {
    if (row[j]) out.push_back(static_cast<VarId>(j));
  }
  return out;
}

std::size_t UndirectedGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), std::uint8_t{1})) / 2;
}

// ---------------------------------------------------------------------------
// DirectedGraph

DirectedGraph DirectedGraph::from_parents(std::vector<std::vector<VarId>> parents) {
  DirectedGraph g;
  g.children.assign(parents.size(), {});
  for (std::size_t i = 0; i < parents.size(); ++i) {
    for (VarId p : parents[i]) {
      check_vertex(p, parents.size());
      g.children[idx(p)].push_back(static_cast<VarId>(i));
    }
  }
  g.parents = std::move(parents);
  return g;
}

DirectedGraph DirectedGraph::of(const BayesianNetwork& net) {
  std::vector<std::vector<VarId>> parents(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) parents[i] = net.parents(static_cast<VarId>(i));
  return from_parents(std::move(parents));
}

// ---------------------------------------------------------------------------
// domain graphs, moralization, barren variables

MixedGraph domain_graph(const DecomposedPotential& p) {
  MixedGraph g(capacity_for(p.domain()));
  for (const auto& f : p) {
    for (VarId v : f->domain()) g.add_vertex(v);
    const VarSet& head = f->head();
    if (head.empty()) {
      if (!f->domain().empty()) g.add_observed_child(f->domain());
      continue;
    }
    for (std::size_t i = 0; i < head.size(); ++i) {
      for (std::size_t j = i + 1; j < head.size(); ++j) g.add_undirected(head[i], head[j]);
    }
    for (VarId t : f->tail()) {
      for (VarId h : head) g.add_arc(t, h);
    }
  }
  return g;
}

namespace {

/// Maximal vertex sets connected by undirected edges only; component id per vertex (-1 if absent).
std::vector<int> undirected_components(const MixedGraph& g, int& count) {
  const std::size_t n = g.capacity();
  std::vector<int> comp(n, -1);
  count = 0;
  for (VarId start : g.vertices()) {
    if (comp[idx(start)] >= 0) continue;
    std::vector<VarId> stack{start};
    comp[idx(start)] = count;
    while (!stack.empty()) {
      const VarId v = stack.back();
      stack.pop_back();
      for (VarId w : g.neighbours(v)) {
        if (comp[idx(w)] < 0) {
          comp[idx(w)] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  return comp;
}

void marry(UndirectedGraph& m, const VarSet& vs) {
  for (std::size_t i = 0; i < vs.size(); ++i) {
    for (std::size_t j = i + 1; j < vs.size(); ++j) m.add_edge(vs[i], vs[j]);
  }
}

}  // namespace

UndirectedGraph moralize(const MixedGraph& g) {
  const std::size_t n = g.capacity();
  UndirectedGraph m(n);
  const VarSet verts = g.vertices();
  for (VarId v : verts) m.add_vertex(v);
  for (VarId a : verts) {
    for (VarId b : verts) {
      if (a != b && g.has_arc(a, b)) m.add_edge(a, b);
    }
  }
  // Parents of vertices joined by an undirected path are married as a group.
  int count = 0;
  const std::vector<int> comp = undirected_components(g, count);
  std::vector<VarSet> parents_of(count);
  for (VarId v : verts) {
    for (VarId p : g.parents(v)) parents_of[comp[idx(v)]].push_back(p);
  }
  for (auto& ps : parents_of) marry(m, make_set(std::move(ps)));
  for (const VarSet& scope : g.observed_children()) marry(m, scope);
  return m;
}

UndirectedGraph moralize(const BayesianNetwork& net) {
  UndirectedGraph m(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) {
    m.add_vertex(static_cast<VarId>(i));
    const auto& pa = net.parents(static_cast<VarId>(i));
    for (VarId p : pa) m.add_edge(p, static_cast<VarId>(i));
    marry(m, make_set(pa));
  }
  return m;
}

VarSet barren_variables(const MixedGraph& g, const VarSet& target, const Evidence& evidence) {
  int count = 0;
  const std::vector<int> comp = undirected_components(g, count);
  const VarSet verts = g.vertices();

  // A component is live if it holds a target or observed vertex, or is an
  // ancestor of a live component. Everything else is barren.
  std::vector<bool> live(count, false);
  std::vector<std::vector<int>> parent_comps(count);
  for (VarId v : verts) {
    if (set_contains(target, v) || evidence.contains(v)) live[comp[idx(v)]] = true;
    for (VarId p : g.parents(v)) parent_comps[comp[idx(v)]].push_back(comp[idx(p)]);
  }
  for (const VarSet& scope : g.observed_children()) {
    for (VarId v : scope) live[comp[idx(v)]] = true;
  }
  std::deque<int> queue;
  for (int c = 0; c < count; ++c) {
    if (live[c]) queue.push_back(c);
  }
  while (!queue.empty()) {
    const int c = queue.front();
    queue.pop_front();
    for (int p : parent_comps[c]) {
      if (!live[p]) {
        live[p] = true;
        queue.push_back(p);
      }
    }
  }
  VarSet out;
  for (VarId v : verts) {
    if (!live[comp[idx(v)]]) out.push_back(v);
  }
  return out;
}

VarSet barren_variables(const Query& q) { return barren_variables(domain_graph(q.potentials), q.target, q.evidence); }

// ---------------------------------------------------------------------------
// d-separation

std::vector<bool> d_connected(const DirectedGraph& g, VarId x, const VarSet& z) {
  const std::size_t n = g.size();
  check_vertex(x, n);
  std::vector<bool> observed(n, false);
  for (VarId v : z) {
    check_vertex(v, n);
    observed[idx(v)] = true;
  }
  // Observed vertices and their ancestors: colliders there are open.
  std::vector<bool> opens(n, false);
  std::vector<VarId> stack(z.begin(), z.end());
  while (!stack.empty()) {
    const VarId v = stack.back();
    stack.pop_back();
    if (opens[idx(v)]) continue;
    opens[idx(v)] = true;
    for (VarId p : g.parents[idx(v)]) stack.push_back(p);
  }

  enum Dir : int { kUp = 0, kDown = 1 };  // up: arrived from a child
  std::vector<std::uint8_t> visited(2 * n, 0);
  std::vector<bool> reachable(n, false);
  std::vector<std::pair<VarId, int>> work{{x, kUp}};
  while (!work.empty()) {
    const auto [v, dir] = work.back();
    work.pop_back();
    if (visited[2 * idx(v) + dir]) continue;
    visited[2 * idx(v) + dir] = 1;
    if (!observed[idx(v)]) reachable[idx(v)] = true;
    if (dir == kUp && !observed[idx(v)]) {
      for (VarId p : g.parents[idx(v)]) work.emplace_back(p, kUp);
      for (VarId c : g.children[idx(v)]) work.emplace_back(c, kDown);
    } else if (dir == kDown) {
      if (!observed[idx(v)]) {
        for (VarId c : g.children[idx(v)]) work.emplace_back(c, kDown);
      }
      if (opens[idx(v)]) {
        for (VarId p : g.parents[idx(v)]) work.emplace_back(p, kUp);
      }
    }
  }
  return reachable;
}

bool d_separated(const DirectedGraph& g, VarId x, VarId y, const VarSet& z) {
  if (x == y) throw DomainError("d_separated requires distinct vertices");
  check_vertex(y, g.size());
  return !d_connected(g, x, z)[idx(y)];
}

// ---------------------------------------------------------------------------
// elimination orders

EliminationOrder min_fill_weight_order(const UndirectedGraph& g, const VarSet& eliminate,
                                       const std::vector<int>& cards) {
  const std::size_t n = g.capacity();
  for (VarId v : eliminate) {
    if (!g.has_vertex(v)) throw DomainError("vertex " + std::to_string(v) + " not in graph");
    if (idx(v) >= cards.size()) throw DomainError("no cardinality for vertex " + std::to_string(v));
  }
  std::vector<std::uint8_t> adj(n * n, 0);
  std::vector<std::uint8_t> alive(n, 0);
  const VarSet verts = g.vertices();
  for (VarId v : verts) {
    alive[idx(v)] = 1;
    for (VarId w : g.neighbours(v)) adj[idx(v) * n + idx(w)] = 1;
  }
  auto nbrs = [&](VarId v) {
    VarSet out;
    for (VarId w : verts) {
      if (alive[idx(w)] && adj[idx(v) * n + idx(w)]) out.push_back(w);
    }
    return out;
  };
  auto cost = [&](VarId v) {
    const VarSet nb = nbrs(v);
    std::uint64_t c = 0;
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        if (!adj[idx(nb[i]) * n + idx(nb[j])])
          c += static_cast<std::uint64_t>(cards[idx(nb[i])]) * static_cast<std::uint64_t>(cards[idx(nb[j])]);
      }
    }
    return c;
  };

  EliminationOrder out;
  std::vector<VarId> remaining = eliminate;
  while (!remaining.empty()) {
    std::size_t best = 0;
    std::uint64_t best_cost = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      const std::uint64_t c = cost(remaining[i]);
      if (c < best_cost) {  // remaining is ascending, so ties keep the smaller id
        best_cost = c;
        best = i;
      }
    }
    const VarId v = remaining[best];
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
    const VarSet nb = nbrs(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      for (std::size_t j = i + 1; j < nb.size(); ++j) {
        std::uint8_t& e = adj[idx(nb[i]) * n + idx(nb[j])];
        if (!e) {
          e = 1;
          adj[idx(nb[j]) * n + idx(nb[i])] = 1;
          out.fill_edges.emplace_back(nb[i], nb[j]);
        }
      }
    }
    VarSet clique = nb;
    clique.push_back(v);
    out.cliques.push_back(make_set(std::move(clique)));
    out.order.push_back(v);
    alive[idx(v)] = 0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// topological order

std::vector<VarId> topological_sort(const std::vector<std::vector<VarId>>& parents) {
  const std::size_t n = parents.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<VarId>> children(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (VarId p : parents[i]) {
      check_vertex(p, n);
      children[idx(p)].push_back(static_cast<VarId>(i));
      ++indegree[i];
    }
  }
  std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push(static_cast<VarId>(i));
  }
  std::vector<VarId> order;
  order.reserve(n);
  while (!ready.empty()) {
    const VarId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (VarId c : children[idx(v)]) {
      if (--indegree[idx(c)] == 0) ready.push(c);
    }
  }
  if (order.size() != n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (indegree[i] > 0) throw StructuralError("directed cycle through variable " + std::to_string(i));
    }
  }
  return order;
}

std::vector<VarId> topological_order(const BayesianNetwork& net) { return net.topological_order(); }

// ---------------------------------------------------------------------------
// junction trees

std::uint64_t state_space_size(const std::vector<int>& cards) {
  std::uint64_t s = 1;
  for (int c : cards) {
    const auto uc = static_cast<std::uint64_t>(c);
    if (uc != 0 && s > std::numeric_limits<std::uint64_t>::max() / uc) return std::numeric_limits<std::uint64_t>::max();
    s *= uc;
  }
  return s;
}

std::uint64_t JunctionTree::max_clique_size() const {
  std::uint64_t m = 0;
  for (auto s : clique_sizes) m = std::max(m, s);
  return m;
}

std::uint64_t JunctionTree::total_clique_size() const {
  std::uint64_t t = 0;
  for (auto s : clique_sizes) {
    if (t > std::numeric_limits<std::uint64_t>::max() - s) return std::numeric_limits<std::uint64_t>::max();
    t += s;
  }
  return t;
}

int JunctionTree::smallest_clique_containing(const VarSet& vars) const {
  int best = -1;
  for (std::size_t i = 0; i < cliques.size(); ++i) {
    if (set_includes(cliques[i], vars) && (best < 0 || clique_sizes[i] < clique_sizes[best])) best = static_cast<int>(i);
  }
  return best;
}

JunctionTree build_junction_tree(const BayesianNetwork& net) {
  const UndirectedGraph moral = moralize(net);
  std::vector<int> cards(net.size());
  for (std::size_t i = 0; i < net.size(); ++i) cards[i] = net.cardinality(static_cast<VarId>(i));
  VarSet all(net.size());
  std::iota(all.begin(), all.end(), 0);
  const EliminationOrder elim = min_fill_weight_order(moral, all, cards);

  JunctionTree tree;
  for (std::size_t i = 0; i < elim.cliques.size(); ++i) {
    const VarSet& c = elim.cliques[i];
    bool maximal = true;
    for (std::size_t j = 0; j < elim.cliques.size() && maximal; ++j) {
      if (j == i) continue;
      const VarSet& o = elim.cliques[j];
      if (set_includes(o, c) && (o.size() > c.size() || j < i)) maximal = false;
    }
    if (maximal) tree.cliques.push_back(c);
  }
  for (const VarSet& c : tree.cliques) tree.clique_sizes.push_back(state_space_size(net.cardinalities(c)));

  // Maximum spanning tree: |S| first (which guarantees running intersection),
  // then s(S), then the smaller clique-index pair.
  struct Candidate {
    int a, b;
    std::size_t count;
    std::uint64_t weight;
    VarSet vars;
  };
  std::vector<Candidate> candidates;
  const int k = static_cast<int>(tree.cliques.size());
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      VarSet s = set_intersection(tree.cliques[a], tree.cliques[b]);
      const std::size_t count = s.size();
      const std::uint64_t weight = state_space_size(net.cardinalities(s));
      candidates.push_back({a, b, count, weight, std::move(s)});
    }
  }
  std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.count != y.count) return x.count > y.count;
    if (x.weight != y.weight) return x.weight > y.weight;
    return std::pair(x.a, x.b) < std::pair(y.a, y.b);
  });
  UnionFind uf(tree.cliques.size());
  tree.adjacency.assign(tree.cliques.size(), {});
  for (auto& c : candidates) {
    if (!uf.unite(c.a, c.b)) continue;
    const int e = static_cast<int>(tree.edges.size());
    tree.adjacency[c.a].emplace_back(c.b, e);
    tree.adjacency[c.b].emplace_back(c.a, e);
    tree.edges.push_back({c.a, c.b, std::move(c.vars)});
    if (tree.edges.size() + 1 == tree.cliques.size()) break;
  }

  tree.assigned.assign(tree.cliques.size(), {});
  for (std::size_t v = 0; v < net.size(); ++v) {
    const int c = tree.smallest_clique_containing(net.family(static_cast<VarId>(v)));
    if (c < 0) throw StructuralError("no clique holds the family of variable " + std::to_string(v));
    tree.assigned[c].push_back(static_cast<VarId>(v));
  }
  return tree;
}

bool is_tree(const JunctionTree& tree) {
  const std::size_t k = tree.cliques.size();
  if (k == 0) return true;
  if (tree.edges.size() + 1 != k) return false;
  UnionFind uf(k);
  for (const auto& e : tree.edges) {
    if (!uf.unite(e.a, e.b)) return false;
  }
  return true;
}

bool has_running_intersection(const JunctionTree& tree) {
  VarSet all;
  for (const auto& c : tree.cliques) all = set_union(all, c);
  for (VarId v : all) {
    // Cliques holding v must be connected through edges whose separator holds v.
    std::vector<int> holders;
    for (std::size_t i = 0; i < tree.cliques.size(); ++i) {
      if (set_contains(tree.cliques[i], v)) holders.push_back(static_cast<int>(i));
    }
    UnionFind uf(tree.cliques.size());
    for (const auto& e : tree.edges) {
      if (set_contains(e.vars, v)) uf.unite(e.a, e.b);
    }
    for (int h : holders) {
      if (uf.find(h) != uf.find(holders.front())) return false;
    }
  }
  for (const auto& e : tree.edges) {
    if (e.vars != set_intersection(tree.cliques[e.a], tree.cliques[e.b])) return false;
  }
  return true;
}

}  // namespace lazybn
