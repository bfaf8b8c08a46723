#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "lazybn/model.hpp"
#include "lazybn/potential.hpp"
#include "lazybn/query.hpp"

namespace lazybn {

/// Mixed graph over variable ids. E is a set of ordered pairs: an edge
/// present in both directions is undirected, otherwise it is directed.
///
/// Empty-head factors (evidence likelihoods) add no edges. Their scopes are
/// kept as "observed child" markers so moralization and barren analysis can
/// treat each scope as the parent set of an observed variable.
class MixedGraph {
 public:
  MixedGraph() = default;
  explicit MixedGraph(std::size_t n);

  std::size_t capacity() const { return n_; }
  void add_vertex(VarId v);
  bool has_vertex(VarId v) const;
  /// Present vertices, ascending.
  VarSet vertices() const;

  void add_arc(VarId from, VarId to);
  void add_undirected(VarId a, VarId b);
  bool has_arc(VarId from, VarId to) const;
  bool is_directed(VarId from, VarId to) const { return has_arc(from, to) && !has_arc(to, from); }
  bool is_undirected(VarId a, VarId b) const { return has_arc(a, b) && has_arc(b, a); }

  VarSet children(VarId v) const;
  VarSet parents(VarId v) const;
  VarSet neighbours(VarId v) const;

  void add_observed_child(VarSet scope);
  const std::vector<VarSet>& observed_children() const { return observed_; }

  /// True if the directed part (undirected edges ignored) has no cycle.
  bool directed_acyclic() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> present_;
  std::vector<std::uint8_t> arcs_;
  std::vector<VarSet> observed_;
};

class UndirectedGraph {
 public:
  UndirectedGraph() = default;
  explicit UndirectedGraph(std::size_t n);

  std::size_t capacity() const { return n_; }
  void add_vertex(VarId v);
  bool has_vertex(VarId v) const;
  VarSet vertices() const;
  void add_edge(VarId a, VarId b);
  bool has_edge(VarId a, VarId b) const;
  VarSet neighbours(VarId v) const;
  std::size_t edge_count() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> present_;
  std::vector<std::uint8_t> adj_;
};

/// Parent/child lists of a DAG indexed by variable id.
struct DirectedGraph {
  std::vector<std::vector<VarId>> parents;
  std::vector<std::vector<VarId>> children;

  static DirectedGraph of(const BayesianNetwork& net);
  static DirectedGraph from_parents(std::vector<std::vector<VarId>> parents);
  std::size_t size() const { return parents.size(); }
};

struct EliminationOrder {
  std::vector<VarId> order;
  std::vector<std::pair<VarId, VarId>> fill_edges;
  /// The eliminated vertex together with its neighbours at elimination time.
  std::vector<VarSet> cliques;
};

struct Separator {
  int a = 0;
  int b = 0;
  VarSet vars;
};

struct JunctionTree {
  std::vector<VarSet> cliques;
  std::vector<Separator> edges;
  /// Per clique, the ids of variables whose CPT it holds.
  std::vector<std::vector<VarId>> assigned;
  /// Per clique, (neighbour clique, edge index).
  std::vector<std::vector<std::pair<int, int>>> adjacency;
  /// s(C), saturating at UINT64_MAX.
  std::vector<std::uint64_t> clique_sizes;

  std::size_t size() const { return cliques.size(); }
  std::uint64_t max_clique_size() const;
  /// s of the whole tree: sum of s(C), saturating.
  std::uint64_t total_clique_size() const;
  /// Smallest-s(C) clique containing every variable of `vars`, ties to the lower index; -1 if none.
  int smallest_clique_containing(const VarSet& vars) const;
};

MixedGraph domain_graph(const DecomposedPotential& p);
UndirectedGraph moralize(const MixedGraph& g);
UndirectedGraph moralize(const BayesianNetwork& net);

/// Variables that are barren w.r.t. q, with undirected components condensed.
VarSet barren_variables(const Query& q);
VarSet barren_variables(const MixedGraph& g, const VarSet& target, const Evidence& evidence);

/// Vertices reachable from `x` by an active trail given `z` (includes x).
std::vector<bool> d_connected(const DirectedGraph& g, VarId x, const VarSet& z);
/// Throws DomainError if x == y.
bool d_separated(const DirectedGraph& g, VarId x, VarId y, const VarSet& z);

/// Greedy minimum fill-in weight with smallest-id tie-break. `cards` is indexed by id.
EliminationOrder min_fill_weight_order(const UndirectedGraph& g, const VarSet& eliminate,
                                       const std::vector<int>& cards);

/// Kahn's algorithm on per-vertex parent lists, smallest id first; StructuralError on a cycle.
std::vector<VarId> topological_sort(const std::vector<std::vector<VarId>>& parents);
std::vector<VarId> topological_order(const BayesianNetwork& net);

JunctionTree build_junction_tree(const BayesianNetwork& net);

/// For every variable, the cliques containing it form a connected subtree.
bool has_running_intersection(const JunctionTree& tree);
bool is_tree(const JunctionTree& tree);

std::uint64_t state_space_size(const std::vector<int>& cards);

}  // namespace lazybn
