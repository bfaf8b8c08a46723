#pragma once

#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "lazybn/bench.hpp"
#include "lazybn/model.hpp"
#include "lazybn/potential.hpp"

namespace testing {

using namespace lazybn;

inline Variable binary(VarId id, std::string name) { return Variable{id, std::move(name), {"false", "true"}}; }

// A -> B -> C, P(A)=[0.3,0.7], P(B|A) rows [0.5,0.5],[0.2,0.8]
inline BayesianNetwork chain() {
  return BayesianNetwork({binary(0, "A"), binary(1, "B"), binary(2, "C")},
                         {CptSpec{0, {}, {0.3, 0.7}}, CptSpec{1, {0}, {0.5, 0.5, 0.2, 0.8}},
                          CptSpec{2, {1}, {0.9, 0.1, 0.4, 0.6}}});
}

// X1 -> Y <- X2 with ids X1 < X2 < Y
inline BayesianNetwork collider() {
  return BayesianNetwork({binary(0, "X1"), binary(1, "X2"), binary(2, "Y")},
                         {CptSpec{0, {}, {0.6, 0.4}}, CptSpec{1, {}, {0.25, 0.75}},
                          CptSpec{2, {0, 1}, {0.9, 0.1, 0.5, 0.5, 0.3, 0.7, 0.05, 0.95}}});
}

inline std::vector<double> random_column(Rng& rng, int card) {
  std::vector<double> col(card);
  double sum = 0.0;
  for (double& x : col) {
    x = 0.05 + rng.uniform01();
    sum += x;
  }
  for (double& x : col) x /= sum;
  return col;
}

inline std::vector<double> random_cpt(Rng& rng, int card, int columns) {
  std::vector<double> t;
  for (int c = 0; c < columns; ++c) {
    auto col = random_column(rng, card);
    t.insert(t.end(), col.begin(), col.end());
  }
  return t;
}

// ids: A=0, B=1, C=2, D=3, E=4; A has parents B,C; D has A,B; E has A,C.
inline BayesianNetwork four_shape(std::uint64_t seed = 4) {
  Rng rng(seed);
  std::vector<Variable> v{binary(0, "A"), binary(1, "B"), binary(2, "C"), Variable{3, "D", {"d0", "d1", "d2"}},
                          binary(4, "E")};
  std::vector<CptSpec> c{CptSpec{0, {1, 2}, random_cpt(rng, 2, 4)}, CptSpec{1, {}, random_cpt(rng, 2, 1)},
                         CptSpec{2, {}, random_cpt(rng, 2, 1)}, CptSpec{3, {0, 1}, random_cpt(rng, 3, 4)},
                         CptSpec{4, {0, 2}, random_cpt(rng, 2, 4)}};
  return BayesianNetwork(std::move(v), std::move(c));
}

inline Potential random_potential(Rng& rng, VarSet head, VarSet tail, const std::vector<int>& cards_by_id) {
  const VarSet dom = set_union(head, tail);
  std::vector<int> cards;
  for (VarId v : dom) cards.push_back(cards_by_id[v]);
  std::vector<double> t(table_size(cards));
  for (double& x : t) x = rng.uniform01();
  return Potential(std::move(head), std::move(tail), std::move(cards), std::move(t));
}

/// p widened by ones to `dom`, summing out anything outside it.
inline Potential on_domain(const Potential& p, const VarSet& dom, const std::vector<int>& cards_by_id) {
  Potential q = sum_out(p, set_difference(p.domain(), dom));
  const VarSet missing = set_difference(dom, q.domain());
  std::vector<int> cards;
  for (VarId v : missing) cards.push_back(cards_by_id[v]);
  return multiply(q, Potential::ones(missing, cards));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), 1e-300});
    m = std::max(m, std::abs(a[i] - b[i]) / scale);
  }
  return m;
}

inline std::vector<int> cards_of(const BayesianNetwork& net) {
  std::vector<int> c;
  for (const auto& v : net.variables()) c.push_back(v.cardinality());
  return c;
}

}  // namespace testing
