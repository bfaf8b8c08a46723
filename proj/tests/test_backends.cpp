#include <doctest.h>

#include "lazybn/backends.hpp"
#include "lazybn/error.hpp"
#include "lazybn/graphs.hpp"
#include "support.hpp"

using namespace lazybn;
using namespace testing;

namespace {

DecomposedPotential cpts(const BayesianNetwork& net, const Evidence& e = {}) {
  DecomposedPotential d;
  for (VarId v = 0; v < static_cast<VarId>(net.size()); ++v) {
    Potential p = instantiate(*net.cpt(v), e);
    if (!p.domain().empty()) d.add(make_factor(std::move(p)));
  }
  return d;
}

// Y=0, X1=1, X2=2
BayesianNetwork fork_net() {
  return BayesianNetwork({binary(0, "Y"), binary(1, "X1"), binary(2, "X2")},
                         {CptSpec{0, {}, {0.4, 0.6}}, CptSpec{1, {0}, {0.7, 0.3, 0.1, 0.9}},
                          CptSpec{2, {0}, {0.2, 0.8, 0.5, 0.5}}});
}

Potential brute(const DecomposedPotential& d, const VarSet& target) {
  const Potential all = contract(d);
  return sum_out(all, set_difference(all.domain(), target));
}

}  // namespace

TEST_CASE("VE on the fork yields one joint factor") {
  const auto net = fork_net();
  const DecomposedPotential r = ve_solve(Query{cpts(net), {1, 2}, {}});
  REQUIRE(r.size() == 1);
  const Potential& f = *r.factors()[0];
  CHECK(f.domain() == VarSet{1, 2});
  CHECK(f.head() == VarSet{1, 2});
  CHECK(max_abs_diff(f.table(), brute(cpts(net), {1, 2}).table()) < 1e-15);
}

TEST_CASE("VE with nothing to eliminate returns its input") {
  const auto net = chain();
  const DecomposedPotential in = cpts(net);
  const DecomposedPotential r = ve_solve(Query{in, {0, 1, 2}, {}});
  CHECK(r.factors() == in.factors());
}

TEST_CASE("VE on a uniform chain matches the oracle marginal") {
  const BayesianNetwork net({binary(0, "A"), binary(1, "B"), binary(2, "C")},
                            {CptSpec{0, {}, {0.5, 0.5}}, CptSpec{1, {0}, {0.5, 0.5, 0.5, 0.5}},
                             CptSpec{2, {1}, {0.5, 0.5, 0.5, 0.5}}});
  const Potential c = contract(ve_solve(Query{cpts(net), {2}, {}}));
  CHECK(c.domain() == VarSet{2});
  CHECK(max_abs_diff(c.table(), {0.5, 0.5}) < 1e-15);
}

TEST_CASE("SPI returns idle factors untouched") {
  const auto f = make_factor(Potential({0}, {}, {2}, {0.3, 0.7}));
  const DecomposedPotential r = spi_solve(Query{DecomposedPotential({f}), {0}, {}});
  REQUIRE(r.size() == 1);
  CHECK(r.factors()[0] == f);
}

TEST_CASE("SPI on the fork agrees with VE") {
  const auto net = fork_net();
  const DecomposedPotential r = spi_solve(Query{cpts(net), {1, 2}, {}});
  REQUIRE(r.size() == 1);
  const Potential v = contract(ve_solve(Query{cpts(net), {1, 2}, {}}));
  CHECK(max_rel_diff(contract(r).table(), v.table()) <= 1e-12);
}

TEST_CASE("SPI keeps disconnected parts apart") {
  // A=0 -> Y1=1 and B=2 -> Y2=3, targets A and B
  const BayesianNetwork net({binary(0, "A"), binary(1, "Y1"), binary(2, "B"), binary(3, "Y2")},
                            {CptSpec{0, {}, {0.3, 0.7}}, CptSpec{1, {0}, {0.6, 0.4, 0.1, 0.9}},
                             CptSpec{2, {}, {0.8, 0.2}}, CptSpec{3, {2}, {0.5, 0.5, 0.25, 0.75}}});
  Evidence e;
  e.set(1, 1);
  e.set(3, 0);
  const DecomposedPotential in = cpts(net, e);
  const DecomposedPotential lik({in.factors()[1], in.factors()[3]});
  // with only the two likelihood slices as input nothing is eliminable: both idle
  CHECK(spi_solve(Query{lik, {0, 2}, e}).size() == 2);

  // the two child CPTs, eliminating Y1 and Y2
  const DecomposedPotential kids({net.cpt(1), net.cpt(3)});
  const auto groups = identify_source_potentials(kids.factors(), {0, 2});
  CHECK(groups.size() == 2);
  const DecomposedPotential r = spi_solve(Query{kids, {0, 2}, {}});
  CHECK(r.size() == 2);
  // with the priors too, those stay idle beside the two results
  CHECK(spi_solve(Query{cpts(net), {0, 2}, {}}).size() == 4);
}

TEST_CASE("source potentials") {
  const auto ay = make_factor(Potential({}, {0, 1}, {2, 2}, {1, 2, 3, 4}));
  const auto yb = make_factor(Potential({}, {1, 2}, {2, 2}, {1, 2, 3, 4}));
  const std::vector<FactorPtr> linked{ay, yb};
  const auto one = identify_source_potentials(linked, {0, 2});
  REQUIRE(one.size() == 1);
  CHECK(one[0].size() == 2);

  const auto ay1 = make_factor(Potential({}, {0, 3}, {2, 2}, {1, 2, 3, 4}));
  const auto by2 = make_factor(Potential({}, {2, 4}, {2, 2}, {1, 2, 3, 4}));
  const std::vector<FactorPtr> apart{ay1, by2};
  const auto two = identify_source_potentials(apart, {0, 2});
  REQUIRE(two.size() == 2);
  CHECK(two[0].size() == 1);
  CHECK(two[1].size() == 1);

  CHECK(identify_source_potentials({}, {0}).empty());
}

TEST_CASE("SPI pair selection") {
  // A=0 (2), Y=1 (10), B=2 (2), C=3 (2); targets A, B, C
  auto f = [](VarSet dom, std::vector<int> cards) {
    return make_factor(Potential({}, std::move(dom), cards, std::vector<double>(table_size(cards), 1.0)));
  };
  const VarSet target{0, 2, 3};
  {
    // combining the two Y factors lets Y go: size 2 beats the 40 of {A,Y}x{A,B}
    const std::vector<SpiFactor> live{{f({0, 1}, {2, 10}), 0}, {f({1}, {10}), 1}, {f({0, 2}, {2, 2}), 2}};
    const std::vector<std::pair<std::size_t, std::size_t>> cands{{0, 2}, {0, 1}};
    CHECK(spi_select_pair(cands, live, target) == std::pair<std::size_t, std::size_t>{0, 1});
  }
  {
    const std::vector<SpiFactor> live{{f({0}, {2}), 0}, {f({2}, {2}), 1}};
    const std::vector<std::pair<std::size_t, std::size_t>> cands{{0, 1}};
    CHECK(spi_select_pair(cands, live, target) == std::pair<std::size_t, std::size_t>{0, 1});
  }
  {
    // result sizes 8 and 16
    const std::vector<SpiFactor> live{{f({0, 2}, {2, 2}), 0}, {f({2, 3}, {2, 2}), 1}, {f({0, 3, 4}, {2, 2, 4}), 2}};
    const VarSet t{0, 2, 3, 4};
    const std::vector<std::pair<std::size_t, std::size_t>> cands{{0, 2}, {0, 1}};
    CHECK(spi_select_pair(cands, live, t) == std::pair<std::size_t, std::size_t>{0, 1});
  }
  {
    // equal sizes: lexicographically smaller union domain first
    const std::vector<SpiFactor> live{{f({0, 3}, {2, 2}), 0}, {f({0, 2}, {2, 2}), 1}, {f({2, 3}, {2, 2}), 2}};
    const std::vector<std::pair<std::size_t, std::size_t>> cands{{1, 2}, {0, 1}};
    CHECK(spi_select_pair(cands, live, target) == std::pair<std::size_t, std::size_t>{0, 1});
  }
}

TEST_CASE("arc reversal with a deterministic child") {
  const Potential py({0}, {}, {2}, {0.5, 0.5});
  const Potential px({1}, {0}, {2, 2}, {1.0, 0.0, 0.0, 1.0});
  const ReversedArc r = reverse_arc(py, px);
  CHECK(r.child.head() == VarSet{1});
  CHECK(r.child.tail().empty());
  CHECK(r.child.table() == std::vector<double>{0.5, 0.5});
  REQUIRE(r.parent);
  CHECK(r.parent->head() == VarSet{0});
  CHECK(r.parent->tail() == VarSet{1});
  // domain (Y, X): P(Y|X) is the identity
  CHECK(r.parent->table() == std::vector<double>{1.0, 0.0, 0.0, 1.0});
}

TEST_CASE("arc reversal between independent variables") {
  const Potential py({0}, {}, {2}, {0.3, 0.7});
  const Potential px({1}, {0}, {2, 3}, {0.2, 0.3, 0.5, 0.2, 0.3, 0.5});
  const ReversedArc r = reverse_arc(py, px);
  CHECK(max_abs_diff(r.child.table(), {0.2, 0.3, 0.5}) < 1e-15);
  REQUIRE(r.parent);
  CHECK(max_abs_diff(r.parent->table(), {0.3, 0.3, 0.3, 0.7, 0.7, 0.7}) < 1e-15);
}

TEST_CASE("arc reversal with an unsupported child state uses 0/0 = 0") {
  const Potential py({0}, {}, {2}, {0.5, 0.5});
  const Potential px({1}, {0}, {2, 2}, {1.0, 0.0, 1.0, 0.0});
  const ReversedArc r = reverse_arc(py, px);
  CHECK(r.child.table() == std::vector<double>{1.0, 0.0});
  CHECK(r.parent->table() == std::vector<double>{0.5, 0.0, 0.5, 0.0});
  CHECK_FALSE(reverse_arc(py, px, false).parent.has_value());
}

TEST_CASE("arc reversal on the three-context shape") {
  // I=0, J=1, K=2, Y=3, X=4: pa(Y) = {I,J}, pa(X) = {Y,J,K}
  Rng rng(21);
  const std::vector<int> cards{2, 3, 2, 2, 3};
  const BayesianNetwork net(
      {binary(0, "I"), Variable{1, "J", {"a", "b", "c"}}, binary(2, "K"), binary(3, "Y"), Variable{4, "X", {"a", "b", "c"}}},
      {CptSpec{0, {}, random_cpt(rng, 2, 1)}, CptSpec{1, {}, random_cpt(rng, 3, 1)}, CptSpec{2, {}, random_cpt(rng, 2, 1)},
       CptSpec{3, {0, 1}, random_cpt(rng, 2, 6)}, CptSpec{4, {3, 1, 2}, random_cpt(rng, 3, 12)}});
  const ReversedArc r = reverse_arc(*net.cpt(3), *net.cpt(4));
  CHECK(r.child.head() == VarSet{4});
  CHECK(r.child.tail() == VarSet{0, 1, 2});
  REQUIRE(r.parent);
  CHECK(r.parent->head() == VarSet{3});
  CHECK(r.parent->tail() == VarSet{0, 1, 2, 4});
  const Potential before = multiply(*net.cpt(3), *net.cpt(4));
  const Potential after = multiply(r.child, *r.parent);
  CHECK(max_rel_diff(before.table(), after.table()) <= 1e-12);
  // P(Y | ...) slices sum to one
  const Potential slices = sum_out(*r.parent, {3});
  for (double x : slices.table()) CHECK(x == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("eliminating A in the four-variable shape") {
  const auto net = four_shape();
  const DecomposedPotential q({net.cpt(0), net.cpt(3), net.cpt(4)});
  const VarSet target{1, 2, 3, 4};
  const DecomposedPotential ar = ar_solve(Query{q, target, {}});
  const DecomposedPotential ve = ve_solve(Query{q, target, {}});
  CHECK(ar.size() >= 2);
  for (const auto& f : ar) CHECK(f->head().size() <= 1);
  REQUIRE(ve.size() == 1);
  CHECK(ve.factors()[0]->domain() == target);
  const Potential a = on_domain(contract(ar), target, cards_of(net));
  CHECK(max_rel_diff(a.table(), ve.factors()[0]->table()) <= 1e-12);
}

TEST_CASE("AR rejects factors outside its discipline") {
  const auto p1 = make_factor(Potential({0}, {}, {2}, {0.3, 0.7}));
  const auto p2 = make_factor(Potential({0}, {}, {2}, {0.5, 0.5}));
  CHECK_THROWS_AS(ar_solve(Query{DecomposedPotential({p1, p2}), {}, {}}), StructuralError);
  const auto two = make_factor(Potential({0, 1}, {}, {2, 2}, {0.25, 0.25, 0.25, 0.25}));
  CHECK_THROWS_AS(ar_solve(Query{DecomposedPotential({two}), {}, {}}), StructuralError);
  // a tail variable without a head factor
  const auto orphan = make_factor(Potential({1}, {0}, {2, 2}, {0.5, 0.5, 0.5, 0.5}));
  CHECK_THROWS_AS(ar_solve(Query{DecomposedPotential({orphan}), {1}, {}}), StructuralError);
}

TEST_CASE("AR folds likelihoods into the eliminated variable") {
  const auto net = chain();
  Evidence e;
  e.set(2, 1);
  const DecomposedPotential in = cpts(net, e);
  const DecomposedPotential r = ar_solve(Query{in, {0}, e});
  for (const auto& f : r) CHECK(f->head().size() <= 1);
  const Potential got = on_domain(contract(r), {0}, cards_of(net));
  CHECK(max_rel_diff(got.table(), brute(in, {0}).table()) <= 1e-12);
}

TEST_CASE("solve dispatch and the query check") {
  const auto net = chain();
  Evidence e;
  e.set(1, 0);
  CHECK_THROWS_AS(check_query(Query{cpts(net), {1}, e}), DomainError);
  CHECK_THROWS_AS(check_query(Query{cpts(net), {0}, e}), DomainError);  // factors not instantiated
  CHECK_NOTHROW(check_query(Query{cpts(net, e), {0}, e}));
  for (BackendKind k : {BackendKind::VE, BackendKind::SPI, BackendKind::AR}) {
    const Potential c = on_domain(contract(solve(k, Query{cpts(net, e), {2}, e})), {2}, cards_of(net));
    CHECK(max_rel_diff(c.table(), brute(cpts(net, e), {2}).table()) <= 1e-12);
  }
  CHECK(parse_backend("spi") == BackendKind::SPI);
  CHECK(to_string(BackendKind::AR) == "ar");
  CHECK_THROWS_AS(parse_backend("VE"), ValidationError);
}

TEST_CASE("backends agree with brute force on random queries") {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    GeneratorParams p;
    p.num_variables = 4 + static_cast<int>(seed % 7);
    p.max_states = 3;
    p.max_parents = 3;
    p.seed = seed;
    const auto net = gen_network(p);
    const auto n = static_cast<VarId>(net.size());
    Rng rng(seed * 7919);
    const Evidence e = gen_evidence(net, static_cast<int>(rng.uniform_int(0, 2)), seed);
    VarSet target;
    for (VarId v = 0; v < n; ++v) {
      if (!e.contains(v) && rng.uniform01() < 0.3) target.push_back(v);
    }
    const DecomposedPotential in = cpts(net, e);
    const Query q{in, target, e};
    const VarSet dom = set_intersection(in.domain(), target);
    const Potential expect = on_domain(brute(in, target), dom, cards_of(net));
    CAPTURE(seed);
    std::vector<std::vector<double>> got;
    for (BackendKind k : {BackendKind::VE, BackendKind::SPI, BackendKind::AR}) {
      TableStats stats;
      DecomposedPotential r;
      {
        TableMeter m(stats);
        r = solve(k, q);
      }
      for (const auto& f : r) CHECK(set_includes(in.domain(), f->domain()));
      CHECK(stats.max_table_size <= state_space_size(net.cardinalities(in.domain())));
      if (k == BackendKind::AR) {
        for (const auto& f : r) CHECK(f->head().size() <= 1);
      }
      const Potential c = on_domain(contract(r), dom, cards_of(net));
      CHECK(max_rel_diff(c.table(), expect.table()) <= 1e-12);
      got.push_back(c.table());
    }
    CHECK(max_rel_diff(got[0], got[1]) <= 1e-12);
    CHECK(max_rel_diff(got[0], got[2]) <= 1e-12);
  }
}

TEST_CASE("reversal identity on random pairs") {
  Rng rng(99);
  const std::vector<int> cards{2, 3, 2, 3, 2, 4};
  for (int trial = 0; trial < 100; ++trial) {
    // Y=4, X=5, I/J/K drawn from 0..3
    VarSet ty, tx{4};
    for (VarId v = 0; v < 4; ++v) {
      const double u = rng.uniform01();
      if (u < 0.3) ty.push_back(v);
      else if (u < 0.6) tx.push_back(v);
      else if (u < 0.8) {
        ty.push_back(v);
        tx.push_back(v);
      }
    }
    tx = make_set(tx);
    Potential py = random_potential(rng, {4}, ty, cards);
    py = divide(py, sum_out(py, {4}));
    Potential px = random_potential(rng, {5}, tx, cards);
    px = divide(px, sum_out(px, {5}));
    const ReversedArc r = reverse_arc(py, px);
    const Potential lhs = multiply(py, px);
    const Potential rhs = multiply(r.child, *r.parent);
    REQUIRE(lhs.domain() == rhs.domain());
    CHECK(max_rel_diff(lhs.table(), rhs.table()) <= 1e-12);
  }
}
