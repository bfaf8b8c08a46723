// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifdef __GLIBC__
#include <malloc.h>
#endif

#include "lazybn/backends.hpp"
#include "lazybn/bench.hpp"
#include "lazybn/cli.hpp"
#include "lazybn/engine.hpp"
#include "lazybn/error.hpp"
#include "lazybn/oracle.hpp"

using namespace lazybn;

namespace {

constexpr double kPosteriorTol = 1e-9;
constexpr double kEvidenceRelTol = 1e-12;
constexpr double kReversalTol = 1e-12;
constexpr double kSliceTol = 1e-9;
constexpr double kContractTol = 1e-12;

constexpr BackendKind kBackends[] = {BackendKind::VE, BackendKind::SPI, BackendKind::AR};

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------
// the small-network suite shared by several criteria

struct SuiteStats {
  std::size_t cases = 0;
  std::size_t posteriors = 0;
  double oracle_err = 0.0;         // worst |engine - oracle|
  double backend_err = 0.0;        // worst pairwise backend difference, same minimalize flag
  double pe_rel_err = 0.0;         // worst relative P(e) spread over backends x roots
  double minimalize_err = 0.0;     // worst on/off difference, same backend
  std::size_t errors = 0;          // exceptions of any kind
  std::size_t invariant_errors = 0;
  std::size_t ar_head_violations = 0;
  std::uint64_t ar_checks = 0;
  std::uint64_t constancy_checks = 0;
  std::vector<std::string> notes;
};

SuiteStats run_suite() {
  SuiteStats st;
  const std::uint64_t ar0 = ar_structure_checks();
  const std::uint64_t tc0 = tail_constancy_checks();
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    GeneratorParams p;
    p.num_variables = 6 + static_cast<int>((seed - 1) % 7);
    p.max_states = 4;
    p.seed = seed;
    const BayesianNetwork net = gen_network(p);
    const JunctionTree tree = build_junction_tree(net);
    for (int k : {0, 1, 2, 4}) {
      const Evidence e = gen_evidence(net, k, derive_evidence_seed(seed, k, 0));
      const auto want = oracle_posteriors(net, e);
      const double pe = oracle_probability_of_evidence(net, e);
      ++st.cases;
      // [backend][minimalize] -> per-variable posteriors
      std::map<std::pair<int, bool>, std::vector<std::vector<double>>> got;
      for (BackendKind b : kBackends) {
        for (bool m : {false, true}) {
          for (std::size_t root = 0; root < tree.size(); ++root) {
            SessionOptions o;
            o.backend = b;
            o.minimalize_tails = m;
            o.root = static_cast<int>(root);
            o.check_invariants = true;
            try {
              PropagationSession s(net, tree, o);
              s.enter_evidence(e);
              s.propagate();
              st.pe_rel_err = std::max(st.pe_rel_err, std::abs(s.probability_of_evidence() - pe) / pe);
              if (b == BackendKind::AR) {
                for (const auto& edge : tree.edges) {
                  for (const auto& msg : {s.message(edge.a, edge.b), s.message(edge.b, edge.a)}) {
                    for (const auto& f : *msg) st.ar_head_violations += f->head().size() > 1;
                  }
                }
              }
              if (root != 0) continue;  // posteriors from the default root; roots only vary P(e)
              auto& post = got[{static_cast<int>(b), m}];
              for (VarId v = 0; v < static_cast<VarId>(net.size()); ++v) {
                if (e.contains(v)) {
                  post.push_back(want[v]);
                  continue;
                }
                post.push_back(s.posterior(v));
                st.oracle_err = std::max(st.oracle_err, max_abs_diff(post.back(), want[v]));
                ++st.posteriors;
              }
            } catch (const InvariantViolation& ex) {
              ++st.invariant_errors;
              ++st.errors;
              if (st.notes.size() < 5) st.notes.push_back(ex.what());
            } catch (const std::exception& ex) {
              ++st.errors;
              if (st.notes.size() < 5) st.notes.push_back(ex.what());
            }
          }
        }
      }
      auto cmp = [&](std::pair<int, bool> a, std::pair<int, bool> b) {
        if (!got.count(a) || !got.count(b)) return 0.0;
        double worst = 0.0;
        for (std::size_t v = 0; v < got[a].size(); ++v) worst = std::max(worst, max_abs_diff(got[a][v], got[b][v]));
        return worst;
      };
      for (bool m : {false, true}) {
        st.backend_err = std::max({st.backend_err, cmp({0, m}, {1, m}), cmp({0, m}, {2, m}), cmp({1, m}, {2, m})});
      }
      for (int b = 0; b < 3; ++b) st.minimalize_err = std::max(st.minimalize_err, cmp({b, false}, {b, true}));
    }
  }
  st.ar_checks = ar_structure_checks() - ar0;
  st.constancy_checks = tail_constancy_checks() - tc0;
  return st;
}

// ---------------------------------------------------------------------------

void arc_reversal_identity() {
  Rng rng(20240501);
  double worst_product = 0.0;
  double worst_slice = 0.0;
  std::size_t unsupported = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    // variables 0..3 are context, 4 is Y, 5 is X
    std::vector<int> cards(6);
    for (int& c : cards) c = static_cast<int>(rng.uniform_int(2, 4));
    VarSet ty, tx{4};
    for (VarId v = 0; v < 4; ++v) {
      switch (rng.uniform_int(0, 3)) {
        case 0: ty.push_back(v); break;
        case 1: tx.push_back(v); break;
        case 2:
          ty.push_back(v);
          tx.push_back(v);
          break;
        default: break;
      }
    }
    tx = make_set(tx);
    auto conditional = [&](VarId head, const VarSet& tail) {
      const VarSet dom = make_set([&] {
        VarSet d = tail;
        d.push_back(head);
        return d;
      }());
      std::vector<int> c;
      for (VarId v : dom) c.push_back(cards[v]);
      std::vector<double> t(table_size(c));
      // some exact zeros, so unsupported configurations occur
      for (double& x : t) x = rng.uniform01() < 0.2 ? 0.0 : rng.uniform01();
      Potential raw({}, dom, c, t);
      Potential z = sum_out(raw, {head});
      std::vector<double> zt = z.table();
      for (double& x : zt) x = x > 0.0 ? x : 1.0;  // all-zero columns stay zero
      return Potential({head}, tail, c, divide(raw, Potential({}, z.domain(), z.cards(), zt)).table());
    };
    const Potential py = conditional(4, ty);
    const Potential px = conditional(5, tx);
    const ReversedArc r = reverse_arc(py, px);
    const Potential lhs = multiply(py, px);
    const Potential rhs = multiply(r.child, *r.parent);
    const Potential support = multiply(r.child, Potential::ones(lhs.domain(), lhs.cards()));
    for (std::size_t i = 0; i < lhs.size(); ++i) {
      if (support.table()[i] > 0.0) worst_product = std::max(worst_product, std::abs(lhs.table()[i] - rhs.table()[i]));
    }
    const Potential slices = sum_out(*r.parent, {4});
    const Potential child_on = multiply(r.child, Potential::ones(slices.domain(), slices.cards()));
    for (std::size_t i = 0; i < slices.size(); ++i) {
      if (child_on.table()[i] > 0.0) {
        worst_slice = std::max(worst_slice, std::abs(slices.table()[i] - 1.0));
      } else {
        ++unsupported;
      }
    }
  }
  report(worst_product <= kReversalTol && worst_slice <= kSliceTol, "arc reversal identity",
         "1000 random pairs, max |phi_y*phi_x - phi'_x*phi'_y| = " + fmt(worst_product) +
             " (tol 1e-12), max |sum_y phi'_y - 1| = " + fmt(worst_slice) + " (tol 1e-9), " +
             std::to_string(unsupported) + " unsupported configurations skipped");
}

void two_child_elimination() {
  // A=0 with parents B=1, C=2; D=3 with parents A, B; E=4 with parents A, C
  Rng rng(4);
  auto col = [&](int card, int columns) {
    std::vector<double> t;
    for (int c = 0; c < columns; ++c) {
      double sum = 0.0;
      std::vector<double> v(card);
      for (double& x : v) sum += (x = 0.05 + rng.uniform01());
      for (double x : v) t.push_back(x / sum);
    }
    return t;
  };
  auto var = [](VarId id, const char* name, int card) {
    Variable v{id, name, {}};
    for (int s = 0; s < card; ++s) v.states.push_back("s" + std::to_string(s));
    return v;
  };
  const BayesianNetwork net({var(0, "A", 2), var(1, "B", 2), var(2, "C", 3), var(3, "D", 3), var(4, "E", 2)},
                            {CptSpec{0, {1, 2}, col(2, 6)}, CptSpec{1, {}, col(2, 1)}, CptSpec{2, {}, col(3, 1)},
                             CptSpec{3, {0, 1}, col(3, 4)}, CptSpec{4, {0, 2}, col(2, 6)}});
  const DecomposedPotential q({net.cpt(0), net.cpt(3), net.cpt(4)});
  const VarSet target{1, 2, 3, 4};
  const DecomposedPotential ar = ar_solve(Query{q, target, {}});
  const DecomposedPotential ve = ve_solve(Query{q, target, {}});
  bool single_heads = true;
  for (const auto& f : ar) single_heads = single_heads && f->head().size() == 1;
  const bool ve_one = ve.size() == 1 && ve.factors()[0]->domain() == target;
  const Potential a = contract(ar);
  double diff = INFINITY;
  if (ve_one && a.domain() == target) diff = max_abs_diff(a.table(), ve.factors()[0]->table());
  report(ar.size() >= 2 && single_heads && ve_one && diff <= kContractTol, "two-child elimination discrimination",
         "eliminating A from {P(A|B,C), P(D|A,B), P(E|A,C)}: AR returns " + std::to_string(ar.size()) +
             " single-head factors, VE returns " + std::to_string(ve.size()) + " factor over {B,C,D,E}" +
             ", max contract difference " + fmt(diff) + " (tol 1e-12)");
}

struct TrendResult {
  std::vector<BenchRow> rows;
  double seconds = 0.0;
};

TrendResult evidence_trend_rows() {
  BenchConfig c;
  c.generator.num_variables = 50;
  c.network_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  c.evidence_sizes = {0, 15};
  c.sets_per_size = 25;
  c.minimalize = {false};
  std::ostringstream log;
  const auto start = std::chrono::steady_clock::now();
  TrendResult r{run_bench(c, &log), 0.0};
  r.seconds = seconds_since(start);
  if (!log.str().empty()) std::cerr << log.str();
  return r;
}

void evidence_trend(const TrendResult& t) {
  struct Acc {
    double size = 0.0, time = 0.0;
    int n = 0;
  };
  std::map<std::pair<BackendKind, int>, Acc> acc;
  for (const auto& r : t.rows) {
    auto& a = acc[{r.backend, r.num_evidence}];
    a.size += static_cast<double>(r.max_potential_size);
    a.time += r.time_ms;
    ++a.n;
  }
  bool ok = t.rows.size() == 10 * 25 * 2 * 3;
  std::string detail = std::to_string(t.rows.size()) + "/1500 rows in " + fmt(t.seconds) + " s;";
  for (BackendKind b : kBackends) {
    const Acc& z = acc[{b, 0}];
    const Acc& f = acc[{b, 15}];
    if (z.n == 0 || f.n == 0) {
      ok = false;
      continue;
    }
    const double sz = z.size / z.n, sf = f.size / f.n, tz = z.time / z.n, tf = f.time / f.n;
    ok = ok && sf <= sz && tf <= tz;
    detail += " " + std::string(to_string(b)) + ": mean max size " + fmt(sz) + " -> " + fmt(sf) + ", mean ms " +
              fmt(tz) + " -> " + fmt(tf) + ";";
  }
  detail.pop_back();
  report(ok, "evidence trend", detail);
}

void message_locality(const TrendResult& t) {
  BenchConfig c;
  c.generator.num_variables = 30;
  c.network_seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  c.evidence_sizes = {0, 1, 2, 4, 8, 15};
  c.sets_per_size = 2;
  c.minimalize = {false, true};
  std::vector<BenchRow> rows = run_bench(c);
  rows.insert(rows.end(), t.rows.begin(), t.rows.end());
  std::size_t violations = 0, strictly_smaller = 0;
  double ratio = 0.0;
  for (const auto& r : rows) {
    violations += r.max_potential_size > r.max_clique_size;
    strictly_smaller += r.max_potential_size < r.max_clique_size;
    ratio += static_cast<double>(r.max_potential_size) / static_cast<double>(r.max_clique_size);
  }
  report(violations == 0 && rows.size() == 1500 + 10 * 6 * 2 * 3 * 2, "message locality",
         std::to_string(rows.size()) + " rows, " + std::to_string(violations) +
             " with max_potential_size > max_clique_size; strictly smaller in " + std::to_string(strictly_smaller) +
             " rows, mean ratio " + fmt(ratio / static_cast<double>(rows.size())));
}

void determinism() {
  const std::vector<std::string> args{"bench",     "--nodes",      "30",     "--networks",  "4",  "--seed", "3",
                                      "--evidence-sizes", "0,5,12", "--sets", "3", "--minimalize", "0,1"};
  auto run = [&](std::vector<std::string> a) {
    std::ostringstream out, err;
    const int code = run_cli(a, out, err);
    // drop the time_ms column
    std::istringstream in(out.str());
    std::string line, stripped;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') {
        stripped += line + '\n';
        continue;
      }
      std::vector<std::string> cols;
      std::stringstream ls(line);
      std::string col;
      while (std::getline(ls, col, ',')) cols.push_back(col);
      if (cols.size() == 10) cols.erase(cols.begin() + 8);
      for (const auto& x : cols) stripped += x + ',';
      stripped += '\n';
    }
    return std::pair{code, stripped};
  };
  const auto a = run(args);
  const auto b = run(args);
  std::vector<std::string> threaded = args;
  threaded.insert(threaded.end(), {"--jobs", "3"});
  const auto c = run(threaded);
  const std::size_t lines = std::count(a.second.begin(), a.second.end(), '\n');
  report(a.first == 0 && b.first == 0 && c.first == 0 && a.second == b.second && a.second == c.second && lines > 2,
         "determinism",
         "two identical bench runs and a --jobs 3 run: " + std::to_string(lines - 2) + " rows, CSV " +
             (a.second == b.second && a.second == c.second ? "byte-identical" : "DIFFERENT") + " without time_ms");
}

}  // namespace

int main() {
#ifdef __GLIBC__
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  auto start = std::chrono::steady_clock::now();
  const SuiteStats st = run_suite();
  const double suite_s = seconds_since(start);
  const std::string base = std::to_string(st.cases) + " cases on 100 networks";
  std::string notes;
  for (const auto& n : st.notes) notes += "; " + n;

  report(st.errors == 0 && st.oracle_err <= kPosteriorTol, "oracle equivalence",
         base + ", " + std::to_string(st.posteriors) + " posteriors over 6 backend x minimalize runs, max |err| " +
             fmt(st.oracle_err) + " (tol 1e-9), " + std::to_string(st.errors) + " errors, " + fmt(suite_s) + " s" +
             notes);
  report(st.errors == 0 && st.backend_err <= kPosteriorTol && st.pe_rel_err <= kEvidenceRelTol,
         "cross-backend agreement",
         base + ", max pairwise posterior difference " + fmt(st.backend_err) + " (tol 1e-9), max relative P(e) error " +
             "over backends x roots " + fmt(st.pe_rel_err) + " (tol 1e-12)");
  report(st.invariant_errors == 0 && st.ar_head_violations == 0 && st.ar_checks > 0, "AR structural invariants",
         std::to_string(st.ar_checks) + " structure checks after reversals, " + std::to_string(st.invariant_errors) +
             " violations, " + std::to_string(st.ar_head_violations) + " multi-head message factors");
  report(st.errors == 0 && st.minimalize_err <= kPosteriorTol && st.constancy_checks > 0, "minimalization soundness",
         "max on/off posterior difference " + fmt(st.minimalize_err) + " (tol 1e-9), " +
             std::to_string(st.constancy_checks) + " dropped tail variables checked, " +
             std::to_string(st.invariant_errors) + " constancy failures");

  arc_reversal_identity();
  two_child_elimination();
  determinism();

  const TrendResult trend = evidence_trend_rows();
  message_locality(trend);
  evidence_trend(trend);

  std::printf("%d criteria failed, total %.1f s\n", failures, seconds_since(start));
  return failures == 0 ? 0 : 1;
}
