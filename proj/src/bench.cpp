#include "lazybn/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "lazybn/engine.hpp"
#include "lazybn/error.hpp"

namespace lazybn {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {
inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
}  // namespace

Rng::Rng(std::uint64_t seed) {
  for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

std::uint64_t Rng::uniform_int(std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  if (span == 0) return next();  // full 64-bit range
  const std::uint64_t threshold = (0 - span) % span;
  for (;;) {
    const std::uint64_t r = next();
    if (r >= threshold) return lo + r % span;
  }
}

double Rng::uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

BayesianNetwork gen_network(const GeneratorParams& p) {
  if (p.num_variables < 1) throw ValidationError("num_variables must be at least 1");
  if (p.min_states < 2 || p.max_states < p.min_states) throw ValidationError("need 2 <= min_states <= max_states");
  if (p.max_parents < 0) throw ValidationError("max_parents must be non-negative");

  Rng rng(p.seed);
  const int n = p.num_variables;
  std::vector<Variable> vars(n);
  for (int i = 0; i < n; ++i) {
    vars[i].id = i;
    vars[i].name = "X" + std::to_string(i);
    const auto card = static_cast<int>(rng.uniform_int(p.min_states, p.max_states));
    for (int s = 0; s < card; ++s) vars[i].states.push_back("s" + std::to_string(s));
  }
  std::vector<CptSpec> cpts(n);
  for (int i = 0; i < n; ++i) {
    const auto k = static_cast<int>(rng.uniform_int(0, std::min(p.max_parents, i)));
    // partial Fisher-Yates over 0..i-1
    std::vector<VarId> pool(i);
    std::iota(pool.begin(), pool.end(), 0);
    for (int j = 0; j < k; ++j) {
      const auto pick = static_cast<int>(rng.uniform_int(j, i - 1));
      std::swap(pool[j], pool[pick]);
    }
    std::vector<VarId> parents(pool.begin(), pool.begin() + k);
    std::sort(parents.begin(), parents.end());

    std::size_t columns = 1;
    for (VarId par : parents) columns *= vars[par].states.size();
    const std::size_t card = vars[i].states.size();
    std::vector<double> table(columns * card);
    for (std::size_t c = 0; c < columns; ++c) {
      double sum = 0.0;
      for (std::size_t s = 0; s < card; ++s) {
        // keep entries away from zero so every column normalizes
        const double u = 1.0 - rng.uniform01();
        table[c * card + s] = u;
        sum += u;
      }
      for (std::size_t s = 0; s < card; ++s) table[c * card + s] /= sum;
    }
    cpts[i] = CptSpec{i, std::move(parents), std::move(table)};
  }
  return BayesianNetwork(std::move(vars), std::move(cpts));
}

Evidence gen_evidence(const BayesianNetwork& net, int k, std::uint64_t seed) {
  const int n = static_cast<int>(net.size());
  if (k < 0 || k > n) throw ValidationError("evidence size out of range");
  Rng rng(seed);
  std::vector<int> sample(n, 0);
  for (VarId v : net.topological_order()) {
    const CptSpec spec = net.cpt_spec(v);
    std::size_t offset = 0;
    for (VarId par : spec.parents) offset = offset * net.cardinality(par) + sample[par];
    const int card = net.cardinality(v);
    offset *= card;
    const double u = rng.uniform01();
    double acc = 0.0;
    int state = card - 1;
    for (int s = 0; s < card; ++s) {
      acc += spec.table[offset + s];
      if (u < acc && spec.table[offset + s] > 0.0) {
        state = s;
        break;
      }
    }
    // rounding can leave u past the last bucket; fall back to the last positive state
    while (spec.table[offset + state] <= 0.0 && state > 0) --state;
    sample[v] = state;
  }
  std::vector<VarId> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  for (int j = 0; j < k; ++j) {
    const auto pick = static_cast<int>(rng.uniform_int(j, n - 1));
    std::swap(ids[j], ids[pick]);
  }
  Evidence e;
  for (int j = 0; j < k; ++j) e.set(ids[j], sample[ids[j]]);
  return e;
}

std::uint64_t derive_evidence_seed(std::uint64_t network_seed, int k, int j) {
  std::uint64_t s = network_seed;
  std::uint64_t h = splitmix64(s);
  s = h ^ (static_cast<std::uint64_t>(k) << 32 | static_cast<std::uint32_t>(j));
  return splitmix64(s);
}

BenchRow bench_row(const BayesianNetwork& net, const JunctionTree& tree, const Evidence& evidence, BackendKind backend,
                   bool minimalize, bool check_invariants) {
  SessionOptions opts;
  opts.backend = backend;
  opts.minimalize_tails = minimalize;
  opts.check_invariants = check_invariants;
  PropagationSession session(net, tree, opts);
  session.enter_evidence(evidence);

  const auto start = std::chrono::steady_clock::now();
  session.propagate();
  double checksum = 0.0;
  for (std::size_t v = 0; v < net.size(); ++v) {
    const auto id = static_cast<VarId>(v);
    if (evidence.contains(id)) {
      checksum += evidence.state(id) == 0 ? 1.0 : 0.0;
    } else {
      checksum += session.posterior(id)[0];
    }
  }
  const auto stop = std::chrono::steady_clock::now();

  BenchRow row;
  row.backend = backend;
  row.minimalize = minimalize;
  row.num_evidence = static_cast<int>(evidence.size());
  row.max_potential_size = session.metrics().max_potential_size;
  row.max_clique_size = tree.max_clique_size();
  row.total_clique_size = tree.total_clique_size();
  row.time_ms = std::chrono::duration<double, std::milli>(stop - start).count();
  row.posterior_checksum = checksum;
  return row;
}

namespace {

struct Task {
  std::size_t network;
  std::uint64_t evidence_seed;
  int k;
  BackendKind backend;
  bool minimalize;
};

std::vector<BenchRow> run_tasks(const std::vector<const BayesianNetwork*>& nets, const std::vector<JunctionTree>& trees,
                                const std::vector<std::uint64_t>& seeds, const BenchConfig& config, std::ostream* log) {
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < nets.size(); ++i) {
    for (int k : config.evidence_sizes) {
      for (int j = 0; j < config.sets_per_size; ++j) {
        const std::uint64_t es = derive_evidence_seed(seeds[i], k, j);
        for (BackendKind b : config.backends) {
          for (bool m : config.minimalize) tasks.push_back({i, es, k, b, m});
        }
      }
    }
  }

  std::vector<std::optional<BenchRow>> results(tasks.size());
  std::vector<std::string> errors(tasks.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t t = cursor.fetch_add(1);
      if (t >= tasks.size()) return;
      const Task& task = tasks[t];
      try {
        const Evidence e = gen_evidence(*nets[task.network], task.k, task.evidence_seed);
        BenchRow row = bench_row(*nets[task.network], trees[task.network], e, task.backend, task.minimalize,
                                 config.check_invariants);
        row.network_seed = seeds[task.network];
        row.evidence_seed = task.evidence_seed;
        results[t] = row;
      } catch (const std::exception& ex) {
        errors[t] = ex.what();
      }
    }
  };
  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<BenchRow> rows;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    if (results[t]) {
      rows.push_back(*results[t]);
    } else if (log) {
      *log << "error: row skipped (network_seed=" << seeds[tasks[t].network]
           << ", evidence_seed=" << tasks[t].evidence_seed << ", backend=" << to_string(tasks[t].backend)
           << ", minimalize=" << tasks[t].minimalize << "): " << errors[t] << '\n';
    }
  }
  return rows;
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config, std::ostream* log) {
  std::vector<BayesianNetwork> nets;
  std::vector<JunctionTree> trees;
  nets.reserve(config.network_seeds.size());
  for (std::uint64_t seed : config.network_seeds) {
    GeneratorParams p = config.generator;
    p.seed = seed;
    nets.push_back(gen_network(p));
    trees.push_back(build_junction_tree(nets.back()));
  }
  std::vector<const BayesianNetwork*> ptrs;
  for (const auto& n : nets) ptrs.push_back(&n);
  return run_tasks(ptrs, trees, config.network_seeds, config, log);
}

std::vector<BenchRow> run_bench_on(const BayesianNetwork& net, const BenchConfig& config, std::ostream* log) {
  std::vector<JunctionTree> trees{build_junction_tree(net)};
  return run_tasks({&net}, trees, {0}, config, log);
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << "# rng=" << kRngDescription << '\n' << kCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.network_seed << ',' << r.evidence_seed << ',' << to_string(r.backend) << ',' << (r.minimalize ? 1 : 0)
        << ',' << r.num_evidence << ',' << r.max_potential_size << ',' << r.max_clique_size << ','
        << r.total_clique_size << ',' << format_real(r.time_ms) << ',' << format_real(r.posterior_checksum) << '\n';
  }
}

std::string summary_line(const BayesianNetwork& net, const JunctionTree& tree) {
  std::ostringstream s;
  s << "|V|=" << net.size() << ", |C|=" << tree.size() << ", max s(C)=" << tree.max_clique_size()
    << ", s(\xF0\x9D\x92\x9E)=" << tree.total_clique_size();
  return s.str();
}

}  // namespace lazybn
