#include "lazybn/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "lazybn/bench.hpp"
#include "lazybn/engine.hpp"
#include "lazybn/error.hpp"
#include "lazybn/oracle.hpp"

namespace lazybn {

namespace {

struct InferArgs {
  std::string network;
  std::string backend = "ve";
  std::vector<std::string> evidence;
  std::string evidence_file;
  bool minimalize = false;
  int root = 0;
  bool metrics = false;
};

struct GenArgs {
  int nodes = 0;
  std::uint64_t seed = 1;
  std::string out;
  int max_parents = 5;
  int min_states = 2;
  int max_states = 5;
};

struct BenchArgs {
  std::string network;
  int nodes = 50;
  int networks = 1;
  std::uint64_t seed = 1;
  int max_parents = 5;
  int min_states = 2;
  int max_states = 5;
  std::vector<int> evidence_sizes{0};
  int sets = 1;
  std::vector<std::string> backends{"ve", "spi", "ar"};
  std::vector<int> minimalize{0};
  int jobs = 1;
  std::string out;
  bool summary = false;
  bool check = false;
};

/// LAZYBN_SEED wins over --seed.
std::uint64_t effective_seed(std::uint64_t flag) {
  const char* env = std::getenv("LAZYBN_SEED");
  if (env == nullptr || *env == '\0') return flag;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || *end != '\0' || *env == '-') throw ValidationError("LAZYBN_SEED is not an unsigned integer");
  return v;
}

Evidence read_evidence(const BayesianNetwork& net, const InferArgs& a) {
  Evidence e = parse_evidence(net, a.evidence);
  if (!a.evidence_file.empty()) {
    for (const auto& [v, s] : load_evidence(net, a.evidence_file)) e.set(v, s);
  }
  return e;
}

void print_distribution(std::ostream& out, const std::string& name, const std::vector<double>& p) {
  out << name << ':';
  for (double x : p) out << ' ' << format_real(x);
  out << '\n';
}

std::vector<double> point_mass(int card, int state) {
  std::vector<double> p(card, 0.0);
  p[state] = 1.0;
  return p;
}

int do_infer(const InferArgs& a, std::ostream& out) {
  const BackendKind backend = parse_backend(a.backend);
  const BayesianNetwork net = load_network(a.network);
  const Evidence e = read_evidence(net, a);
  const JunctionTree tree = build_junction_tree(net);
  if (a.root < 0 || static_cast<std::size_t>(a.root) >= tree.size())
    throw ValidationError("--root must be in [0, " + std::to_string(tree.size()) + ")");

  SessionOptions opts;
  opts.backend = backend;
  opts.minimalize_tails = a.minimalize;
  opts.root = a.root;
  PropagationSession session(net, tree, opts);
  session.enter_evidence(e);
  session.propagate();
  const double pe = session.probability_of_evidence();
  if (!(pe > 0.0)) throw ImpossibleEvidence("evidence has zero probability");

  std::ostringstream buf;
  for (const auto& v : net.variables()) {
    print_distribution(buf, v.name, e.contains(v.id) ? point_mass(v.cardinality(), e.state(v.id)) : session.posterior(v.id));
  }
  buf << "P(evidence)=" << format_real(pe) << '\n';
  if (a.metrics) {
    const Metrics& m = session.metrics();
    buf << "metrics: max_potential_size=" << m.max_potential_size << " messages_computed=" << m.messages_computed
        << " tables_multiplied=" << m.tables_multiplied << " tables_created=" << m.tables_created
        << " max_clique_size=" << tree.max_clique_size() << " elapsed_ms="
        << format_real(std::chrono::duration<double, std::milli>(m.elapsed).count()) << '\n';
  }
  out << buf.str();
  return 0;
}

int do_oracle(const InferArgs& a, std::ostream& out) {
  const BayesianNetwork net = load_network(a.network);
  const Evidence e = read_evidence(net, a);
  const double pe = oracle_probability_of_evidence(net, e);
  if (!(pe > 0.0)) throw ImpossibleEvidence("evidence has zero probability");
  std::ostringstream buf;
  for (const auto& v : net.variables()) {
    print_distribution(buf, v.name,
                       e.contains(v.id) ? point_mass(v.cardinality(), e.state(v.id)) : oracle_posterior(net, e, v.id));
  }
  buf << "P(evidence)=" << format_real(pe) << '\n';
  out << buf.str();
  return 0;
}

int do_gen(const GenArgs& a) {
  GeneratorParams p;
  p.num_variables = a.nodes;
  p.max_parents = a.max_parents;
  p.min_states = a.min_states;
  p.max_states = a.max_states;
  p.seed = effective_seed(a.seed);
  save_network(gen_network(p), a.out);
  return 0;
}

int do_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  BenchConfig c;
  c.generator.num_variables = a.nodes;
  c.generator.max_parents = a.max_parents;
  c.generator.min_states = a.min_states;
  c.generator.max_states = a.max_states;
  if (a.networks < 1) throw ValidationError("--networks must be at least 1");
  if (a.sets < 1) throw ValidationError("--sets must be at least 1");
  if (a.jobs < 1) throw ValidationError("--jobs must be at least 1");
  const std::uint64_t first = effective_seed(a.seed);
  c.network_seeds.clear();
  for (int i = 0; i < a.networks; ++i) c.network_seeds.push_back(first + static_cast<std::uint64_t>(i));
  c.evidence_sizes = a.evidence_sizes;
  c.sets_per_size = a.sets;
  c.backends.clear();
  for (const auto& b : a.backends) c.backends.push_back(parse_backend(b));
  c.minimalize.clear();
  for (int m : a.minimalize) {
    if (m != 0 && m != 1) throw ValidationError("--minimalize takes 0 and/or 1");
    c.minimalize.push_back(m == 1);
  }
  c.jobs = a.jobs;
  c.check_invariants = a.check;

  std::optional<BayesianNetwork> loaded;
  int max_k = a.nodes;
  if (!a.network.empty()) {
    loaded.emplace(load_network(a.network));
    max_k = static_cast<int>(loaded->size());
    if (a.summary) {
      out << summary_line(*loaded, build_junction_tree(*loaded)) << '\n';
      return 0;
    }
  } else if (a.summary) {
    throw ValidationError("--summary needs --network");
  } else {
    gen_network(GeneratorParams{a.nodes, a.max_parents, a.min_states, a.max_states, first});  // validates params
  }
  for (int k : c.evidence_sizes) {
    if (k < 0 || k > max_k) throw ValidationError("evidence size " + std::to_string(k) + " out of range");
  }

  const std::vector<BenchRow> rows = loaded ? run_bench_on(*loaded, c, &err) : run_bench(c, &err);
  if (a.out.empty()) {
    write_csv(out, rows);
  } else {
    std::ofstream f(a.out);
    if (!f) throw IoError("cannot open '" + a.out + "' for writing");
    write_csv(f, rows);
    if (!f) throw IoError("failed writing '" + a.out + "'");
  }
  return 0;
}

void add_evidence_options(CLI::App* cmd, InferArgs& a) {
  cmd->add_option("--network", a.network, "network file (JSON)")->required();
  cmd->add_option("--evidence", a.evidence, "observation name=state, repeatable");
  cmd->add_option("--evidence-file", a.evidence_file, "JSON object of name: state");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lazy propagation in discrete Bayesian networks", "lazybn"};
  app.require_subcommand(1);

  InferArgs infer;
  auto* infer_cmd = app.add_subcommand("infer", "posterior of every variable by lazy propagation");
  add_evidence_options(infer_cmd, infer);
  infer_cmd->add_option("--backend", infer.backend, "ve | spi | ar")->required();
  infer_cmd->add_flag("--minimalize-tails", infer.minimalize, "drop d-separated tail variables from messages");
  infer_cmd->add_option("--root", infer.root, "root clique index");
  infer_cmd->add_flag("--metrics", infer.metrics, "print table-size metrics");

  InferArgs oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "posteriors by full joint enumeration");
  add_evidence_options(oracle_cmd, oracle);

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "write a random network");
  gen_cmd->add_option("--nodes", gen.nodes, "number of variables")->required();
  gen_cmd->add_option("--seed", gen.seed, "RNG seed (LAZYBN_SEED overrides)");
  gen_cmd->add_option("--out", gen.out, "output file")->required();
  gen_cmd->add_option("--max-parents", gen.max_parents);
  gen_cmd->add_option("--min-states", gen.min_states);
  gen_cmd->add_option("--max-states", gen.max_states);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "benchmark rows as CSV");
  bench_cmd->add_option("--network", bench.network, "benchmark a fixed network instead of generated ones");
  bench_cmd->add_option("--nodes", bench.nodes, "variables per generated network");
  bench_cmd->add_option("--networks", bench.networks, "number of generated networks");
  bench_cmd->add_option("--seed", bench.seed, "first network seed (LAZYBN_SEED overrides)");
  bench_cmd->add_option("--max-parents", bench.max_parents);
  bench_cmd->add_option("--min-states", bench.min_states);
  bench_cmd->add_option("--max-states", bench.max_states);
  bench_cmd->add_option("--evidence-sizes", bench.evidence_sizes, "comma separated")->delimiter(',');
  bench_cmd->add_option("--sets", bench.sets, "evidence sets per size");
  bench_cmd->add_option("--backends", bench.backends, "comma separated")->delimiter(',');
  bench_cmd->add_option("--minimalize", bench.minimalize, "0, 1 or 0,1")->delimiter(',');
  bench_cmd->add_option("--jobs", bench.jobs, "worker threads");
  bench_cmd->add_option("--out", bench.out, "CSV file (default: stdout)");
  bench_cmd->add_flag("--summary", bench.summary, "print the junction tree summary of --network and exit");
  bench_cmd->add_flag("--check-invariants", bench.check, "run the structural self-checks");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }

  try {
    if (*infer_cmd) return do_infer(infer, out);
    if (*oracle_cmd) return do_oracle(oracle, out);
    if (*gen_cmd) return do_gen(gen);
    if (*bench_cmd) return do_bench(bench, out, err);
  } catch (const ImpossibleEvidence& e) {
    err << "error: impossible evidence: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << "error: no command\n";
  return 1;
}

}  // namespace lazybn
