#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "lazybn/graphs.hpp"
#include "lazybn/model.hpp"
#include "lazybn/query.hpp"

namespace lazybn {

/// xoshiro256** with its state filled from splitmix64(seed).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next();
  /// Uniform on [lo, hi], unbiased by rejection.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi);
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

inline constexpr std::string_view kRngDescription = "xoshiro256** seeded via splitmix64";

struct GeneratorParams {
  int num_variables = 50;
  int max_parents = 5;
  int min_states = 2;
  int max_states = 5;
  std::uint64_t seed = 1;
};

/// Throws ValidationError for invalid parameters.
BayesianNetwork gen_network(const GeneratorParams& p);

/// Forward-samples `net` and reveals k distinct variables of the sample.
Evidence gen_evidence(const BayesianNetwork& net, int k, std::uint64_t seed);

/// Seed of the j-th evidence set of size k on a network.
std::uint64_t derive_evidence_seed(std::uint64_t network_seed, int k, int j);

struct BenchRow {
  std::uint64_t network_seed = 0;
  std::uint64_t evidence_seed = 0;
  BackendKind backend = BackendKind::VE;
  bool minimalize = false;
  int num_evidence = 0;
  std::uint64_t max_potential_size = 0;
  std::uint64_t max_clique_size = 0;
  std::uint64_t total_clique_size = 0;
  double time_ms = 0.0;
  double posterior_checksum = 0.0;
};

struct BenchConfig {
  /// num_variables, max_parents and state bounds; the seed is taken from network_seeds.
  GeneratorParams generator;
  std::vector<std::uint64_t> network_seeds{1};
  std::vector<int> evidence_sizes{0};
  int sets_per_size = 1;
  std::vector<BackendKind> backends{BackendKind::VE, BackendKind::SPI, BackendKind::AR};
  std::vector<bool> minimalize{false};
  int jobs = 1;
  bool check_invariants = false;
};

/// One fresh session: evidence, propagate, every posterior.
BenchRow bench_row(const BayesianNetwork& net, const JunctionTree& tree, const Evidence& evidence, BackendKind backend,
                   bool minimalize, bool check_invariants);

/// Rows ordered by (network, evidence size, set, backend, minimalize). A row
/// whose backend fails is reported on `log` and left out.
std::vector<BenchRow> run_bench(const BenchConfig& config, std::ostream* log = nullptr);

/// Same harness on a fixed network; network_seed is reported as 0.
std::vector<BenchRow> run_bench_on(const BayesianNetwork& net, const BenchConfig& config, std::ostream* log = nullptr);

inline constexpr std::string_view kCsvHeader =
    "network_seed,evidence_seed,backend,minimalize,num_evidence,max_potential_size,max_clique_size,"
    "total_clique_size,time_ms,posterior_checksum";

/// A `#` comment naming the RNG, then the header row, then one line per row.
void write_csv(std::ostream& out, const std::vector<BenchRow>& rows);
std::string format_real(double x);

/// `|V|=.., |C|=.., max s(C)=.., s(𝒞)=..`
std::string summary_line(const BayesianNetwork& net, const JunctionTree& tree);

}  // namespace lazybn
