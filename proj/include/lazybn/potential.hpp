#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace lazybn {

using VarId = std::int32_t;

/// Sorted, duplicate-free list of variable ids.
using VarSet = std::vector<VarId>;

VarSet set_union(const VarSet& a, const VarSet& b);
VarSet set_intersection(const VarSet& a, const VarSet& b);
VarSet set_difference(const VarSet& a, const VarSet& b);
bool set_contains(const VarSet& s, VarId v);
bool set_disjoint(const VarSet& a, const VarSet& b);
bool set_includes(const VarSet& super, const VarSet& sub);
VarSet make_set(std::vector<VarId> ids);

/// Hard evidence: a partial assignment variable -> state index.
class Evidence {
 public:
  Evidence() = default;

  /// Throws ValidationError if `var` is already assigned.
  void set(VarId var, int state);
  bool contains(VarId var) const { return assignments_.count(var) != 0; }
  int state(VarId var) const;
  std::size_t size() const { return assignments_.size(); }
  bool empty() const { return assignments_.empty(); }
  VarSet variables() const;

  auto begin() const { return assignments_.begin(); }
  auto end() const { return assignments_.end(); }

  friend bool operator==(const Evidence&, const Evidence&) = default;

 private:
  std::map<VarId, int> assignments_;
};

/// A non-negative table phi(H | T).
///
/// The domain is H u T sorted ascending by id; the table is laid out
/// row-major over that order, so the last domain variable varies fastest.
/// A non-empty head is a normalization claim: for every tail
/// configuration the entries summed over the head equal one. Operations
/// that cannot guarantee this produce an empty head (a likelihood).
class Potential {
 public:
  /// The unit scalar: empty domain, table [1.0].
  Potential();

  /// `cards` is aligned with the sorted domain head u tail.
  Potential(VarSet head, VarSet tail, std::vector<int> cards, std::vector<double> table);

  static Potential scalar(double value);
  static Potential ones(const VarSet& vars, std::vector<int> cards);

  const VarSet& head() const { return head_; }
  const VarSet& tail() const { return tail_; }
  const VarSet& domain() const { return domain_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<double>& table() const { return table_; }
  std::size_t size() const { return table_.size(); }

  bool contains(VarId v) const { return set_contains(domain_, v); }
  /// Position of `v` in the domain, or -1.
  int position(VarId v) const;
  int cardinality(VarId v) const;
  std::size_t stride(VarId v) const;

  /// Entry at a configuration aligned with domain().
  double at(std::span<const int> config) const;

  /// Same table, different head/tail split of the same domain.
  Potential relabel(VarSet head) const;

  bool is_unit() const { return domain_.empty() && table_[0] == 1.0; }

 private:
  VarSet head_;
  VarSet tail_;
  VarSet domain_;
  std::vector<int> cards_;
  std::vector<double> table_;
};

using FactorPtr = std::shared_ptr<const Potential>;

inline FactorPtr make_factor(Potential p) { return std::make_shared<const Potential>(std::move(p)); }

/// A set of factors standing for their (unevaluated) product.
class DecomposedPotential {
 public:
  DecomposedPotential() = default;
  explicit DecomposedPotential(std::vector<FactorPtr> factors);

  /// Adds `f` unless this exact object is already present.
  void add(FactorPtr f);
  const std::vector<FactorPtr>& factors() const { return factors_; }
  std::size_t size() const { return factors_.size(); }
  bool empty() const { return factors_.empty(); }
  bool vacuous() const { return factors_.empty(); }
  VarSet domain() const;

  auto begin() const { return factors_.begin(); }
  auto end() const { return factors_.end(); }

 private:
  std::vector<FactorPtr> factors_;
};

Potential multiply(const Potential& a, const Potential& b);
Potential sum_out(const Potential& p, const VarSet& vars);
/// Pointwise num / den with den broadcast over num's domain; 0/0 is 0.
Potential divide(const Potential& num, const Potential& den);
Potential instantiate(const Potential& p, const Evidence& e);
DecomposedPotential combine(const DecomposedPotential& a, const DecomposedPotential& b);
Potential contract(const DecomposedPotential& p);
Potential contract(std::span<const FactorPtr> factors);
/// Returns the table scaled to sum one, together with the original sum.
std::pair<Potential, double> normalize(const Potential& p);

/// Largest head set for which the product of `factors` is normalized.
///
/// Factors whose head variables occur in no other remaining factor are
/// peeled off repeatedly; if everything peels the union of their heads is
/// returned, otherwise the product is only a likelihood and the result is
/// empty. Unit scalars are ignored.
VarSet certified_head(std::span<const Potential* const> factors);

/// Product of the entries of `cards`, throwing NumericError past the table limit.
std::size_t table_size(std::span<const int> cards);

/// Hard cap on the number of entries of any materialized table.
inline constexpr std::size_t kMaxTableEntries = std::size_t{1} << 28;

/// Counters fed by every table the algebra materializes on this thread.
struct TableStats {
  std::uint64_t max_table_size = 0;
  std::uint64_t tables_created = 0;
  std::uint64_t tables_multiplied = 0;

  void merge(const TableStats& other);
};

/// While alive, routes this thread's table counters into `stats`. Nests.
class TableMeter {
 public:
  explicit TableMeter(TableStats& stats);
  ~TableMeter();
  TableMeter(const TableMeter&) = delete;
  TableMeter& operator=(const TableMeter&) = delete;

 private:
  TableStats* previous_;
};

}  // namespace lazybn
