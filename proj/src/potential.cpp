#include "lazybn/potential.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <numeric>
#include <string>

#include "lazybn/error.hpp"

namespace lazybn {

// ---------------------------------------------------------------------------
// variable sets

VarSet set_union(const VarSet& a, const VarSet& b) {
  VarSet out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VarSet set_intersection(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

VarSet set_difference(const VarSet& a, const VarSet& b) {
  VarSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool set_contains(const VarSet& s, VarId v) { return std::binary_search(s.begin(), s.end(), v); }

bool set_disjoint(const VarSet& a, const VarSet& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      return false;
    }
  }
  return true;
}

bool set_includes(const VarSet& super, const VarSet& sub) {
  return std::includes(super.begin(), super.end(), sub.begin(), sub.end());
}

VarSet make_set(std::vector<VarId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// ---------------------------------------------------------------------------
// evidence

void Evidence::set(VarId var, int state) {
  if (state < 0) throw ValidationError("negative evidence state for variable " + std::to_string(var));
  if (!assignments_.emplace(var, state).second)
    throw ValidationError("duplicate evidence for variable " + std::to_string(var));
}

int Evidence::state(VarId var) const {
  auto it = assignments_.find(var);
  if (it == assignments_.end()) throw DomainError("no evidence on variable " + std::to_string(var));
  return it->second;
}

VarSet Evidence::variables() const {
  VarSet out;
  out.reserve(assignments_.size());
  for (const auto& [v, s] : assignments_) out.push_back(v);
  return out;
}

// ---------------------------------------------------------------------------
// metering

namespace {
thread_local TableStats* g_meter = nullptr;

void record_table(std::size_t size, bool product) {
  if (g_meter == nullptr) return;
  g_meter->max_table_size = std::max<std::uint64_t>(g_meter->max_table_size, size);
  ++g_meter->tables_created;
  if (product) ++g_meter->tables_multiplied;
}
}  // namespace

void TableStats::merge(const TableStats& other) {
  max_table_size = std::max(max_table_size, other.max_table_size);
  tables_created += other.tables_created;
  tables_multiplied += other.tables_multiplied;
}

TableMeter::TableMeter(TableStats& stats) : previous_(g_meter) { g_meter = &stats; }

TableMeter::~TableMeter() {
  if (previous_ != nullptr) previous_->merge(*g_meter);
  g_meter = previous_;
}

// ---------------------------------------------------------------------------
// potential

std::size_t table_size(std::span<const int> cards) {
  std::size_t n = 1;
  for (int c : cards) {
    if (c <= 0) throw DomainError("non-positive cardinality");
    if (n > kMaxTableEntries / static_cast<std::size_t>(c))
      throw NumericError("table exceeds " + std::to_string(kMaxTableEntries) + " entries");
    n *= static_cast<std::size_t>(c);
  }
  return n;
}

Potential::Potential() : table_{1.0} {}

Potential::Potential(VarSet head, VarSet tail, std::vector<int> cards, std::vector<double> table)
    : head_(std::move(head)), tail_(std::move(tail)), cards_(std::move(cards)), table_(std::move(table)) {
  if (!std::is_sorted(head_.begin(), head_.end()) || !std::is_sorted(tail_.begin(), tail_.end()) ||
      std::adjacent_find(head_.begin(), head_.end()) != head_.end() ||
      std::adjacent_find(tail_.begin(), tail_.end()) != tail_.end())
    throw DomainError("head and tail must be sorted sets");
  if (!set_disjoint(head_, tail_)) throw DomainError("head and tail overlap");
  domain_ = set_union(head_, tail_);
  if (cards_.size() != domain_.size()) throw DomainError("cardinality list does not match domain");
  if (table_.size() != table_size(cards_)) throw DomainError("table length does not match domain");
}

Potential Potential::scalar(double value) { return Potential({}, {}, {}, {value}); }

Potential Potential::ones(const VarSet& vars, std::vector<int> cards) {
  const std::size_t n = table_size(cards);
  return Potential({}, vars, std::move(cards), std::vector<double>(n, 1.0));
}

int Potential::position(VarId v) const {
  auto it = std::lower_bound(domain_.begin(), domain_.end(), v);
  if (it == domain_.end() || *it != v) return -1;
  return static_cast<int>(it - domain_.begin());
}

int Potential::cardinality(VarId v) const {
  const int pos = position(v);
  if (pos < 0) throw DomainError("variable " + std::to_string(v) + " not in domain");
  return cards_[pos];
}

std::size_t Potential::stride(VarId v) const {
  const int pos = position(v);
  if (pos < 0) throw DomainError("variable " + std::to_string(v) + " not in domain");
  std::size_t s = 1;
  for (std::size_t k = pos + 1; k < cards_.size(); ++k) s *= cards_[k];
  return s;
}

double Potential::at(std::span<const int> config) const {
  if (config.size() != domain_.size()) throw DomainError("configuration length mismatch");
  std::size_t idx = 0;
  for (std::size_t k = 0; k < config.size(); ++k) {
    if (config[k] < 0 || config[k] >= cards_[k]) throw DomainError("state index out of range");
    idx = idx * cards_[k] + config[k];
  }
  return table_[idx];
}

Potential Potential::relabel(VarSet head) const {
  if (!set_includes(domain_, head)) throw DomainError("relabelled head outside domain");
  VarSet tail = set_difference(domain_, head);
  return Potential(std::move(head), std::move(tail), cards_, table_);
}

// ---------------------------------------------------------------------------
// decomposed potential

DecomposedPotential::DecomposedPotential(std::vector<FactorPtr> factors) {
  for (auto& f : factors) add(std::move(f));
}

void DecomposedPotential::add(FactorPtr f) {
  if (std::find(factors_.begin(), factors_.end(), f) == factors_.end()) factors_.push_back(std::move(f));
}

VarSet DecomposedPotential::domain() const {
  VarSet out;
  for (const auto& f : factors_) out = set_union(out, f->domain());
  return out;
}

// ---------------------------------------------------------------------------
// algebra

namespace {

std::vector<std::size_t> strides_of(const std::vector<int>& cards) {
  std::vector<std::size_t> s(cards.size(), 1);
  for (std::size_t k = cards.size(); k-- > 1;) s[k - 1] = s[k] * cards[k];
  return s;
}

/// Strides of `p`'s variables laid out along `dom` (0 where absent).
std::vector<std::size_t> aligned_strides(const Potential& p, const VarSet& dom) {
  const auto own = strides_of(p.cards());
  std::vector<std::size_t> out(dom.size(), 0);
  std::size_t j = 0;
  for (std::size_t k = 0; k < dom.size() && j < p.domain().size(); ++k) {
    if (p.domain()[j] == dom[k]) out[k] = own[j++];
  }
  return out;
}

/// Cardinalities of `dom` gathered from `a` and `b`, checking they agree.
std::vector<int> merged_cards(const VarSet& dom, const Potential& a, const Potential& b) {
  std::vector<int> cards(dom.size());
  for (std::size_t k = 0; k < dom.size(); ++k) {
    const int pa = a.position(dom[k]);
    const int pb = b.position(dom[k]);
    if (pa >= 0 && pb >= 0 && a.cards()[pa] != b.cards()[pb])
      throw DomainError("cardinality mismatch for variable " + std::to_string(dom[k]));
    cards[k] = pa >= 0 ? a.cards()[pa] : b.cards()[pb];
  }
  return cards;
}

/// Odometer over `cards` (last fastest) carrying offsets into two operands.
/// Adjacent dimensions that are contiguous in both operands are merged, and
/// body(ia, ib, count, da, db) is called once per run of the innermost one.
template <class Body>
void walk_runs(const std::vector<int>& cards, const std::vector<std::size_t>& sa, const std::vector<std::size_t>& sb,
               Body&& body) {
  std::vector<std::size_t> c, a, b;
  for (std::size_t k = 0; k < cards.size(); ++k) {
    if (cards[k] == 1) continue;
    if (!c.empty() && a.back() == sa[k] * cards[k] && b.back() == sb[k] * cards[k]) {
      c.back() *= cards[k];
      a.back() = sa[k];
      b.back() = sb[k];
      continue;
    }
    c.push_back(cards[k]);
    a.push_back(sa[k]);
    b.push_back(sb[k]);
  }
  if (c.empty()) {
    body(std::size_t{0}, std::size_t{0}, std::size_t{1}, std::size_t{0}, std::size_t{0});
    return;
  }
  const std::size_t last = c.size() - 1;
  std::size_t outer = 1;
  for (std::size_t k = 0; k < last; ++k) outer *= c[k];
  std::vector<std::size_t> counter(last, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t r = 0; r < outer; ++r) {
    body(ia, ib, c[last], a[last], b[last]);
    for (std::size_t k = last; k-- > 0;) {
      ia += a[k];
      ib += b[k];
      if (++counter[k] < c[k]) break;
      ia -= a[k] * c[k];
      ib -= b[k] * c[k];
      counter[k] = 0;
    }
  }
}

void check_finite(const std::vector<double>& t, const char* op) {
  for (double x : t) {
    if (!std::isfinite(x)) throw NumericError(std::string(op) + " produced a non-finite entry");
  }
}

VarSet pairwise_head(const Potential& a, const Potential& b) {
  if (a.is_unit()) return b.head();
  if (b.is_unit()) return a.head();
  if (a.head().empty() || b.head().empty()) return {};
  if (set_disjoint(b.head(), a.domain()) || set_disjoint(a.head(), b.domain())) return set_union(a.head(), b.head());
  return {};
}

}  // namespace

VarSet certified_head(std::span<const Potential* const> factors) {
  std::vector<const Potential*> rest;
  for (const Potential* f : factors) {
    if (!f->is_unit()) rest.push_back(f);
  }
  VarSet heads;
  bool progress = true;
  while (!rest.empty() && progress) {
    progress = false;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      const Potential* f = rest[i];
      if (f->head().empty()) continue;
      bool childless = true;
      for (std::size_t j = 0; j < rest.size() && childless; ++j) {
        if (j != i && !set_disjoint(f->head(), rest[j]->domain())) childless = false;
      }
      if (childless) {
        heads = set_union(heads, f->head());
        rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
        progress = true;
        break;
      }
    }
  }
  return rest.empty() ? heads : VarSet{};
}

Potential multiply(const Potential& a, const Potential& b) {
  VarSet dom = set_union(a.domain(), b.domain());
  std::vector<int> cards = merged_cards(dom, a, b);
  const std::size_t n = table_size(cards);
  const auto sa = aligned_strides(a, dom);
  const auto sb = aligned_strides(b, dom);

  std::vector<double> out(n);
  const auto& ta = a.table();
  const auto& tb = b.table();
  std::size_t i = 0;
  double acc = 0.0;
  walk_runs(cards, sa, sb, [&](std::size_t ia, std::size_t ib, std::size_t count, std::size_t da, std::size_t db) {
    for (std::size_t j = 0; j < count; ++j) {
      out[i] = ta[ia + j * da] * tb[ib + j * db];
      acc += out[i++];
    }
  });
  // entries are non-negative, so a finite total rules out inf and nan
  if (!std::isfinite(acc)) check_finite(out, "multiply");
  record_table(n, true);

  VarSet head = pairwise_head(a, b);
  VarSet tail = set_difference(dom, head);
  return Potential(std::move(head), std::move(tail), std::move(cards), std::move(out));
}

Potential sum_out(const Potential& p, const VarSet& vars) {
  if (!set_includes(p.domain(), vars)) throw DomainError("sum_out: variables not in domain");
  if (vars.empty()) return p;

  VarSet dom = set_difference(p.domain(), vars);
  std::vector<int> out_cards;
  out_cards.reserve(dom.size());
  for (VarId v : dom) out_cards.push_back(p.cardinality(v));
  const std::size_t n = table_size(out_cards);

  // Walk the input; offsets into the output skip the summed variables.
  const auto own = strides_of(out_cards);
  std::vector<std::size_t> so(p.domain().size(), 0);
  for (std::size_t k = 0, j = 0; k < p.domain().size(); ++k) {
    if (j < dom.size() && dom[j] == p.domain()[k]) so[k] = own[j++];
  }
  const std::vector<std::size_t> unit(p.domain().size(), 0);
  std::vector<double> out(n, 0.0);
  const auto& t = p.table();
  std::size_t i = 0;
  double acc = 0.0;
  walk_runs(p.cards(), so, unit, [&](std::size_t io, std::size_t, std::size_t count, std::size_t d, std::size_t) {
    for (std::size_t j = 0; j < count; ++j) {
      out[io + j * d] += t[i];
      acc += t[i++];
    }
  });
  if (!std::isfinite(acc)) check_finite(out, "sum_out");
  record_table(n, false);

  VarSet head = set_includes(p.head(), vars) ? set_difference(p.head(), vars) : VarSet{};
  VarSet tail = set_difference(dom, head);
  return Potential(std::move(head), std::move(tail), std::move(out_cards), std::move(out));
}

Potential divide(const Potential& num, const Potential& den) {
  if (!set_includes(num.domain(), den.domain())) throw DomainError("divide: denominator domain not contained");
  const auto sn = aligned_strides(num, num.domain());
  const auto sd = aligned_strides(den, num.domain());
  std::vector<double> out(num.size());
  const auto& tn = num.table();
  const auto& td = den.table();
  std::size_t i = 0;
  double acc = 0.0;
  walk_runs(num.cards(), sn, sd, [&](std::size_t ia, std::size_t ib, std::size_t count, std::size_t da, std::size_t db) {
    for (std::size_t j = 0; j < count; ++j, ++i) {
      const double x = tn[ia + j * da];
      const double y = td[ib + j * db];
      if (y == 0.0) {
        if (x != 0.0) throw DivisionError("divide: positive entry over zero");
        out[i] = 0.0;
      } else {
        out[i] = x / y;
      }
      acc += out[i];
    }
  });
  if (!std::isfinite(acc)) check_finite(out, "divide");
  record_table(out.size(), false);
  return Potential(num.head(), num.tail(), num.cards(), std::move(out));
}

Potential instantiate(const Potential& p, const Evidence& e) {
  VarSet observed;
  for (VarId v : p.domain()) {
    if (e.contains(v)) observed.push_back(v);
  }
  if (observed.empty()) return p;

  VarSet dom = set_difference(p.domain(), observed);
  std::vector<int> cards;
  for (VarId v : dom) cards.push_back(p.cardinality(v));
  const std::size_t n = table_size(cards);

  std::size_t base = 0;
  for (VarId v : observed) {
    const int s = e.state(v);
    if (s >= p.cardinality(v)) throw DomainError("evidence state out of range for variable " + std::to_string(v));
    base += static_cast<std::size_t>(s) * p.stride(v);
  }
  std::vector<std::size_t> src(dom.size());
  for (std::size_t k = 0; k < dom.size(); ++k) src[k] = p.stride(dom[k]);
  const std::vector<std::size_t> unit(dom.size(), 0);

  std::vector<double> out(n);
  const auto& t = p.table();
  std::size_t i = 0;
  walk_runs(cards, src, unit, [&](std::size_t ia, std::size_t, std::size_t count, std::size_t d, std::size_t) {
    for (std::size_t j = 0; j < count; ++j) out[i++] = t[base + ia + j * d];
  });
  record_table(n, false);

  // Observing a head variable breaks the normalization over the head.
  VarSet head = set_disjoint(p.head(), observed) ? p.head() : VarSet{};
  VarSet tail = set_difference(dom, head);
  return Potential(std::move(head), std::move(tail), std::move(cards), std::move(out));
}

DecomposedPotential combine(const DecomposedPotential& a, const DecomposedPotential& b) {
  DecomposedPotential out = a;
  for (const auto& f : b) out.add(f);
  return out;
}

Potential contract(std::span<const FactorPtr> factors) {
  if (factors.empty()) return Potential();
  Potential acc = *factors[0];
  for (std::size_t i = 1; i < factors.size(); ++i) acc = multiply(acc, *factors[i]);
  std::vector<const Potential*> raw;
  raw.reserve(factors.size());
  for (const auto& f : factors) raw.push_back(f.get());
  return acc.relabel(certified_head(raw));
}

Potential contract(const DecomposedPotential& p) { return contract(std::span<const FactorPtr>(p.factors())); }

std::pair<Potential, double> normalize(const Potential& p) {
  double total = 0.0;
  for (double x : p.table()) total += x;
  if (!std::isfinite(total)) throw NumericError("normalize: non-finite sum");
  if (total <= 0.0) throw ImpossibleEvidence("normalize: potential sums to zero");
  std::vector<double> out = p.table();
  for (double& x : out) x /= total;
  return {Potential(p.head(), p.tail(), p.cards(), std::move(out)), total};
}

}  // namespace lazybn
