#pragma once

// Set and restriction criteria.
//
//   set_probabilities       Pr(s(pi) = S, X) for every S, by the subset DP
//                           F[i,S,v] = e(v,x_i) * sum_u a(u,v) (F[i-1,S\{v},u] + F[i-1,S,u])
//   restriction_probability Pr(s(pi) subset of S, X), forward over the states of S
//   most_probable_*         argmax over the above
//
// Sets are bit patterns over groups (states or labels) in declaration order:
// bit g stands for group g.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Core>

#include "hmmdecode/error.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/inference.hpp"
#include "hmmdecode/prob.hpp"

namespace hmmdecode {

struct StateSet {
  std::uint64_t bits = 0;
  int width = 0;
  ItemKind kind = ItemKind::state;

  int size() const { return std::popcount(bits); }
  bool contains(int g) const { return (bits >> g) & 1u; }
  std::vector<int> members() const {
    std::vector<int> out;
    for (int g = 0; g < width; ++g)
      if (contains(g)) out.push_back(g);
    return out;
  }
  friend bool operator==(const StateSet&, const StateSet&) = default;
};

inline StateSet make_set(const std::vector<int>& groups, const Labeling& labeling) {
  if (labeling.group_count() > 64) throw CapExceeded("state sets support at most 64 states or labels");
  StateSet s{0, labeling.group_count(), labeling.kind};
  for (int g : groups) {
    if (g < 0 || g >= labeling.group_count()) throw InputError("set member " + std::to_string(g) + " out of range");
    s.bits |= std::uint64_t{1} << g;
  }
  return s;
}

inline StateSet full_set(const Labeling& labeling) {
  std::vector<int> all(labeling.group_count());
  for (int g = 0; g < labeling.group_count(); ++g) all[g] = g;
  return make_set(all, labeling);
}

inline StateSet parse_set(const std::vector<std::string>& tokens, const Labeling& labeling) {
  std::vector<int> groups;
  for (const auto& t : tokens) groups.push_back(labeling.index_of(t));
  return make_set(groups, labeling);
}

// Members in declaration order, space separated.
inline std::string render_set(const StateSet& s, const Labeling& labeling) {
  std::string out;
  for (int g : s.members()) {
    if (!out.empty()) out += ' ';
    out += labeling.names[g];
  }
  return out;
}

template <ProbValue P>
struct SetEntry {
  StateSet set;
  P probability;
};

// Nonzero set probabilities, ascending by bit pattern.
template <ProbValue P>
struct SetDistribution {
  ItemKind kind = ItemKind::state;
  int width = 0;
  std::vector<SetEntry<P>> entries;

  const P* find(std::uint64_t bits) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), bits,
                               [](const SetEntry<P>& e, std::uint64_t b) { return e.set.bits < b; });
    return it != entries.end() && it->set.bits == bits ? &it->probability : nullptr;
  }
  P total() const {
    P s = prob_zero<P>();
    for (const auto& e : entries) s += e.probability;
    return s;
  }
};

struct SetOptions {
  int max_items = 20;  // cap on groups for the 2^L subset DP
};

struct RestrictionOptions {
  std::uint64_t max_subsets = 1'000'000;  // cap on C(L, k)
};

template <ProbValue P>
struct SetResult {
  StateSet set;
  P probability;
};

namespace detail {

// 2^d as a double for d <= 0; flushes below the normal range to zero.
inline double pow2_nonpositive(long d) {
  d = std::max(d, -1023L);
  return std::bit_cast<double>(static_cast<std::uint64_t>(d + 1023) << 52);
}

inline void check_set_cap(const Labeling& labeling, const SetOptions& opts) {
  const int groups = labeling.group_count();
  if (groups > opts.max_items || groups > 62)
    throw CapExceeded("subset DP over " + std::to_string(groups) + " " + item_kind_name(labeling.kind) +
                      "s exceeds cap " + std::to_string(std::min(opts.max_items, 62)));
}

template <ProbValue P>
SetDistribution<P> set_probabilities_generic(const Model<P>& model, const Labeling& labeling, const Sequence& x) {
  const int m = model.states();
  const std::size_t full = std::size_t{1} << labeling.group_count();
  const std::size_t n = x.size();
  std::vector<P> cur(full * m, prob_zero<P>()), next(full * m, prob_zero<P>());
  std::vector<char> live(full, 0), next_live(full, 0);
  for (int v = 0; v < m; ++v) {
    const std::size_t s = std::size_t{1} << labeling.group_of[v];
    cur[s * m + v] = model.init(v) * model.emit(v, x[0]);
    if (!is_zero(cur[s * m + v])) live[s] = 1;
  }
  for (std::size_t i = 1; i < n; ++i) {
    std::fill(next.begin(), next.end(), prob_zero<P>());
    std::fill(next_live.begin(), next_live.end(), 0);
    for (std::size_t t = 0; t < full; ++t) {
      if (!live[t]) continue;
      const P* row = &cur[t * m];
      for (int w = 0; w < m; ++w) {
        const P& e = model.emit(w, x[i]);
        if (is_zero(e)) continue;
        P s = prob_zero<P>();
        bool any = false;
        for (int u : model.predecessors(w)) {
          if (is_zero(row[u])) continue;
          s += row[u] * model.trans(u, w);
          any = true;
        }
        if (!any) continue;
        const std::size_t target = t | (std::size_t{1} << labeling.group_of[w]);
        next[target * m + w] += s * e;
        next_live[target] = 1;
      }
    }
    cur.swap(next);
    live.swap(next_live);
  }
  SetDistribution<P> out{labeling.kind, labeling.group_count(), {}};
  for (std::size_t s = 0; s < full; ++s) {
    if (!live[s]) continue;
    P total = prob_zero<P>();
    for (int v = 0; v < m; ++v) total += cur[s * m + v];
    if (!is_zero(total)) out.entries.push_back({StateSet{s, labeling.group_count(), labeling.kind}, std::move(total)});
  }
  return out;
}

// Rescales each row of `mat` (one row per set) by 2^-e, where `rowmax`
// holds the row maxima and e is the binary exponent of that maximum, and
// adds e to the row's exponent. Rows with a zero maximum are dead.
inline void rescale_set_rows(Eigen::MatrixXd& mat, const std::vector<double>& rowmax, std::vector<long>& expo,
                             std::vector<char>& live, std::vector<double>& scale) {
  const Eigen::Index rows = mat.rows();
  bool extreme = false;
  for (Eigen::Index s = 0; s < rows; ++s) {
    live[s] = rowmax[s] > 0.0;
    int e = 0;
    if (live[s]) std::frexp(rowmax[s], &e);
    expo[s] += e;
    extreme |= e <= -1000 || e >= 1000;
    scale[s] = e > -1000 && e < 1000 ? std::bit_cast<double>(static_cast<std::uint64_t>(1023 - e) << 52) : 1.0;
  }
  mat.array().colwise() *= Eigen::Map<const Eigen::ArrayXd>(scale.data(), rows);
  if (!extreme) return;
  for (Eigen::Index s = 0; s < rows; ++s) {
    if (!live[s]) continue;
    int e = 0;
    std::frexp(mat.row(s).maxCoeff(), &e);
    if (e == 0) continue;
    for (Eigen::Index w = 0; w < mat.cols(); ++w) mat(s, w) = std::ldexp(mat(s, w), -e);
    expo[s] += e;
  }
}

// Same recurrence in scaled linear arithmetic: each set's row carries its own
// binary exponent. Step i forms gamma_T = row_T * A for every T as one matrix
// product, then pulls for each S the contributions of T = S and
// T = S \ {group(w)}. Storage is one column per state so the pull streams.
inline SetDistribution<LogProb> set_probabilities_scaled(const Model<LogProb>& model, const Labeling& labeling,
                                                         const Sequence& x) {
  using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  constexpr long kDead = std::numeric_limits<long>::min() / 4;
  const int m = model.states();
  const int groups = labeling.group_count();
  const std::size_t full = std::size_t{1} << groups;
  const std::size_t n = x.size();
  const Eigen::Map<const RowMatrix> a(model.trans_linear_row(0), m, m);
  Eigen::MatrixXd cur = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(full), m);
  Eigen::MatrixXd next = cur, gamma = cur;
  // Exponents of dead rows are kDead, so their weights below flush to zero.
  std::vector<long> expo(full, 0), top(full, 0);
  std::vector<char> live(full, 0);
  std::vector<double> self(full, 0.0), rowmax(full, 0.0), scale(full, 0.0);

  for (int v = 0; v < m; ++v) {
    const auto s = static_cast<Eigen::Index>(std::size_t{1} << labeling.group_of[v]);
    cur(s, v) = model.init_linear(v) * model.emit_linear(v, x[0]);
    rowmax[s] = std::max(rowmax[s], cur(s, v));
  }
  rescale_set_rows(cur, rowmax, expo, live, scale);
  for (std::size_t s = 0; s < full; ++s)
    if (!live[s]) expo[s] = kDead;

  for (std::size_t i = 1; i < n; ++i) {
    gamma.noalias() = cur * a;
    // Common exponent of each S: the largest among S and the S \ {g}.
    std::copy(expo.begin(), expo.end(), top.begin());
    for (int grp = 0; grp < groups; ++grp) {
      const std::size_t b = std::size_t{1} << grp;
      for (std::size_t base = 0; base < full; base += 2 * b)
        for (std::size_t j = base; j < base + b; ++j) top[j + b] = std::max(top[j + b], expo[j]);
    }
    for (std::size_t s = 0; s < full; ++s) self[s] = pow2_nonpositive(expo[s] - top[s]);
    std::fill(rowmax.begin(), rowmax.end(), 0.0);
    for (int w = 0; w < m; ++w) {
      const std::size_t b = std::size_t{1} << labeling.group_of[w];
      const double e = model.emit_linear(w, x[i]);
      const double* g = gamma.col(w).data();
      double* out = next.col(w).data();
      for (std::size_t base = 0; base < full; base += 2 * b) {
        std::fill(out + base, out + base + b, 0.0);
        for (std::size_t t = base; t < base + b; ++t) {
          const std::size_t s = t + b;
          const double val = (self[s] * g[s] + pow2_nonpositive(expo[t] - top[s]) * g[t]) * e;
          out[s] = val;
          rowmax[s] = std::max(rowmax[s], val);
        }
      }
    }
    for (std::size_t s = 0; s < full; ++s) expo[s] = top[s];
    rescale_set_rows(next, rowmax, expo, live, scale);
    for (std::size_t s = 0; s < full; ++s)
      if (!live[s]) expo[s] = kDead;
    cur.swap(next);
  }
  SetDistribution<LogProb> out{labeling.kind, groups, {}};
  for (std::size_t s = 1; s < full; ++s) {
    if (!live[s]) continue;
    LogProb total = scaled_to_log(cur.row(static_cast<Eigen::Index>(s)).sum(), expo[s]);
    if (!total.is_zero()) out.entries.push_back({StateSet{s, groups, labeling.kind}, total});
  }
  return out;
}

}  // namespace detail

// Pr(s(l(pi)) = S, X) for every S with nonzero mass. Zero-probability
// sequences give an empty distribution.
template <ProbValue P>
SetDistribution<P> set_probabilities(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                                     const SetOptions& opts = {}) {
  model.check_sequence(x);
  detail::check_set_cap(labeling, opts);
  if (x.empty()) return {labeling.kind, labeling.group_count(), {{StateSet{0, labeling.group_count(), labeling.kind}, prob_one<P>()}}};
  if constexpr (std::is_same_v<P, LogProb>) {
    if (detail::use_scaled_kernel(model)) return detail::set_probabilities_scaled(model, labeling, x);
  }
  return detail::set_probabilities_generic(model, labeling, x);
}

// Most probable set; ties go to the smaller set, then the smaller bit
// pattern. With `exact_size`, only sets of that cardinality compete.
template <ProbValue P>
SetResult<P> most_probable_set(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                               const SetOptions& opts = {}, std::optional<int> exact_size = std::nullopt) {
  const auto dist = set_probabilities(model, labeling, x, opts);
  if (dist.entries.empty()) throw ZeroProbabilityError();
  const SetEntry<P>* best = nullptr;
  for (const auto& e : dist.entries) {
    if (exact_size && e.set.size() != *exact_size) continue;
    if (!best || best->probability < e.probability ||
        (best->probability == e.probability && e.set.size() < best->set.size()))
      best = &e;
  }
  if (!best)
    throw ZeroProbabilityError("no set of size " + std::to_string(*exact_size) + " can generate the sequence");
  return {best->set, best->probability};
}

template <ProbValue P>
bool has_nonzero_set_probability(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                                 const StateSet& s, const SetOptions& opts = {}) {
  return set_probabilities(model, labeling, x, opts).find(s.bits) != nullptr;
}

// Pr(s(l(pi)) subset of S, X): forward confined to states whose group is in S.
template <ProbValue P>
P restriction_probability(const Model<P>& model, const Labeling& labeling, const Sequence& x, const StateSet& s) {
  model.check_sequence(x);
  if (x.empty()) return prob_one<P>();
  if (s.bits == 0 || model.states() == 0) return prob_zero<P>();
  StateMask mask(model.states());
  for (int v = 0; v < model.states(); ++v) mask[v] = s.contains(labeling.group_of[v]);
  return sequence_probability(model, x, mask);
}

inline double binomial_as_double(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

// Best size-k restriction by exhaustive enumeration of all C(L, k) subsets.
// Ties go to the smaller bit pattern.
template <ProbValue P>
SetResult<P> most_probable_restriction(const Model<P>& model, const Labeling& labeling, const Sequence& x, int k,
                                       const RestrictionOptions& opts = {}) {
  model.check_sequence(x);
  const int groups = labeling.group_count();
  if (k < 0 || k > groups)
    throw InputError("restriction size " + std::to_string(k) + " outside [0, " + std::to_string(groups) + "]");
  if (groups > 64) throw CapExceeded("restrictions support at most 64 states or labels");
  if (binomial_as_double(groups, k) > static_cast<double>(opts.max_subsets))
    throw CapExceeded("C(" + std::to_string(groups) + "," + std::to_string(k) + ") restrictions exceed cap " +
                      std::to_string(opts.max_subsets));
  if (is_zero(sequence_probability(model, x))) throw ZeroProbabilityError();

  std::vector<int> idx(k);
  for (int j = 0; j < k; ++j) idx[j] = j;
  std::optional<SetResult<P>> best;
  while (true) {
    const StateSet s = make_set(idx, labeling);
    P p = restriction_probability(model, labeling, x, s);
    if (!best || best->probability < p || (best->probability == p && s.bits < best->set.bits))
      best = SetResult<P>{s, std::move(p)};
    int j = k - 1;
    while (j >= 0 && idx[j] == groups - k + j) --j;
    if (j < 0) break;
    ++idx[j];
    for (int r = j + 1; r < k; ++r) idx[r] = idx[r - 1] + 1;
  }
  return *best;
}

}  // namespace hmmdecode
