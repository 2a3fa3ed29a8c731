#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <type_traits>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/prob.hpp"

namespace hmmdecode {

// Per-position, per-state table plus the sequence total.
template <ProbValue P>
struct DpMatrix {
  std::size_t n = 0;
  int m = 0;
  std::vector<P> cells;  // row-major, n x m
  P total = prob_zero<P>();

  const P& at(std::size_t i, int v) const { return cells[i * m + v]; }
  P& at(std::size_t i, int v) { return cells[i * m + v]; }
};

// Empty means every state is allowed.
using StateMask = std::vector<bool>;

namespace detail {

inline bool allowed(const StateMask& mask, int v) { return mask.empty() || mask[v]; }

// Scaled rows: true value = row[v] * 2^exponent, with the row maximum kept in
// [0.5, 1). Entries more than ~2^-1074 below the row maximum flush to zero.
inline bool normalize_row(double* row, int m, long& exponent) {
  double mx = 0.0;
  for (int v = 0; v < m; ++v) mx = std::max(mx, row[v]);
  if (mx == 0.0) return false;
  int e = 0;
  std::frexp(mx, &e);
  if (e > -1000 && e < 1000) {
    const double scale = std::bit_cast<double>(static_cast<std::uint64_t>(1023 - e) << 52);
    for (int v = 0; v < m; ++v) row[v] *= scale;
  } else {
    for (int v = 0; v < m; ++v) row[v] = std::ldexp(row[v], -e);
  }
  exponent += e;
  return true;
}

inline LogProb scaled_to_log(double lin, long exponent) {
  if (lin <= 0.0) return LogProb::zero();
  return LogProb::from_log(std::log(lin) + static_cast<double>(exponent) * std::numbers::ln2);
}

inline LogProb scaled_sum(const double* row, int m, long exponent) {
  double s = 0.0;
  for (int v = 0; v < m; ++v) s += row[v];
  return scaled_to_log(s, exponent);
}

// next[v] += weight * a(u, v) for all v.
inline void axpy(double* next, const double* a_row, double weight, int m) {
  for (int v = 0; v < m; ++v) next[v] += weight * a_row[v];
}

template <ProbValue P>
constexpr bool use_scaled_kernel(const Model<P>& model) {
  if constexpr (std::is_same_v<P, LogProb>) return model.linear_exact();
  return false;
}

// Forward in scaled linear arithmetic; fills `out` when non-null.
inline LogProb forward_scaled(const Model<LogProb>& model, const Sequence& x, const StateMask& mask,
                              DpMatrix<LogProb>* out) {
  const int m = model.states();
  const std::size_t n = x.size();
  std::vector<double> row(m, 0.0), next(m, 0.0);
  long exponent = 0;
  bool alive = false;
  auto store = [&](std::size_t i) {
    if (!out) return;
    for (int v = 0; v < m; ++v) out->at(i, v) = alive ? scaled_to_log(row[v], exponent) : LogProb::zero();
  };
  for (int v = 0; v < m; ++v)
    row[v] = allowed(mask, v) ? model.init_linear(v) * model.emit_linear(v, x[0]) : 0.0;
  alive = normalize_row(row.data(), m, exponent);
  store(0);
  for (std::size_t i = 1; i < n && alive; ++i) {
    std::fill(next.begin(), next.end(), 0.0);
    for (int u = 0; u < m; ++u)
      if (row[u] != 0.0) axpy(next.data(), model.trans_linear_row(u), row[u], m);
    for (int v = 0; v < m; ++v) next[v] = allowed(mask, v) ? next[v] * model.emit_linear(v, x[i]) : 0.0;
    row.swap(next);
    alive = normalize_row(row.data(), m, exponent);
    store(i);
  }
  if (!alive) return LogProb::zero();
  return scaled_sum(row.data(), m, exponent);
}

inline LogProb backward_scaled(const Model<LogProb>& model, const Sequence& x, const StateMask& mask,
                               DpMatrix<LogProb>* out) {
  const int m = model.states();
  const std::size_t n = x.size();
  std::vector<double> row(m, 0.0), weighted(m, 0.0);
  long exponent = 0;
  bool alive = false;
  auto store = [&](std::size_t i) {
    if (!out) return;
    for (int v = 0; v < m; ++v) out->at(i, v) = alive ? scaled_to_log(row[v], exponent) : LogProb::zero();
  };
  for (int v = 0; v < m; ++v) row[v] = allowed(mask, v) ? 1.0 : 0.0;
  alive = normalize_row(row.data(), m, exponent);
  store(n - 1);
  for (std::size_t i = n - 1; i-- > 0;) {
    if (alive) {
      for (int v = 0; v < m; ++v) weighted[v] = row[v] * model.emit_linear(v, x[i + 1]);
      for (int u = 0; u < m; ++u) {
        if (!allowed(mask, u)) {
          row[u] = 0.0;
          continue;
        }
        const double* a = model.trans_linear_row(u);
        double s = 0.0;
        for (int v = 0; v < m; ++v) s += a[v] * weighted[v];
        row[u] = s;
      }
      alive = normalize_row(row.data(), m, exponent);
    }
    store(i);
  }
  if (!alive) return LogProb::zero();
  double s = 0.0;
  for (int v = 0; v < m; ++v) s += model.init_linear(v) * model.emit_linear(v, x[0]) * row[v];
  return scaled_to_log(s, exponent);
}

template <ProbValue P>
P forward_generic(const Model<P>& model, const Sequence& x, const StateMask& mask, DpMatrix<P>* out) {
  const int m = model.states();
  const std::size_t n = x.size();
  std::vector<P> row(m, prob_zero<P>()), next(m, prob_zero<P>());
  for (int v = 0; v < m; ++v)
    if (allowed(mask, v)) row[v] = model.init(v) * model.emit(v, x[0]);
  if (out) std::copy(row.begin(), row.end(), out->cells.begin());
  for (std::size_t i = 1; i < n; ++i) {
    for (int v = 0; v < m; ++v) {
      P s = prob_zero<P>();
      const P& e = model.emit(v, x[i]);
      if (allowed(mask, v) && !is_zero(e)) {
        for (int u : model.predecessors(v))
          if (!is_zero(row[u])) s += row[u] * model.trans(u, v);
        s = s * e;
      }
      next[v] = std::move(s);
    }
    row.swap(next);
    if (out) std::copy(row.begin(), row.end(), out->cells.begin() + i * m);
  }
  P total = prob_zero<P>();
  for (const P& p : row) total += p;
  return total;
}

template <ProbValue P>
P backward_generic(const Model<P>& model, const Sequence& x, const StateMask& mask, DpMatrix<P>* out) {
  const int m = model.states();
  const std::size_t n = x.size();
  std::vector<P> row(m, prob_zero<P>()), next(m, prob_zero<P>());
  for (int v = 0; v < m; ++v)
    if (allowed(mask, v)) row[v] = prob_one<P>();
  if (out) std::copy(row.begin(), row.end(), out->cells.begin() + (n - 1) * m);
  for (std::size_t i = n - 1; i-- > 0;) {
    for (int u = 0; u < m; ++u) {
      P s = prob_zero<P>();
      if (allowed(mask, u)) {
        for (int v : model.successors(u))
          if (!is_zero(row[v])) s += model.trans(u, v) * model.emit(v, x[i + 1]) * row[v];
      }
      next[u] = std::move(s);
    }
    row.swap(next);
    if (out) std::copy(row.begin(), row.end(), out->cells.begin() + i * m);
  }
  P total = prob_zero<P>();
  for (int v = 0; v < m; ++v) total += model.init(v) * model.emit(v, x[0]) * row[v];
  return total;
}

}  // namespace detail

// Pr(X | H, n), optionally restricted to the states in `mask`.
template <ProbValue P>
P sequence_probability(const Model<P>& model, const Sequence& x, const StateMask& mask = {}) {
  model.check_sequence(x);
  if (x.empty()) return prob_one<P>();
  if constexpr (std::is_same_v<P, LogProb>) {
    if (detail::use_scaled_kernel(model)) return detail::forward_scaled(model, x, mask, nullptr);
  }
  return detail::forward_generic(model, x, mask, static_cast<DpMatrix<P>*>(nullptr));
}

// Forward table: at(i, v) is the mass of paths generating x_1..x_{i+1} that
// end in v.
template <ProbValue P>
DpMatrix<P> forward(const Model<P>& model, const Sequence& x, const StateMask& mask = {}) {
  model.check_sequence(x);
  DpMatrix<P> dp;
  dp.n = x.size();
  dp.m = model.states();
  dp.cells.assign(dp.n * dp.m, prob_zero<P>());
  if (x.empty()) {
    dp.total = prob_one<P>();
    return dp;
  }
  if constexpr (std::is_same_v<P, LogProb>) {
    if (detail::use_scaled_kernel(model)) {
      dp.total = detail::forward_scaled(model, x, mask, &dp);
      return dp;
    }
  }
  dp.total = detail::forward_generic(model, x, mask, &dp);
  return dp;
}

// Backward table: at(i, v) is the probability of generating x_{i+2}..x_n
// starting from v at position i+1.
template <ProbValue P>
DpMatrix<P> backward(const Model<P>& model, const Sequence& x, const StateMask& mask = {}) {
  model.check_sequence(x);
  DpMatrix<P> dp;
  dp.n = x.size();
  dp.m = model.states();
  dp.cells.assign(dp.n * dp.m, prob_zero<P>());
  if (x.empty()) {
    dp.total = prob_one<P>();
    return dp;
  }
  if constexpr (std::is_same_v<P, LogProb>) {
    if (detail::use_scaled_kernel(model)) {
      dp.total = detail::backward_scaled(model, x, mask, &dp);
      return dp;
    }
  }
  dp.total = detail::backward_generic(model, x, mask, &dp);
  return dp;
}

// Joint probability Pr(path, X | H, n).
template <ProbValue P>
P path_probability(const Model<P>& model, const Sequence& x, const StatePath& path) {
  model.check_sequence(x);
  if (path.size() != x.size())
    throw InputError("path length " + std::to_string(path.size()) + " does not match sequence length " +
                     std::to_string(x.size()));
  for (int v : path.states)
    if (v < 0 || v >= model.states()) throw InputError("path state index " + std::to_string(v) + " out of range");
  if (x.empty()) return prob_one<P>();
  P p = model.init(path[0]) * model.emit(path[0], x[0]);
  for (std::size_t i = 1; i < x.size(); ++i) p = p * model.trans(path[i - 1], path[i]) * model.emit(path[i], x[i]);
  return p;
}

template <ProbValue P>
struct ViterbiResult {
  StatePath path;
  P probability;
};

// Most probable state path. Ties prefer the smaller state index, both for
// predecessors and for the final state.
template <ProbValue P>
ViterbiResult<P> viterbi(const Model<P>& model, const Sequence& x) {
  model.check_sequence(x);
  const int m = model.states();
  const std::size_t n = x.size();
  if (n == 0) return {StatePath{}, prob_one<P>()};
  std::vector<P> row(m), next(m);
  std::vector<int> back(n * m, -1);
  for (int v = 0; v < m; ++v) row[v] = model.init(v) * model.emit(v, x[0]);
  for (std::size_t i = 1; i < n; ++i) {
    for (int v = 0; v < m; ++v) {
      P best = prob_zero<P>();
      int arg = -1;
      for (int u : model.predecessors(v)) {
        if (is_zero(row[u])) continue;
        P cand = row[u] * model.trans(u, v);
        if (arg < 0 || best < cand) {
          best = std::move(cand);
          arg = u;
        }
      }
      next[v] = arg < 0 ? prob_zero<P>() : best * model.emit(v, x[i]);
      back[i * m + v] = arg;
    }
    row.swap(next);
  }
  int last = -1;
  for (int v = 0; v < m; ++v)
    if (!is_zero(row[v]) && (last < 0 || row[last] < row[v])) last = v;
  if (last < 0) throw ZeroProbabilityError();
  ViterbiResult<P> res{StatePath{std::vector<int>(n)}, row[last]};
  res.path.states[n - 1] = last;
  for (std::size_t i = n - 1; i > 0; --i) res.path.states[i - 1] = back[i * m + res.path.states[i]];
  return res;
}

namespace detail {

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

template <ProbValue P>
int draw(const std::vector<P>& weights, const P& sum, std::mt19937_64& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  int last_nonzero = -1;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    if (is_zero(weights[v])) continue;
    last_nonzero = static_cast<int>(v);
    acc += ProbTraits<P>::ratio(weights[v], sum);
    if (u < acc) return last_nonzero;
  }
  return last_nonzero;
}

}  // namespace detail

// `count` i.i.d. draws from Pr(path | X, H, n): backward table first, then
// states left to right in proportion to prefix step times suffix mass.
template <ProbValue P>
std::vector<StatePath> sample_paths(const Model<P>& model, const Sequence& x, std::size_t count,
                                   std::uint64_t seed) {
  if (count == 0) throw InputError("sample count must be positive");
  const DpMatrix<P> bwd = backward(model, x);
  if (is_zero(bwd.total)) throw ZeroProbabilityError();
  const int m = model.states();
  const std::size_t n = x.size();
  std::mt19937_64 rng(seed);

  std::vector<P> first(m);
  P first_sum = prob_zero<P>();
  for (int v = 0; v < m; ++v) {
    first[v] = n == 0 ? prob_zero<P>() : model.init(v) * model.emit(v, x[0]) * bwd.at(0, v);
    first_sum += first[v];
  }

  std::vector<StatePath> out;
  out.reserve(count);
  std::vector<P> w(m);
  for (std::size_t s = 0; s < count; ++s) {
    StatePath path{std::vector<int>(n)};
    if (n > 0) path.states[0] = detail::draw(first, first_sum, rng);
    for (std::size_t i = 1; i < n; ++i) {
      const int prev = path.states[i - 1];
      P sum = prob_zero<P>();
      for (int v = 0; v < m; ++v) {
        w[v] = model.trans(prev, v) * model.emit(v, x[i]) * bwd.at(i, v);
        sum += w[v];
      }
      path.states[i] = detail::draw(w, sum, rng);
    }
    out.push_back(std::move(path));
  }
  return out;
}

template <ProbValue P>
struct WeightedPath {
  StatePath path;
  P probability;
};

inline constexpr std::uint64_t default_path_cap = 10'000'000;

// Every path with nonzero probability, in lexicographic order. `cap` bounds
// the number of nonzero prefixes visited, so sparse models with long
// sequences stay enumerable while dense ones are refused early.
template <ProbValue P>
std::vector<WeightedPath<P>> enumerate_paths(const Model<P>& model, const Sequence& x,
                                             std::uint64_t cap = default_path_cap) {
  model.check_sequence(x);
  const int m = model.states();
  const std::size_t n = x.size();
  std::uint64_t visited = 0;
  std::vector<WeightedPath<P>> out;
  if (n == 0) {
    out.push_back({StatePath{}, prob_one<P>()});
    return out;
  }
  std::vector<int> states(n, 0);
  std::vector<P> prefix(n);
  // Iterative depth-first search over prefixes with nonzero mass.
  std::size_t depth = 0;
  states[0] = -1;
  while (true) {
    ++states[depth];
    if (states[depth] >= m) {
      if (depth == 0) break;
      --depth;
      continue;
    }
    const int v = states[depth];
    P p = depth == 0 ? model.init(v) * model.emit(v, x[0])
                     : prefix[depth - 1] * model.trans(states[depth - 1], v) * model.emit(v, x[depth]);
    if (is_zero(p)) continue;
    if (++visited > cap)
      throw CapExceeded("path enumeration visited more than " + std::to_string(cap) + " prefixes");
    prefix[depth] = std::move(p);
    if (depth + 1 == n) {
      out.push_back({StatePath{states}, prefix[depth]});
    } else {
      ++depth;
      states[depth] = -1;
    }
  }
  return out;
}

}  // namespace hmmdecode
