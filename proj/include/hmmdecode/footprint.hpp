#pragma once

// Footprint criterion: f(Y) collapses runs of equal adjacent items. The
// probability of a footprint F sums all paths whose (state or label)
// footprint equals F.
//
// All DPs here work column by column over the footprint: column j holds, for
// every position i and every state v in group F[j], the mass of path prefixes
// that generate x_1..x_i, end in v, and have footprint F[0..j]. A column is
// computed from the previous one in O(n * g^2) for groups of size g, so a
// state footprint costs O(n * |F|).

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/inference.hpp"
#include "hmmdecode/prob.hpp"

namespace hmmdecode {

template <class T>
std::vector<T> footprint_of(const std::vector<T>& y) {
  std::vector<T> out;
  for (const T& t : y)
    if (out.empty() || !(out.back() == t)) out.push_back(t);
  return out;
}

template <class T>
std::set<T> set_of(const std::vector<T>& y) {
  return std::set<T>(y.begin(), y.end());
}

struct Footprint {
  std::vector<int> items;  // group indices under some Labeling
  ItemKind kind = ItemKind::state;

  std::size_t size() const { return items.size(); }
  friend bool operator==(const Footprint&, const Footprint&) = default;
};

inline Footprint footprint_of_path(const StatePath& path, const Labeling& labeling) {
  std::vector<int> groups;
  groups.reserve(path.size());
  for (int v : path.states) groups.push_back(labeling.group_of[v]);
  return Footprint{footprint_of(groups), labeling.kind};
}

inline void check_footprint(const Footprint& f, const Labeling& labeling) {
  for (std::size_t j = 0; j < f.items.size(); ++j) {
    if (f.items[j] < 0 || f.items[j] >= labeling.group_count())
      throw InputError("footprint item " + std::to_string(f.items[j]) + " out of range");
    if (j > 0 && f.items[j] == f.items[j - 1])
      throw InputError("malformed footprint: adjacent repeat of '" + labeling.names[f.items[j]] + "'");
  }
}

inline Footprint parse_footprint(const std::vector<std::string>& tokens, const Labeling& labeling) {
  Footprint f{{}, labeling.kind};
  for (const auto& t : tokens) f.items.push_back(labeling.index_of(t));
  check_footprint(f, labeling);
  return f;
}

inline std::string render_items(const std::vector<int>& items, const Labeling& labeling) {
  std::string out;
  for (int g : items) {
    if (!out.empty()) out += ' ';
    out += labeling.names[g];
  }
  return out;
}

namespace detail {

// One footprint column: values[i * g + k] for the k-th member of the group.
template <ProbValue P>
struct FootprintColumn {
  int group = -1;
  std::vector<P> values;
};

// Column for group `group` following column `prev` (or the first column when
// prev is null).
template <ProbValue P>
FootprintColumn<P> next_column(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                               const FootprintColumn<P>* prev, int group) {
  const std::size_t n = x.size();
  const auto& cur = labeling.members[group];
  const std::size_t g = cur.size();
  FootprintColumn<P> col{group, std::vector<P>(n * g, prob_zero<P>())};
  if (n == 0) return col;
  if (!prev) {
    for (std::size_t k = 0; k < g; ++k) col.values[k] = model.init(cur[k]) * model.emit(cur[k], x[0]);
  }
  const std::vector<int>* before = prev ? &labeling.members[prev->group] : nullptr;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t k = 0; k < g; ++k) {
      const int w = cur[k];
      const P& e = model.emit(w, x[i]);
      if (is_zero(e)) continue;
      P s = prob_zero<P>();
      for (std::size_t kk = 0; kk < g; ++kk) {
        const P& d = col.values[(i - 1) * g + kk];
        if (!is_zero(d)) s += d * model.trans(cur[kk], w);
      }
      if (prev) {
        const std::size_t pg = before->size();
        for (std::size_t kk = 0; kk < pg; ++kk) {
          const P& d = prev->values[(i - 1) * pg + kk];
          if (!is_zero(d)) s += d * model.trans((*before)[kk], w);
        }
      }
      col.values[i * g + k] = s * e;
    }
  }
  return col;
}

template <ProbValue P>
P column_end(const FootprintColumn<P>& col, std::size_t n, std::size_t g) {
  P s = prob_zero<P>();
  if (n == 0) return s;
  for (std::size_t k = 0; k < g; ++k) s += col.values[(n - 1) * g + k];
  return s;
}

template <ProbValue P>
std::optional<FootprintColumn<P>> columns_through(const Model<P>& model, const Labeling& labeling,
                                                  const Sequence& x, const Footprint& f) {
  std::optional<FootprintColumn<P>> col;
  for (int group : f.items) col = next_column(model, labeling, x, col ? &*col : nullptr, group);
  return col;
}

}  // namespace detail

// Pr(f(l(pi)) = F, X | H, n) for the grouping given by `labeling`.
template <ProbValue P>
P label_footprint_probability(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                              const Footprint& f) {
  model.check_sequence(x);
  check_footprint(f, labeling);
  if (f.items.empty()) return x.empty() ? prob_one<P>() : prob_zero<P>();
  if (f.items.size() > x.size()) return prob_zero<P>();
  const auto col = detail::columns_through(model, labeling, x, f);
  return detail::column_end(*col, x.size(), labeling.members[f.items.back()].size());
}

// Pr(f(pi) = F, X | H, n) over states.
template <ProbValue P>
P footprint_probability(const Model<P>& model, const Sequence& x, const Footprint& f) {
  return label_footprint_probability(model, Labeling::by_state(model.hmm()), x, f);
}

// Mass of paths whose footprint starts with `prefix`: the footprint DP for
// the prefix plus a free tail layer entered by leaving the prefix's last
// group. Nonincreasing under prefix extension; an upper bound on the
// footprint probability of every extension.
template <ProbValue P>
P footprint_prefix_probability(const Model<P>& model, const Labeling& labeling, const Sequence& x,
                               const Footprint& prefix) {
  model.check_sequence(x);
  check_footprint(prefix, labeling);
  if (prefix.items.empty()) return sequence_probability(model, x);
  const std::size_t n = x.size();
  if (prefix.items.size() > n) return prob_zero<P>();
  const auto col = detail::columns_through(model, labeling, x, prefix);
  const int last = prefix.items.back();
  const auto& grp = labeling.members[last];
  const std::size_t g = grp.size();
  const int m = model.states();

  std::vector<P> tail(m, prob_zero<P>()), next(m, prob_zero<P>());
  for (std::size_t i = 1; i < n; ++i) {
    for (int v = 0; v < m; ++v) {
      P s = prob_zero<P>();
      const P& e = model.emit(v, x[i]);
      if (!is_zero(e)) {
        for (int u : model.predecessors(v))
          if (!is_zero(tail[u])) s += tail[u] * model.trans(u, v);
        if (labeling.group_of[v] != last) {
          for (std::size_t k = 0; k < g; ++k) {
            const P& d = col->values[(i - 1) * g + k];
            if (!is_zero(d)) s += d * model.trans(grp[k], v);
          }
        }
        s = s * e;
      }
      next[v] = std::move(s);
    }
    tail.swap(next);
  }
  P total = detail::column_end(*col, n, g);
  for (const P& t : tail) total += t;
  return total;
}

// Probability of every footprint with nonzero mass, from path enumeration.
// Exponential; intended as a brute-force reference.
template <ProbValue P>
std::map<std::vector<int>, P> footprint_distribution_bruteforce(const Model<P>& model, const Labeling& labeling,
                                                                const Sequence& x,
                                                                std::uint64_t cap = default_path_cap) {
  std::map<std::vector<int>, P> out;
  for (const auto& wp : enumerate_paths(model, x, cap)) {
    auto [it, inserted] = out.try_emplace(footprint_of_path(wp.path, labeling).items, wp.probability);
    if (!inserted) it->second += wp.probability;
  }
  return out;
}

enum class FootprintMethod { exact, sampled };

inline const char* method_name(FootprintMethod m) { return m == FootprintMethod::exact ? "exact" : "sampled"; }

template <ProbValue P>
struct FootprintResult {
  Footprint footprint;
  P probability;
  FootprintMethod method = FootprintMethod::exact;
  std::optional<std::size_t> samples_used;
  std::size_t nodes_expanded = 0;
};

// Search ran out of node budget. Carries the best complete footprint found
// so far, if any.
class SearchBudgetExceeded : public CapExceeded {
 public:
  SearchBudgetExceeded(std::size_t budget, std::optional<Footprint> incumbent, std::string incumbent_probability)
      : CapExceeded("footprint search exceeded node budget of " + std::to_string(budget)),
        incumbent_(std::move(incumbent)),
        incumbent_probability_(std::move(incumbent_probability)) {}

  const std::optional<Footprint>& incumbent() const { return incumbent_; }
  const std::string& incumbent_probability() const { return incumbent_probability_; }

 private:
  std::optional<Footprint> incumbent_;
  std::string incumbent_probability_;
};

struct FootprintSearchOptions {
  std::size_t max_nodes = 1'000'000;
};

namespace detail {

// Preferred among equal probabilities: shorter, then lexicographically smaller.
inline bool canonical_before(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace detail

// Globally most probable footprint by best-first search over footprint
// prefixes. A prefix is scored by the mass of all paths whose footprint
// starts with it, which bounds every completion from above. The bound is
// evaluated in O(n) per prefix from the prefix's last column and a one-time
// table
//
//   leave[i][u] = sum over w outside group(u) of a(u, w) e(w, x_i) B[i][w]
//
// built from the backward matrix B.
template <ProbValue P>
FootprintResult<P> most_probable_footprint_exact(const Model<P>& model, const Labeling& labeling,
                                                 const Sequence& x, const FootprintSearchOptions& opts = {}) {
  model.check_sequence(x);
  const std::size_t n = x.size();
  const int m = model.states();
  const DpMatrix<P> bwd = backward(model, x);
  if (is_zero(bwd.total)) throw ZeroProbabilityError();
  if (n == 0) return {Footprint{{}, labeling.kind}, prob_one<P>(), FootprintMethod::exact, std::nullopt, 0};

  std::vector<P> leave(n * m, prob_zero<P>());
  for (std::size_t i = 1; i < n; ++i) {
    for (int u = 0; u < m; ++u) {
      P s = prob_zero<P>();
      for (int w : model.successors(u)) {
        if (labeling.group_of[w] == labeling.group_of[u]) continue;
        s += model.trans(u, w) * model.emit(w, x[i]) * bwd.at(i, w);
      }
      leave[i * m + u] = std::move(s);
    }
  }

  struct Node {
    std::vector<int> items;
    detail::FootprintColumn<P> column;
    P bound;
    P value;
  };
  std::vector<Node> nodes;
  auto lower_priority = [&nodes](std::size_t a, std::size_t b) {
    const Node& na = nodes[a];
    const Node& nb = nodes[b];
    if (na.bound < nb.bound) return true;
    if (nb.bound < na.bound) return false;
    return detail::canonical_before(nb.items, na.items);
  };
  std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(lower_priority)> frontier(lower_priority);

  std::optional<std::size_t> best;
  auto consider_push = [&](std::vector<int> items, detail::FootprintColumn<P> column) {
    const auto& grp = labeling.members[column.group];
    const std::size_t g = grp.size();
    P value = detail::column_end(column, n, g);
    P bound = value;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t k = 0; k < g; ++k) {
        const P& d = column.values[i * g + k];
        if (!is_zero(d)) bound += d * leave[(i + 1) * m + grp[k]];
      }
    }
    if (is_zero(bound)) return;
    if (best && bound < nodes[*best].value) return;
    nodes.push_back({std::move(items), std::move(column), std::move(bound), std::move(value)});
    frontier.push(nodes.size() - 1);
  };

  for (int g = 0; g < labeling.group_count(); ++g)
    consider_push({g}, detail::next_column<P>(model, labeling, x, nullptr, g));

  std::size_t expanded = 0;
  while (!frontier.empty()) {
    const std::size_t id = frontier.top();
    frontier.pop();
    if (best && nodes[id].bound < nodes[*best].value) break;
    if (!is_zero(nodes[id].value)) {
      const bool better = !best || nodes[*best].value < nodes[id].value ||
                          (nodes[*best].value == nodes[id].value &&
                           detail::canonical_before(nodes[id].items, nodes[*best].items));
      if (better) best = id;
    }
    if (nodes[id].items.size() >= n) continue;
    if (++expanded > opts.max_nodes) {
      std::optional<Footprint> inc;
      std::string text;
      if (best) {
        inc = Footprint{nodes[*best].items, labeling.kind};
        text = to_string(to_prob(nodes[*best].value));
      }
      throw SearchBudgetExceeded(opts.max_nodes, std::move(inc), std::move(text));
    }
    const detail::FootprintColumn<P> column = std::move(nodes[id].column);
    nodes[id].column.values.clear();
    nodes[id].column.values.shrink_to_fit();
    for (int g = 0; g < labeling.group_count(); ++g) {
      if (g == column.group) continue;
      std::vector<int> items = nodes[id].items;
      items.push_back(g);
      consider_push(std::move(items), detail::next_column(model, labeling, x, &column, g));
    }
  }
  // The total is nonzero, so some footprint has nonzero mass.
  return {Footprint{nodes[*best].items, labeling.kind}, nodes[*best].value, FootprintMethod::exact, std::nullopt,
          expanded};
}

// Sampling heuristic: draw posterior paths, take the most frequent footprint,
// report its exact DP probability. Frequency ties go to the higher exact
// probability, then shorter, then lexicographically smaller.
template <ProbValue P>
FootprintResult<P> most_probable_footprint_sampled(const Model<P>& model, const Labeling& labeling,
                                                   const Sequence& x, std::size_t samples, std::uint64_t seed) {
  if (samples == 0) throw InputError("sample count must be positive");
  const auto paths = sample_paths(model, x, samples, seed);
  std::map<std::vector<int>, std::size_t> counts;
  for (const auto& p : paths) ++counts[footprint_of_path(p, labeling).items];
  std::size_t top = 0;
  for (const auto& [items, c] : counts) top = std::max(top, c);

  std::optional<std::vector<int>> chosen;
  P chosen_prob = prob_zero<P>();
  for (const auto& [items, c] : counts) {
    if (c != top) continue;
    P prob = label_footprint_probability(model, labeling, x, Footprint{items, labeling.kind});
    if (!chosen || chosen_prob < prob ||
        (prob == chosen_prob && detail::canonical_before(items, *chosen))) {
      chosen = items;
      chosen_prob = std::move(prob);
    }
  }
  return {Footprint{*chosen, labeling.kind}, chosen_prob, FootprintMethod::sampled, samples, 0};
}

}  // namespace hmmdecode
