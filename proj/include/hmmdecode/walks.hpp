#pragma once

// Covering-walk counts.
//
//   Y(n, G)  walks of n vertices (n - 1 edges) in G visiting every vertex
//   D(n, k)  Y(n, K_k), via D(n,k) = (k-1) D(n-1,k) + k D(n-1,k-1)
//   M_n      smallest k maximizing D(n, k) over 0 <= k <= n
//   n_k      smallest n with M_n >= k

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/prob.hpp"

namespace hmmdecode {

// Simple undirected graph on vertices 0..n-1, no self-loops.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int vertices) : n_(vertices), adj_(static_cast<std::size_t>(vertices) * vertices, 0) {
    if (vertices < 0) throw InputError("negative vertex count");
  }

  static Graph complete(int k) {
    Graph g(k);
    for (int u = 0; u < k; ++u)
      for (int v = u + 1; v < k; ++v) g.add_edge(u, v);
    return g;
  }
  static Graph path(int k) {
    Graph g(k);
    for (int u = 0; u + 1 < k; ++u) g.add_edge(u, u + 1);
    return g;
  }
  static Graph cycle(int k) {
    Graph g = path(k);
    if (k >= 3) g.add_edge(k - 1, 0);
    return g;
  }
  static Graph star(int leaves) {
    Graph g(leaves + 1);
    for (int v = 1; v <= leaves; ++v) g.add_edge(0, v);
    return g;
  }

  // Returns false when the edge was already present.
  bool add_edge(int u, int v) {
    if (u < 0 || v < 0 || u >= n_ || v >= n_) throw InputError("edge endpoint out of range");
    if (u == v) throw InputError("self-loop on vertex " + std::to_string(u + 1));
    if (has_edge(u, v)) return false;
    adj_[index(u, v)] = adj_[index(v, u)] = 1;
    edges_.emplace_back(std::min(u, v), std::max(u, v));
    return true;
  }

  int vertex_count() const { return n_; }
  std::size_t edge_count() const { return edges_.size(); }
  bool has_edge(int u, int v) const { return adj_[index(u, v)] != 0; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  int degree(int u) const {
    int d = 0;
    for (int v = 0; v < n_; ++v) d += adj_[index(u, v)];
    return d;
  }
  bool is_complete() const { return edges_.size() == static_cast<std::size_t>(n_) * (n_ - 1) / 2; }

 private:
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(u) * n_ + v; }

  int n_ = 0;
  std::vector<char> adj_;
  std::vector<std::pair<int, int>> edges_;
};

// Triangular table of D(n, k), extended on demand.
class DnkTable {
 public:
  explicit DnkTable(int max_n = 0) { extend_to(max_n); }

  int max_n() const { return static_cast<int>(rows_.size()) - 1; }

  void extend_to(int max_n) {
    if (max_n < 0) throw InputError("max_n must be nonnegative");
    while (this->max_n() < max_n) {
      const int n = static_cast<int>(rows_.size());
      std::vector<BigInt> row(n + 1, BigInt(0));
      if (n == 0) {
        row[0] = 1;
      } else {
        row[1] = n == 1 ? 1 : 0;
        for (int k = 2; k <= n; ++k) {
          const auto& prev = rows_[n - 1];
          const BigInt stay = k <= n - 1 ? prev[k] : BigInt(0);
          row[k] = BigInt(k - 1) * stay + BigInt(k) * prev[k - 1];
        }
      }
      rows_.push_back(std::move(row));
    }
  }

  // D(n, k); zero for k > n or k < 0.
  const BigInt& at(int n, int k) const {
    static const BigInt zero(0);
    if (n < 0 || n > max_n()) throw InputError("D(" + std::to_string(n) + ",.) outside table");
    if (k < 0 || k > n) return zero;
    return rows_[n][k];
  }

 private:
  std::vector<std::vector<BigInt>> rows_;
};

inline DnkTable dnk_table(int max_n) { return DnkTable(max_n); }

inline int m_of_n(const DnkTable& table, int n) {
  if (n < 0 || n > table.max_n()) throw InputError("M_" + std::to_string(n) + " outside table");
  int best = 0;
  for (int k = 1; k <= n; ++k)
    if (table.at(n, k) > table.at(n, best)) best = k;
  return best;
}

// Upper limit on n_k: ceil(k ln k), and never below k itself (M_n <= n).
inline int n_of_k_limit(int k) {
  if (k <= 1) return k;
  return std::max(k, static_cast<int>(std::ceil(k * std::log(static_cast<double>(k)))));
}

struct NkResult {
  int n_k = 0;
  int k_prime = 0;  // M_{n_k}
};

inline NkResult n_of_k(int k, DnkTable& table) {
  if (k < 0) throw InputError("k must be nonnegative");
  const int limit = n_of_k_limit(k);
  for (int n = 0; n <= limit; ++n) {
    table.extend_to(std::max(table.max_n(), n));
    const int mn = m_of_n(table, n);
    if (mn >= k) return {n, mn};
  }
  throw std::logic_error("n_k not found within ceil(k ln k) for k = " + std::to_string(k));
}

inline NkResult n_of_k(int k) {
  DnkTable table(0);
  return n_of_k(k, table);
}

namespace detail {

template <class Real>
Real f_value(int k) {
  using std::log;
  const Real kk(k);
  return Real(1) + (log(kk * kk - 1) - log(kk)) / (log(kk - 1) - log(kk - 2));
}

}  // namespace detail

// ceil(f(k)) with f(k) = 1 + (ln(k^2 - 1) - ln k) / (ln(k - 1) - ln(k - 2)).
// When the double value lies within 1e-9 of an integer the ceiling is taken
// from a 50-digit evaluation instead.
inline int f_bound(int k) {
  if (k < 4) throw InputError("f_bound requires k >= 4");
  const double f = detail::f_value<double>(k);
  if (std::fabs(f - std::round(f)) < 1e-9) {
    using Wide = boost::multiprecision::cpp_bin_float_50;
    return static_cast<int>(ceil(detail::f_value<Wide>(k)).convert_to<long>());
  }
  return static_cast<int>(std::ceil(f));
}

// Y(n, G) by DP over (visited set, current vertex).
inline BigInt count_covering_walks(const Graph& g, int n, int max_vertices = 20) {
  const int k = g.vertex_count();
  if (k > max_vertices || k > 30)
    throw CapExceeded("covering-walk DP over " + std::to_string(k) + " vertices exceeds cap " +
                      std::to_string(std::min(max_vertices, 30)));
  if (n < 0) throw InputError("walk length must be nonnegative");
  if (n == 0) return BigInt(k == 0 ? 1 : 0);
  if (n < k || k == 0) return BigInt(0);
  const std::size_t full = std::size_t{1} << k;
  std::vector<BigInt> cur(full * k, BigInt(0)), next(full * k, BigInt(0));
  for (int v = 0; v < k; ++v) cur[(std::size_t{1} << v) * k + v] = 1;
  for (int step = 1; step < n; ++step) {
    for (auto& c : next) c = 0;
    for (std::size_t s = 1; s < full; ++s) {
      for (int u = 0; u < k; ++u) {
        const BigInt& c = cur[s * k + u];
        if (c == 0) continue;
        for (int v = 0; v < k; ++v)
          if (g.has_edge(u, v)) next[(s | (std::size_t{1} << v)) * k + v] += c;
      }
    }
    cur.swap(next);
  }
  BigInt total = 0;
  for (int v = 0; v < k; ++v) total += cur[(full - 1) * k + v];
  return total;
}

}  // namespace hmmdecode
