#pragma once

// Instance generators for the three hardness constructions, each paired with
// a brute-force oracle for the source problem:
//
//   clique_to_footprint  max clique -> most probable footprint (fixed 8-state HMM)
//   clique_to_set        max clique -> most probable set (graph HMM)
//   sat_to_restriction   3-SAT      -> most probable size-k restriction

#include <array>
#include <bit>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/prob.hpp"
#include "hmmdecode/walks.hpp"

namespace hmmdecode {

struct ReductionInstance {
  Hmm hmm;
  Sequence sequence;
  Rational threshold;
  std::optional<int> size_param;
  std::string provenance;
};

// Literals are nonzero integers: +i is u_i, -i is not u_i (1-based).
struct CnfFormula {
  int variables = 0;
  std::vector<std::array<int, 3>> clauses;
};

inline void check_cnf(const CnfFormula& cnf) {
  if (cnf.variables < 1) throw InputError("CNF needs at least one variable");
  if (cnf.clauses.empty()) throw InputError("CNF needs at least one clause");
  for (const auto& c : cnf.clauses)
    for (int lit : c)
      if (lit == 0 || std::abs(lit) > cnf.variables) throw InputError("literal " + std::to_string(lit) + " out of range");
}

namespace detail {

inline Rational pow_rational(long base, long exponent) {
  BigInt p = 1;
  for (long i = 0; i < exponent; ++i) p *= base;
  return Rational(p);
}

inline void set_uniform(Hmm& h, int from, const std::vector<std::string>& targets) {
  for (const auto& t : targets) h.set_trans(from, h.state_index(t), Rational(1, static_cast<long>(targets.size())));
}

inline void emit_uniform(Hmm& h, int state, const std::vector<std::string>& symbols) {
  for (const auto& s : symbols) h.set_emit(state, h.symbol_index(s), Rational(1, static_cast<long>(symbols.size())));
}

}  // namespace detail

// The fixed 8-state model. Outgoing transitions of a state are uniform, as
// are the emissions over each state's symbol set. E absorbs the spare
// transition of S', T' and T so that S and T both self-loop with
// probability 1/2; it emits only 'S', which never recurs after the first
// position of an encoded sequence.
inline Hmm footprint_hmm() {
  Hmm h;
  for (const char* sym : {"S", "S'", "T", "T'", "#", "0", "1", "?"}) h.add_symbol(sym);
  for (const char* st : {"S", "S'", "#", "0", "1", "T'", "T", "E"}) h.add_state(st);

  auto id = [&](const char* s) { return h.state_index(s); };
  detail::emit_uniform(h, id("S"), {"S", "S'", "#", "0", "1", "?", "T'"});
  detail::emit_uniform(h, id("T"), {"T", "S'", "#", "0", "1", "?", "T'"});
  detail::emit_uniform(h, id("S'"), {"S'"});
  detail::emit_uniform(h, id("#"), {"#"});
  detail::emit_uniform(h, id("T'"), {"T'"});
  detail::emit_uniform(h, id("0"), {"0", "?"});
  detail::emit_uniform(h, id("1"), {"1", "?"});
  detail::emit_uniform(h, id("E"), {"S"});

  detail::set_uniform(h, id("S"), {"S", "S'"});
  detail::set_uniform(h, id("S'"), {"#", "E"});
  detail::set_uniform(h, id("#"), {"0", "1", "T'"});
  detail::set_uniform(h, id("0"), {"#"});
  detail::set_uniform(h, id("1"), {"#"});
  detail::set_uniform(h, id("T'"), {"T", "E"});
  detail::set_uniform(h, id("T"), {"T", "E"});
  detail::set_uniform(h, id("E"), {"E"});
  h.set_init(id("S"), Rational(1));
  return h;
}

// q = 2^{-2n^2-2n} 3^{-n-1} 7^{-2n^2-n+1}: the probability of every path that
// generates the encoding of an n-vertex graph.
inline Rational footprint_run_probability(int n) {
  if (n < 1) throw InputError("graph must have at least one vertex");
  const long nn = n;
  const Rational den = detail::pow_rational(2, 2 * nn * nn + 2 * nn) * detail::pow_rational(3, nn + 1) *
                       detail::pow_rational(7, 2 * nn * nn + nn - 1);
  return Rational(1) / den;
}

// X = S X_1 ... X_n T with X_v = S' # b_v1 # ... # b_vn # T', where b_vv = 1,
// b_vu = ? for edges and 0 otherwise.
inline std::vector<std::string> encode_graph_for_footprint(const Graph& g) {
  const int n = g.vertex_count();
  std::vector<std::string> x{"S"};
  for (int v = 0; v < n; ++v) {
    x.push_back("S'");
    for (int u = 0; u < n; ++u) {
      x.push_back("#");
      x.push_back(u == v ? "1" : g.has_edge(v, u) ? "?" : "0");
    }
    x.push_back("#");
    x.push_back("T'");
  }
  x.push_back("T");
  return x;
}

inline ReductionInstance clique_to_footprint(const Graph& g, int k) {
  if (k < 1) throw InputError("clique size k must be at least 1");
  if (g.vertex_count() < 1) throw InputError("graph must have at least one vertex");
  ReductionInstance inst;
  inst.hmm = footprint_hmm();
  inst.sequence = encode_sequence(inst.hmm, encode_graph_for_footprint(g));
  inst.threshold = footprint_run_probability(g.vertex_count()) * Rational(k);
  inst.size_param = k;
  inst.provenance = "clique-footprint graph with " + std::to_string(g.vertex_count()) + " vertices, " +
                    std::to_string(g.edge_count()) + " edges, k=" + std::to_string(k);
  return inst;
}

// States v1..vN plus the error state psi. Vertices emit 0, psi emits 1;
// edges carry 1/|V|, the remainder of each row goes to psi.
inline Hmm graph_hmm(const Graph& g) {
  const int n = g.vertex_count();
  if (n < 1) throw InputError("graph must have at least one vertex");
  Hmm h;
  const int zero = h.add_symbol("0");
  const int one = h.add_symbol("1");
  for (int v = 0; v < n; ++v) h.add_state("v" + std::to_string(v + 1));
  const int psi = h.add_state("psi");
  for (int u = 0; u < n; ++u) {
    h.set_init(u, Rational(1, n));
    h.set_emit(u, zero, Rational(1));
    for (int v = 0; v < n; ++v)
      if (g.has_edge(u, v)) h.set_trans(u, v, Rational(1, n));
    h.set_trans(u, psi, Rational(1) - Rational(g.degree(u), n));
  }
  h.set_emit(psi, one, Rational(1));
  h.set_trans(psi, psi, Rational(1));
  return h;
}

// G plus `extra` new vertices adjacent to every other vertex.
inline Graph augment_with_universal_vertices(const Graph& g, int extra) {
  const int n = g.vertex_count();
  Graph out(n + extra);
  for (const auto& [u, v] : g.edges()) out.add_edge(u, v);
  for (int w = n; w < n + extra; ++w)
    for (int u = 0; u < w; ++u) out.add_edge(u, w);
  return out;
}

// Witness sets are k'-cliques of G' where n = n_k and k' = M_{n_k};
// X = 0^n and the threshold is D(n, k') / |V'|^n. size_param is k'.
inline ReductionInstance clique_to_set(const Graph& g, int k) {
  if (k < 1) throw InputError("clique size k must be at least 1");
  if (g.vertex_count() < 1) throw InputError("graph must have at least one vertex");
  DnkTable table(0);
  const NkResult nk = n_of_k(k, table);
  const Graph augmented = augment_with_universal_vertices(g, nk.k_prime - k);
  ReductionInstance inst;
  inst.hmm = graph_hmm(augmented);
  inst.sequence = encode_sequence(inst.hmm, std::vector<std::string>(nk.n_k, "0"));
  const Rational walks(table.at(nk.n_k, nk.k_prime));
  inst.threshold = walks / detail::pow_rational(augmented.vertex_count(), nk.n_k);
  inst.size_param = nk.k_prime;
  inst.provenance = "clique-set graph with " + std::to_string(g.vertex_count()) + " vertices, k=" +
                    std::to_string(k) + ", n_k=" + std::to_string(nk.n_k) + ", k'=" + std::to_string(nk.k_prime);
  return inst;
}

inline std::string literal_state_name(int lit) {
  return (lit > 0 ? "u" : "~u") + std::to_string(std::abs(lit));
}

// States are the 2n literals (u1, ~u1, u2, ~u2, ...); the alphabet is the
// clauses c1..cm, the variables u1..un and the error symbol "err". Every
// initial and transition probability is 1/(2n), self-transitions included.
// X = u1..un c1..cm, k = n, threshold (2n|Sigma|)^{-|X|}.
inline ReductionInstance sat_to_restriction(const CnfFormula& cnf) {
  check_cnf(cnf);
  const int n = cnf.variables;
  const int m = static_cast<int>(cnf.clauses.size());
  const long sigma = n + m + 1;
  Hmm h;
  for (int j = 1; j <= m; ++j) h.add_symbol("c" + std::to_string(j));
  for (int i = 1; i <= n; ++i) h.add_symbol("u" + std::to_string(i));
  const int err = h.add_symbol("err");
  for (int i = 1; i <= n; ++i) {
    h.add_state(literal_state_name(i));
    h.add_state(literal_state_name(-i));
  }
  const int states = 2 * n;
  for (int v = 0; v < states; ++v) {
    h.set_init(v, Rational(1, states));
    for (int w = 0; w < states; ++w) h.set_trans(v, w, Rational(1, states));
    const int lit = v % 2 == 0 ? v / 2 + 1 : -(v / 2 + 1);
    int emitted = 0;
    for (int j = 0; j < m; ++j) {
      const auto& c = cnf.clauses[j];
      if (c[0] == lit || c[1] == lit || c[2] == lit) {
        h.set_emit(v, h.symbol_index("c" + std::to_string(j + 1)), Rational(1, sigma));
        ++emitted;
      }
    }
    h.set_emit(v, h.symbol_index("u" + std::to_string(std::abs(lit))), Rational(1, sigma));
    ++emitted;
    h.set_emit(v, err, Rational(1) - Rational(emitted, sigma));
  }
  std::vector<std::string> x;
  for (int i = 1; i <= n; ++i) x.push_back("u" + std::to_string(i));
  for (int j = 1; j <= m; ++j) x.push_back("c" + std::to_string(j));

  ReductionInstance inst;
  inst.hmm = std::move(h);
  inst.sequence = encode_sequence(inst.hmm, x);
  inst.threshold = Rational(1) / detail::pow_rational(2 * n * sigma, n + m);
  inst.size_param = n;
  inst.provenance = "sat-restriction CNF with " + std::to_string(n) + " variables, " + std::to_string(m) + " clauses";
  return inst;
}

inline int max_clique_bruteforce(const Graph& g, int max_vertices = 20) {
  const int n = g.vertex_count();
  if (n > max_vertices || n > 30)
    throw CapExceeded("clique enumeration over " + std::to_string(n) + " vertices exceeds cap " +
                      std::to_string(std::min(max_vertices, 30)));
  std::vector<std::uint32_t> nbr(n, 0);
  for (const auto& [u, v] : g.edges()) {
    nbr[u] |= 1u << v;
    nbr[v] |= 1u << u;
  }
  int best = 0;
  const std::uint32_t full = n == 0 ? 0 : (n == 32 ? ~0u : (1u << n) - 1);
  for (std::uint32_t s = 1; s != 0 && s <= full; ++s) {
    const int size = std::popcount(s);
    if (size <= best) continue;
    bool clique = true;
    for (int v = 0; v < n && clique; ++v)
      if ((s >> v) & 1u) clique = (s & ~(1u << v) & ~nbr[v]) == 0;
    if (clique) best = size;
  }
  return best;
}

inline bool sat_bruteforce(const CnfFormula& cnf, int max_variables = 20) {
  check_cnf(cnf);
  if (cnf.variables > max_variables || cnf.variables > 30)
    throw CapExceeded("assignment enumeration over " + std::to_string(cnf.variables) + " variables exceeds cap " +
                      std::to_string(std::min(max_variables, 30)));
  const std::uint64_t total = std::uint64_t{1} << cnf.variables;
  for (std::uint64_t a = 0; a < total; ++a) {
    bool all = true;
    for (const auto& c : cnf.clauses) {
      bool sat = false;
      for (int lit : c) {
        const bool value = (a >> (std::abs(lit) - 1)) & 1u;
        if (value == (lit > 0)) sat = true;
      }
      if (!sat) {
        all = false;
        break;
      }
    }
    if (all) return true;
  }
  return false;
}

}  // namespace hmmdecode
