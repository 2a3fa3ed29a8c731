#pragma once

// Text formats.
//
// HMM (line oriented; a line whose first non-blank character is '#' is a
// comment, so '#' remains usable as a symbol or state name elsewhere):
//
//   alphabet SYM...
//   state NAME [label=LABEL]
//   init NAME PROB
//   trans FROM TO PROB
//   emit NAME SYM PROB
//
// PROB is decimal ("0.25") or a ratio ("1/4"); omitted entries are zero.
// Sequences are whitespace-separated symbol tokens. Graphs use the DIMACS
// edge format ("p edge N M", "e U V", 1-based); formulas use DIMACS CNF with
// exactly three literals per clause. A reduction manifest holds
// "threshold NUM/DEN", "k K" and "source TEXT" lines.

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/hmm.hpp"
#include "hmmdecode/prob.hpp"
#include "hmmdecode/reductions.hpp"
#include "hmmdecode/walks.hpp"

namespace hmmdecode {

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline bool is_comment_or_blank(const std::string& line, char marker) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == marker;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path + ": cannot open file");
  return in;
}

inline int parse_int(const std::string& tok, const std::string& where) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::logic_error&) {
    throw InputError(where + ": expected integer, got '" + tok + "'");
  }
}

}  // namespace detail

inline Hmm read_hmm(std::istream& in, const std::string& source = "<hmm>") {
  Hmm h;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line, '#')) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto tok = detail::split_ws(line);
    auto need = [&](std::size_t count) {
      if (tok.size() != count)
        throw InputError(where + ": '" + tok[0] + "' expects " + std::to_string(count - 1) + " arguments");
    };
    try {
      if (tok[0] == "alphabet") {
        if (tok.size() < 2) throw InputError("'alphabet' expects at least one symbol");
        for (std::size_t i = 1; i < tok.size(); ++i) h.add_symbol(tok[i]);
      } else if (tok[0] == "state") {
        if (tok.size() == 2) {
          h.add_state(tok[1]);
        } else if (tok.size() == 3 && tok[2].starts_with("label=") && tok[2].size() > 6) {
          h.add_state(tok[1], tok[2].substr(6));
        } else {
          throw InputError("expected 'state NAME [label=LABEL]'");
        }
      } else if (tok[0] == "init") {
        need(3);
        h.set_init(h.state_index(tok[1]), parse_rational(tok[2]));
      } else if (tok[0] == "trans") {
        need(4);
        h.set_trans(h.state_index(tok[1]), h.state_index(tok[2]), parse_rational(tok[3]));
      } else if (tok[0] == "emit") {
        need(4);
        h.set_emit(h.state_index(tok[1]), h.symbol_index(tok[2]), parse_rational(tok[3]));
      } else {
        throw InputError("unknown keyword '" + tok[0] + "'");
      }
    } catch (const InputError& e) {
      const std::string msg = e.what();
      if (msg.starts_with(where)) throw;
      throw InputError(where + ": " + msg);
    }
  }
  if (in.bad()) throw InputError(source + ": read error");
  return h;
}

inline Hmm load_hmm(const std::string& path) {
  auto in = detail::open_input(path);
  return read_hmm(in, path);
}

inline void write_hmm(std::ostream& out, const Hmm& h) {
  out << "alphabet";
  for (const auto& s : h.alphabet()) out << ' ' << s;
  out << '\n';
  for (int v = 0; v < h.state_count(); ++v) {
    out << "state " << h.state_name(v);
    if (h.label_name(h.label_of(v)) != h.state_name(v)) out << " label=" << h.label_name(h.label_of(v));
    out << '\n';
  }
  for (int v = 0; v < h.state_count(); ++v)
    if (h.init(v) != 0) out << "init " << h.state_name(v) << ' ' << to_string(h.init(v)) << '\n';
  for (int u = 0; u < h.state_count(); ++u)
    for (int v = 0; v < h.state_count(); ++v)
      if (h.trans(u, v) != 0)
        out << "trans " << h.state_name(u) << ' ' << h.state_name(v) << ' ' << to_string(h.trans(u, v)) << '\n';
  for (int v = 0; v < h.state_count(); ++v)
    for (int x = 0; x < h.symbol_count(); ++x)
      if (h.emit(v, x) != 0)
        out << "emit " << h.state_name(v) << ' ' << h.symbol_name(x) << ' ' << to_string(h.emit(v, x)) << '\n';
}

inline std::vector<std::string> read_tokens(std::istream& in) {
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline Sequence load_sequence(const std::string& path, const Hmm& h) {
  auto in = detail::open_input(path);
  try {
    return encode_sequence(h, read_tokens(in));
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  }
}

inline void write_sequence(std::ostream& out, const Hmm& h, const Sequence& x) {
  bool first = true;
  for (int s : x.symbols) {
    if (!first) out << ' ';
    out << h.symbol_name(s);
    first = false;
  }
  out << '\n';
}

inline Graph read_dimacs_graph(std::istream& in, const std::string& source = "<graph>") {
  std::optional<Graph> g;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line, 'c')) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto tok = detail::split_ws(line);
    if (tok[0] == "p") {
      if (g) throw InputError(where + ": duplicate problem line");
      if (tok.size() != 4 || (tok[1] != "edge" && tok[1] != "col"))
        throw InputError(where + ": expected 'p edge N M'");
      const int n = detail::parse_int(tok[2], where);
      if (n < 0) throw InputError(where + ": negative vertex count");
      g.emplace(n);
    } else if (tok[0] == "e") {
      if (!g) throw InputError(where + ": edge before problem line");
      if (tok.size() != 3) throw InputError(where + ": expected 'e U V'");
      const int u = detail::parse_int(tok[1], where);
      const int v = detail::parse_int(tok[2], where);
      if (u < 1 || v < 1 || u > g->vertex_count() || v > g->vertex_count())
        throw InputError(where + ": vertex out of range");
      if (u == v) throw InputError(where + ": self-loop");
      g->add_edge(u - 1, v - 1);
    } else {
      throw InputError(where + ": unexpected line '" + tok[0] + "'");
    }
  }
  if (!g) throw InputError(source + ": missing 'p edge' line");
  return *g;
}

inline Graph load_dimacs_graph(const std::string& path) {
  auto in = detail::open_input(path);
  return read_dimacs_graph(in, path);
}

inline void write_dimacs_graph(std::ostream& out, const Graph& g) {
  out << "p edge " << g.vertex_count() << ' ' << g.edge_count() << '\n';
  for (const auto& [u, v] : g.edges()) out << "e " << u + 1 << ' ' << v + 1 << '\n';
}

inline CnfFormula read_dimacs_cnf(std::istream& in, const std::string& source = "<cnf>") {
  CnfFormula cnf;
  bool header = false;
  std::vector<int> pending;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line, 'c') || line.starts_with("%")) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto tok = detail::split_ws(line);
    if (tok[0] == "p") {
      if (header) throw InputError(where + ": duplicate problem line");
      if (tok.size() != 4 || tok[1] != "cnf") throw InputError(where + ": expected 'p cnf N M'");
      cnf.variables = detail::parse_int(tok[2], where);
      header = true;
      continue;
    }
    if (!header) throw InputError(where + ": clause before problem line");
    for (const auto& t : tok) {
      const int lit = detail::parse_int(t, where);
      if (lit == 0) {
        if (pending.size() != 3)
          throw InputError(where + ": clause has " + std::to_string(pending.size()) + " literals, expected 3");
        cnf.clauses.push_back({pending[0], pending[1], pending[2]});
        pending.clear();
      } else {
        if (std::abs(lit) > cnf.variables) throw InputError(where + ": literal " + t + " out of range");
        pending.push_back(lit);
      }
    }
  }
  if (!header) throw InputError(source + ": missing 'p cnf' line");
  if (!pending.empty()) throw InputError(source + ": unterminated clause");
  try {
    check_cnf(cnf);
  } catch (const InputError& e) {
    throw InputError(source + ": " + e.what());
  }
  return cnf;
}

inline CnfFormula load_dimacs_cnf(const std::string& path) {
  auto in = detail::open_input(path);
  return read_dimacs_cnf(in, path);
}

inline void write_dimacs_cnf(std::ostream& out, const CnfFormula& cnf) {
  out << "p cnf " << cnf.variables << ' ' << cnf.clauses.size() << '\n';
  for (const auto& c : cnf.clauses) out << c[0] << ' ' << c[1] << ' ' << c[2] << " 0\n";
}

struct Manifest {
  Rational threshold;
  std::optional<int> k;
  std::string source;
};

inline void write_manifest(std::ostream& out, const Manifest& m) {
  out << "threshold " << to_string(m.threshold) << '\n';
  if (m.k) out << "k " << *m.k << '\n';
  if (!m.source.empty()) out << "source " << m.source << '\n';
}

inline Manifest read_manifest(std::istream& in, const std::string& source = "<manifest>") {
  Manifest m;
  bool have_threshold = false;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::is_comment_or_blank(line, '#')) continue;
    const std::string where = source + ":" + std::to_string(lineno);
    const auto tok = detail::split_ws(line);
    if (tok[0] == "threshold" && tok.size() == 2) {
      try {
        m.threshold = parse_rational(tok[1]);
      } catch (const InputError& e) {
        throw InputError(where + ": " + e.what());
      }
      have_threshold = true;
    } else if (tok[0] == "k" && tok.size() == 2) {
      m.k = detail::parse_int(tok[1], where);
    } else if (tok[0] == "source") {
      const auto pos = line.find("source") + 6;
      m.source = line.substr(std::min(line.size(), line.find_first_not_of(" \t", pos)));
    } else {
      throw InputError(where + ": unexpected manifest line");
    }
  }
  if (!have_threshold) throw InputError(source + ": missing threshold");
  return m;
}

inline Manifest load_manifest(const std::string& path) {
  auto in = detail::open_input(path);
  return read_manifest(in, path);
}

// Writes PREFIX.hmm, PREFIX.seq and PREFIX.manifest.
inline void write_instance(const std::string& prefix, const ReductionInstance& inst) {
  auto open = [](const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InputError(path + ": cannot write file");
    return out;
  };
  {
    auto out = open(prefix + ".hmm");
    out << "# " << inst.provenance << '\n';
    write_hmm(out, inst.hmm);
  }
  {
    auto out = open(prefix + ".seq");
    write_sequence(out, inst.hmm, inst.sequence);
  }
  {
    auto out = open(prefix + ".manifest");
    write_manifest(out, Manifest{inst.threshold, inst.size_param, inst.provenance});
  }
}

}  // namespace hmmdecode
