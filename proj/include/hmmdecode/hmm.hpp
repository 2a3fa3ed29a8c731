#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hmmdecode/error.hpp"
#include "hmmdecode/prob.hpp"

namespace hmmdecode {

// A discrete HMM with exact rational parameters. Entries not set are zero.
// States carry a label; labels are numbered in order of first appearance.
class Hmm {
 public:
  Hmm() = default;

  int add_state(const std::string& name, const std::string& label = {}) {
    if (state_index_.contains(name)) throw InputError("duplicate state '" + name + "'");
    const int id = state_count();
    state_index_.emplace(name, id);
    states_.push_back(name);
    const std::string& lab = label.empty() ? name : label;
    auto it = label_index_.find(lab);
    if (it == label_index_.end()) {
      it = label_index_.emplace(lab, static_cast<int>(labels_.size())).first;
      labels_.push_back(lab);
    }
    state_label_.push_back(it->second);
    init_.emplace_back(0);
    for (auto& row : trans_) row.emplace_back(0);
    trans_.emplace_back(states_.size(), Rational(0));
    emit_.emplace_back(alphabet_.size(), Rational(0));
    return id;
  }

  int add_symbol(const std::string& name) {
    if (symbol_index_.contains(name)) throw InputError("duplicate symbol '" + name + "'");
    const int id = symbol_count();
    symbol_index_.emplace(name, id);
    alphabet_.push_back(name);
    for (auto& row : emit_) row.emplace_back(0);
    return id;
  }

  int state_count() const { return static_cast<int>(states_.size()); }
  int symbol_count() const { return static_cast<int>(alphabet_.size()); }
  int label_count() const { return static_cast<int>(labels_.size()); }

  const std::string& state_name(int v) const { return states_.at(v); }
  const std::string& symbol_name(int x) const { return alphabet_.at(x); }
  const std::string& label_name(int l) const { return labels_.at(l); }
  int label_of(int v) const { return state_label_.at(v); }
  const std::vector<std::string>& state_names() const { return states_; }
  const std::vector<std::string>& alphabet() const { return alphabet_; }
  const std::vector<std::string>& label_names() const { return labels_; }

  std::optional<int> find_state(const std::string& name) const { return lookup(state_index_, name); }
  std::optional<int> find_symbol(const std::string& name) const { return lookup(symbol_index_, name); }
  std::optional<int> find_label(const std::string& name) const { return lookup(label_index_, name); }

  int state_index(const std::string& name) const {
    if (auto v = find_state(name)) return *v;
    throw InputError("unknown state '" + name + "'");
  }
  int symbol_index(const std::string& name) const {
    if (auto x = find_symbol(name)) return *x;
    throw InputError("unknown symbol '" + name + "'");
  }
  int label_index(const std::string& name) const {
    if (auto l = find_label(name)) return *l;
    throw InputError("unknown label '" + name + "'");
  }

  const Rational& init(int v) const { return init_.at(v); }
  const Rational& trans(int u, int v) const { return trans_.at(u).at(v); }
  const Rational& emit(int v, int x) const { return emit_.at(v).at(x); }

  void set_init(int v, Rational p) { init_.at(v) = std::move(p); }
  void set_trans(int u, int v, Rational p) { trans_.at(u).at(v) = std::move(p); }
  void set_emit(int v, int x, Rational p) { emit_.at(v).at(x) = std::move(p); }

 private:
  static std::optional<int> lookup(const std::unordered_map<std::string, int>& m, const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    return it->second;
  }

  std::vector<std::string> states_;
  std::vector<std::string> alphabet_;
  std::vector<std::string> labels_;
  std::vector<int> state_label_;
  std::unordered_map<std::string, int> state_index_;
  std::unordered_map<std::string, int> symbol_index_;
  std::unordered_map<std::string, int> label_index_;
  std::vector<Rational> init_;
  std::vector<std::vector<Rational>> trans_;
  std::vector<std::vector<Rational>> emit_;
};

// Observed symbols x_1..x_n as indices into an Hmm alphabet.
struct Sequence {
  std::vector<int> symbols;

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  int operator[](std::size_t i) const { return symbols[i]; }
  friend bool operator==(const Sequence&, const Sequence&) = default;
};

struct StatePath {
  std::vector<int> states;

  std::size_t size() const { return states.size(); }
  int operator[](std::size_t i) const { return states[i]; }
  friend auto operator<=>(const StatePath&, const StatePath&) = default;
};

inline Sequence encode_sequence(const Hmm& h, const std::vector<std::string>& tokens) {
  Sequence x;
  x.symbols.reserve(tokens.size());
  for (const auto& t : tokens) x.symbols.push_back(h.symbol_index(t));
  return x;
}

inline std::vector<std::string> decode_sequence(const Hmm& h, const Sequence& x) {
  std::vector<std::string> out;
  for (int s : x.symbols) out.push_back(h.symbol_name(s));
  return out;
}

// Whether decoding criteria group states individually or by label.
enum class ItemKind { state, label };

inline const char* item_kind_name(ItemKind k) { return k == ItemKind::state ? "state" : "label"; }

// Partition of the states into groups: one group per state, or one per label.
// Every criterion is computed over groups, so the state criteria are the
// label criteria under the identity labeling.
struct Labeling {
  ItemKind kind = ItemKind::state;
  std::vector<int> group_of;                // state -> group
  std::vector<std::vector<int>> members;    // group -> states, ascending
  std::vector<std::string> names;           // group -> display name

  int group_count() const { return static_cast<int>(members.size()); }
  int state_count() const { return static_cast<int>(group_of.size()); }

  static Labeling by_state(const Hmm& h) {
    Labeling l;
    l.kind = ItemKind::state;
    for (int v = 0; v < h.state_count(); ++v) {
      l.group_of.push_back(v);
      l.members.push_back({v});
      l.names.push_back(h.state_name(v));
    }
    return l;
  }

  static Labeling by_label(const Hmm& h) {
    Labeling l;
    l.kind = ItemKind::label;
    l.members.resize(h.label_count());
    l.names = h.label_names();
    for (int v = 0; v < h.state_count(); ++v) {
      l.group_of.push_back(h.label_of(v));
      l.members[h.label_of(v)].push_back(v);
    }
    return l;
  }

  static Labeling of(const Hmm& h, ItemKind kind) {
    return kind == ItemKind::state ? by_state(h) : by_label(h);
  }

  int index_of(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw InputError(std::string("unknown ") + item_kind_name(kind) + " '" + name + "'");
    return static_cast<int>(it - names.begin());
  }
};

struct Violation {
  std::string where;    // "init", "trans NAME", "emit NAME", ...
  std::string message;
};

// Stochasticity diagnostics. Rows must sum to 1 within `tolerance`
// (pass 0 for exact equality). Returns an empty list for a valid model.
inline std::vector<Violation> validate(const Hmm& h, const Rational& tolerance = Rational(1, 1000000000)) {
  std::vector<Violation> out;
  if (h.state_count() == 0) out.push_back({"model", "no states declared"});
  if (h.symbol_count() == 0) out.push_back({"model", "empty alphabet"});

  auto check_range = [&](const std::string& where, const Rational& p) {
    if (p < 0 || p > 1) out.push_back({where, "entry " + to_string(p) + " outside [0,1]"});
  };
  auto check_sum = [&](const std::string& where, const Rational& sum) {
    const Rational dev = sum - 1;
    if (abs(dev) > tolerance) {
      out.push_back({where, "sums to " + to_string(sum) + " (deviation " + to_string(dev) + ")"});
    }
  };

  Rational init_sum = 0;
  for (int v = 0; v < h.state_count(); ++v) {
    check_range("init " + h.state_name(v), h.init(v));
    init_sum += h.init(v);
  }
  if (h.state_count() > 0) check_sum("init", init_sum);

  for (int u = 0; u < h.state_count(); ++u) {
    Rational sum = 0;
    for (int v = 0; v < h.state_count(); ++v) {
      check_range("trans " + h.state_name(u) + " " + h.state_name(v), h.trans(u, v));
      sum += h.trans(u, v);
    }
    check_sum("trans " + h.state_name(u), sum);
  }
  for (int v = 0; v < h.state_count(); ++v) {
    Rational sum = 0;
    for (int x = 0; x < h.symbol_count(); ++x) {
      check_range("emit " + h.state_name(v) + " " + h.symbol_name(x), h.emit(v, x));
      sum += h.emit(v, x);
    }
    if (h.symbol_count() > 0) check_sum("emit " + h.state_name(v), sum);
  }
  return out;
}

// The parameters of an Hmm converted once into backend P, with sparse
// predecessor lists. For the log backend the model also keeps linear-scale
// doubles used by the scaled kernels; `linear_exact()` reports whether every
// nonzero parameter survived that conversion as a normal double.
template <ProbValue P>
class Model {
 public:
  explicit Model(const Hmm& h) : hmm_(h), m_(h.state_count()), k_(h.symbol_count()) {
    using T = ProbTraits<P>;
    init_.reserve(m_);
    for (int v = 0; v < m_; ++v) init_.push_back(T::from_rational(h.init(v)));
    trans_.reserve(static_cast<std::size_t>(m_) * m_);
    preds_.resize(m_);
    succs_.resize(m_);
    for (int u = 0; u < m_; ++u) {
      for (int v = 0; v < m_; ++v) {
        trans_.push_back(T::from_rational(h.trans(u, v)));
        if (h.trans(u, v) != 0) {
          preds_[v].push_back(u);
          succs_[u].push_back(v);
        }
      }
    }
    emit_.reserve(static_cast<std::size_t>(m_) * k_);
    for (int v = 0; v < m_; ++v)
      for (int x = 0; x < k_; ++x) emit_.push_back(T::from_rational(h.emit(v, x)));

    auto lin = [this](const Rational& r) {
      const double d = r.convert_to<double>();
      if (r != 0 && !std::isnormal(d)) linear_exact_ = false;
      return d;
    };
    for (int v = 0; v < m_; ++v) init_lin_.push_back(lin(h.init(v)));
    for (int u = 0; u < m_; ++u)
      for (int v = 0; v < m_; ++v) trans_lin_.push_back(lin(h.trans(u, v)));
    for (int v = 0; v < m_; ++v)
      for (int x = 0; x < k_; ++x) emit_lin_.push_back(lin(h.emit(v, x)));
  }

  const Hmm& hmm() const { return hmm_; }
  int states() const { return m_; }
  int symbols() const { return k_; }

  const P& init(int v) const { return init_[v]; }
  const P& trans(int u, int v) const { return trans_[static_cast<std::size_t>(u) * m_ + v]; }
  const P& emit(int v, int x) const { return emit_[static_cast<std::size_t>(v) * k_ + x]; }
  const std::vector<int>& predecessors(int v) const { return preds_[v]; }
  const std::vector<int>& successors(int u) const { return succs_[u]; }

  bool linear_exact() const { return linear_exact_; }
  double init_linear(int v) const { return init_lin_[v]; }
  const double* trans_linear_row(int u) const { return trans_lin_.data() + static_cast<std::size_t>(u) * m_; }
  double emit_linear(int v, int x) const { return emit_lin_[static_cast<std::size_t>(v) * k_ + x]; }

  void check_sequence(const Sequence& x) const {
    for (int s : x.symbols)
      if (s < 0 || s >= k_) throw InputError("sequence symbol index " + std::to_string(s) + " out of range");
  }

 private:
  Hmm hmm_;
  int m_;
  int k_;
  std::vector<P> init_;
  std::vector<P> trans_;
  std::vector<P> emit_;
  std::vector<std::vector<int>> preds_;
  std::vector<std::vector<int>> succs_;
  bool linear_exact_ = true;
  std::vector<double> init_lin_;
  std::vector<double> trans_lin_;
  std::vector<double> emit_lin_;
};

}  // namespace hmmdecode
