// hmmdecode: command-line front end.
//
// Output is "key<TAB>value" lines. Exit codes: 0 success, 1 domain-negative
// (zero-probability input, failed validation), 2 input error, 3 cap exceeded.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hmmdecode/hmmdecode.hpp"

namespace {

using namespace hmmdecode;

enum Exit { ok = 0, negative = 1, input_error = 2, cap_error = 3 };

struct Options {
  std::string hmm_path, seq_path, input_path, out_prefix, manifest_path;
  std::string criterion, kind, method = "exact";
  std::vector<std::string> tokens;
  Backend backend = Backend::log;
  bool labels = false;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  std::optional<int> k, size;
  int max_n = -1;
  std::optional<int> nk;
  std::size_t cap_nodes = FootprintSearchOptions{}.max_nodes;
  int cap_states = SetOptions{}.max_items;
  std::uint64_t cap_subsets = RestrictionOptions{}.max_subsets;
  std::uint64_t cap_paths = default_path_cap;
};

template <ProbValue P>
void print_prob(std::ostream& out, const P& p, const std::string& prefix = "") {
  out << prefix << "log10_prob\t" << format_log10(log10_of(p)) << '\n';
  if constexpr (std::is_same_v<P, Rational>) out << prefix << "prob\t" << to_string(p) << '\n';
}

Labeling labeling_for(const Options& o, const Hmm& h) { return o.labels ? Labeling::by_label(h) : Labeling::by_state(h); }

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) out += (out.empty() ? "" : " ") + s;
  return out;
}

template <ProbValue P>
int decode(const Options& o, const Hmm& h, const Sequence& x, const std::optional<Manifest>& manifest) {
  const Model<P> model(h);
  const Labeling l = labeling_for(o, h);
  auto& out = std::cout;
  out << "criterion\t" << o.criterion << '\n';
  out << "backend\t" << backend_name(std::is_same_v<P, Rational> ? Backend::exact : Backend::log) << '\n';

  P prob = prob_zero<P>();
  try {
    if (o.criterion == "viterbi") {
      if (o.labels) throw InputError("viterbi decodes states; --labels does not apply");
      const auto r = viterbi(model, x);
      std::vector<std::string> names;
      for (int v : r.path.states) names.push_back(h.state_name(v));
      out << "path\t" << join(names) << '\n';
      prob = r.probability;
    } else if (o.criterion == "footprint") {
      FootprintResult<P> r;
      if (o.method == "exact") {
        r = most_probable_footprint_exact(model, l, x, FootprintSearchOptions{o.cap_nodes});
      } else {
        r = most_probable_footprint_sampled(model, l, x, o.samples, o.seed);
      }
      out << "kind\t" << item_kind_name(l.kind) << '\n';
      out << "footprint\t" << render_items(r.footprint.items, l) << '\n';
      out << "method\t" << method_name(r.method) << '\n';
      if (r.samples_used) out << "samples\t" << *r.samples_used << '\n' << "seed\t" << o.seed << '\n';
      else out << "nodes_expanded\t" << r.nodes_expanded << '\n';
      prob = r.probability;
    } else if (o.criterion == "set") {
      const auto r = most_probable_set(model, l, x, SetOptions{o.cap_states}, o.size);
      out << "kind\t" << item_kind_name(l.kind) << '\n';
      out << "set\t" << render_set(r.set, l) << '\n';
      if (o.size) out << "size\t" << *o.size << '\n';
      prob = r.probability;
    } else {
      const std::optional<int> k = o.k ? o.k : (manifest ? manifest->k : std::nullopt);
      if (!k) throw InputError("decode restriction requires -k");
      const auto r = most_probable_restriction(model, l, x, *k, RestrictionOptions{o.cap_subsets});
      out << "kind\t" << item_kind_name(l.kind) << '\n';
      out << "restriction\t" << render_set(r.set, l) << '\n';
      out << "k\t" << *k << '\n';
      prob = r.probability;
    }
  } catch (const ZeroProbabilityError&) {
    if (manifest) {
      out << "threshold\t" << to_string(manifest->threshold) << '\n' << "decision\tno\n";
    }
    throw;
  }
  print_prob(out, prob);
  if (manifest) {
    if constexpr (std::is_same_v<P, Rational>) {
      out << "threshold\t" << to_string(manifest->threshold) << '\n';
      out << "decision\t" << (prob >= manifest->threshold ? "yes" : "no") << '\n';
    }
  }
  return ok;
}

template <ProbValue P>
int eval(const Options& o, const Hmm& h, const Sequence& x) {
  const Model<P> model(h);
  const Labeling l = labeling_for(o, h);
  P prob = prob_zero<P>();
  if (o.kind == "footprint") {
    prob = label_footprint_probability(model, l, x, parse_footprint(o.tokens, l));
  } else if (o.kind == "set") {
    const StateSet s = parse_set(o.tokens, l);
    const auto dist = set_probabilities(model, l, x, SetOptions{o.cap_states});
    if (const P* p = dist.find(s.bits)) prob = *p;
  } else {
    prob = restriction_probability(model, l, x, parse_set(o.tokens, l));
  }
  std::cout << "criterion\t" << o.kind << '\n' << "kind\t" << item_kind_name(l.kind) << '\n';
  std::cout << o.kind << '\t' << join(o.tokens) << '\n';
  print_prob(std::cout, prob);
  return ok;
}

template <ProbValue P>
int prob_cmd(const Options& o, const Hmm& h, const Sequence& x) {
  print_prob(std::cout, sequence_probability(Model<P>(h), x));
  (void)o;
  return ok;
}

template <ProbValue P>
int oracle_paths(const Options& o, const Hmm& h, const Sequence& x) {
  const auto paths = enumerate_paths(Model<P>(h), x, o.cap_paths);
  P total = prob_zero<P>();
  for (const auto& wp : paths) total += wp.probability;
  std::cout << "paths\t" << paths.size() << '\n';
  print_prob(std::cout, total);
  return ok;
}

template <template <class> class Fn>
int with_backend(Backend b, auto&&... args) {
  if (b == Backend::exact) return Fn<Rational>{}(args...);
  return Fn<LogProb>{}(args...);
}

template <class P>
struct DecodeFn {
  int operator()(const Options& o, const Hmm& h, const Sequence& x, const std::optional<Manifest>& m) const {
    return decode<P>(o, h, x, m);
  }
};
template <class P>
struct EvalFn {
  int operator()(const Options& o, const Hmm& h, const Sequence& x) const { return eval<P>(o, h, x); }
};
template <class P>
struct ProbFn {
  int operator()(const Options& o, const Hmm& h, const Sequence& x) const { return prob_cmd<P>(o, h, x); }
};
template <class P>
struct PathsFn {
  int operator()(const Options& o, const Hmm& h, const Sequence& x) const { return oracle_paths<P>(o, h, x); }
};

int cmd_validate(const Options& o) {
  const Hmm h = load_hmm(o.hmm_path);
  const auto violations = validate(h);
  for (const auto& v : violations) std::cout << "violation\t" << v.where << ": " << v.message << '\n';
  return violations.empty() ? ok : negative;
}

int cmd_reduce(const Options& o) {
  ReductionInstance inst;
  if (o.kind == "sat-restriction") {
    inst = sat_to_restriction(load_dimacs_cnf(o.input_path));
  } else {
    if (!o.k) throw InputError("reduce " + o.kind + " requires -k");
    const Graph g = load_dimacs_graph(o.input_path);
    inst = o.kind == "clique-footprint" ? clique_to_footprint(g, *o.k) : clique_to_set(g, *o.k);
  }
  write_instance(o.out_prefix, inst);
  std::cout << "hmm\t" << o.out_prefix << ".hmm\n"
            << "seq\t" << o.out_prefix << ".seq\n"
            << "manifest\t" << o.out_prefix << ".manifest\n"
            << "threshold\t" << to_string(inst.threshold) << '\n';
  if (inst.size_param) std::cout << "k\t" << *inst.size_param << '\n';
  return ok;
}

int cmd_dnk(const Options& o) {
  if (o.max_n < 0 && !o.nk) throw InputError("dnk requires --max-n or --nk");
  DnkTable table(std::max(o.max_n, 0));
  if (o.max_n >= 0) {
    std::cout << "n";
    for (int k = 0; k <= o.max_n; ++k) std::cout << '\t' << k;
    std::cout << "\tM_n\n";
    for (int n = 0; n <= o.max_n; ++n) {
      std::cout << n;
      for (int k = 0; k <= o.max_n; ++k) std::cout << '\t' << table.at(n, k).str();
      std::cout << '\t' << m_of_n(table, n) << '\n';
    }
  }
  if (o.nk) {
    const NkResult r = n_of_k(*o.nk, table);
    std::cout << r.n_k << ' ' << r.k_prime << '\n';
  }
  return ok;
}

int cmd_oracle(const Options& o) {
  if (o.kind == "clique") {
    std::cout << "max_clique\t" << max_clique_bruteforce(load_dimacs_graph(o.input_path)) << '\n';
    return ok;
  }
  if (o.kind == "sat") {
    std::cout << "result\t" << (sat_bruteforce(load_dimacs_cnf(o.input_path)) ? "SAT" : "UNSAT") << '\n';
    return ok;
  }
  if (o.hmm_path.empty() || o.seq_path.empty()) throw InputError("oracle paths requires --hmm and --seq");
  const Hmm h = load_hmm(o.hmm_path);
  return with_backend<PathsFn>(o.backend, o, h, load_sequence(o.seq_path, h));
}

void add_model_inputs(CLI::App* cmd, Options& o) {
  cmd->add_option("--hmm", o.hmm_path, "HMM text file")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seq", o.seq_path, "observed sequence file")->required()->check(CLI::ExistingFile);
}

void add_backend(CLI::App* cmd, Options& o) {
  cmd->add_option("--backend", o.backend, "probability backend")
      ->transform(CLI::CheckedTransformer(std::map<std::string, Backend>{{"log", Backend::log}, {"exact", Backend::exact}}));
}

int run(int argc, char** argv) {
  Options o;
  CLI::App app{"Decode hidden Markov models by path, footprint, state set or restriction."};
  app.require_subcommand(1);

  auto* validate_cmd = app.add_subcommand("validate", "check that an HMM file is well formed and stochastic");
  validate_cmd->add_option("--hmm", o.hmm_path, "HMM text file")->required();

  auto* prob = app.add_subcommand("prob", "probability of the sequence (forward algorithm)");
  add_model_inputs(prob, o);
  add_backend(prob, o);

  auto* decode_cmd = app.add_subcommand("decode", "most probable path, footprint, set or restriction");
  decode_cmd->add_option("criterion", o.criterion)
      ->required()
      ->check(CLI::IsMember({"viterbi", "footprint", "set", "restriction"}));
  add_model_inputs(decode_cmd, o);
  add_backend(decode_cmd, o);
  decode_cmd->add_flag("--labels", o.labels, "decode over state labels instead of states");
  decode_cmd->add_option("--method", o.method, "footprint method")->check(CLI::IsMember({"exact", "sampled"}));
  decode_cmd->add_option("--samples", o.samples, "paths sampled by --method sampled")->check(CLI::PositiveNumber);
  decode_cmd->add_option("--seed", o.seed, "sampling seed");
  decode_cmd->add_option("-k", o.k, "restriction size")->check(CLI::NonNegativeNumber);
  decode_cmd->add_option("--size", o.size, "only sets of this size compete")->check(CLI::NonNegativeNumber);
  decode_cmd->add_option("--manifest", o.manifest_path, "compare against a reduction threshold (forces exact)")
      ->check(CLI::ExistingFile);
  decode_cmd->add_option("--cap-nodes", o.cap_nodes, "footprint search node budget");
  decode_cmd->add_option("--cap-states", o.cap_states, "largest state/label count for the subset DP");
  decode_cmd->add_option("--cap-subsets", o.cap_subsets, "largest number of restrictions enumerated");

  auto* eval_cmd = app.add_subcommand("eval", "probability of a given footprint, set or restriction");
  eval_cmd->add_option("kind", o.kind)->required()->check(CLI::IsMember({"footprint", "set", "restriction"}));
  eval_cmd->add_option("tokens", o.tokens, "state or label names");
  add_model_inputs(eval_cmd, o);
  add_backend(eval_cmd, o);
  eval_cmd->add_flag("--labels", o.labels, "tokens name labels instead of states");
  eval_cmd->add_option("--cap-states", o.cap_states, "largest state/label count for the subset DP");

  auto* reduce = app.add_subcommand("reduce", "write an HMM decoding instance for a graph or formula");
  reduce->add_option("kind", o.kind)
      ->required()
      ->check(CLI::IsMember({"clique-footprint", "clique-set", "sat-restriction"}));
  reduce->add_option("--input", o.input_path, "DIMACS graph or CNF file")->required()->check(CLI::ExistingFile);
  reduce->add_option("-k", o.k, "clique size")->check(CLI::PositiveNumber);
  reduce->add_option("--out", o.out_prefix, "output prefix")->required();

  auto* dnk = app.add_subcommand("dnk", "covering-walk counts D(n,k), M_n and n_k");
  dnk->add_option("--max-n", o.max_n, "last table row")->check(CLI::NonNegativeNumber);
  dnk->add_option("--nk", o.nk, "report n_k and M_{n_k} for this k")->check(CLI::NonNegativeNumber);

  auto* oracle = app.add_subcommand("oracle", "brute-force reference answers");
  oracle->add_option("kind", o.kind)->required()->check(CLI::IsMember({"clique", "sat", "paths"}));
  oracle->add_option("--input", o.input_path, "DIMACS graph or CNF file")->check(CLI::ExistingFile);
  oracle->add_option("--hmm", o.hmm_path, "HMM text file")->check(CLI::ExistingFile);
  oracle->add_option("--seq", o.seq_path, "observed sequence file")->check(CLI::ExistingFile);
  add_backend(oracle, o);
  oracle->add_option("--cap-paths", o.cap_paths, "largest number of path prefixes visited");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : input_error;
  }

  try {
    if (validate_cmd->parsed()) return cmd_validate(o);
    if (reduce->parsed()) return cmd_reduce(o);
    if (dnk->parsed()) return cmd_dnk(o);
    if (oracle->parsed()) {
      if (o.kind != "paths" && o.input_path.empty()) throw InputError("oracle " + o.kind + " requires --input");
      return cmd_oracle(o);
    }

    const Hmm h = load_hmm(o.hmm_path);
    if (const auto v = validate(h); !v.empty())
      throw InputError(o.hmm_path + ": " + v.front().where + ": " + v.front().message);
    const Sequence x = load_sequence(o.seq_path, h);
    if (prob->parsed()) return with_backend<ProbFn>(o.backend, o, h, x);
    if (eval_cmd->parsed()) return with_backend<EvalFn>(o.backend, o, h, x);

    if (o.method == "sampled" && o.criterion != "footprint") throw InputError("--method applies to footprint only");
    if (o.size && o.criterion != "set") throw InputError("--size applies to set only");
    if (o.k && o.criterion != "restriction") throw InputError("-k applies to restriction only");
    std::optional<Manifest> manifest;
    if (!o.manifest_path.empty()) {
      manifest = load_manifest(o.manifest_path);
      return decode<Rational>(o, h, x, manifest);
    }
    return with_backend<DecodeFn>(o.backend, o, h, x, manifest);
  } catch (const SearchBudgetExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (e.incumbent()) {
      const Hmm h = load_hmm(o.hmm_path);
      std::cout << "incumbent\t" << render_items(e.incumbent()->items, labeling_for(o, h)) << '\n'
                << "incumbent_prob\t" << e.incumbent_probability() << '\n';
    }
    return cap_error;
  } catch (const CapExceeded& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cap_error;
  } catch (const ZeroProbabilityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return negative;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return input_error;
  }
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
