#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

struct Result {
  int exit_code = -1;
  std::string out;
  std::map<std::string, std::string> fields;
};

std::string data(const std::string& name) { return std::string(HMMDECODE_DATA_DIR) + "/" + name; }

Result run(const std::string& args) {
  const std::string cmd = std::string(HMMDECODE_CLI) + " " + args + " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) r.out += buf.data();
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::istringstream lines(r.out);
  std::string line;
  while (std::getline(lines, line)) {
    const auto tab = line.find('\t');
    if (tab != std::string::npos) r.fields[line.substr(0, tab)] = line.substr(tab + 1);
  }
  return r;
}

std::filesystem::path scratch() {
  auto dir = std::filesystem::temp_directory_path() / "hmmdecode_cli_test";
  std::filesystem::create_directories(dir);
  return dir;
}

void write_file(const std::filesystem::path& p, const std::string& text) { std::ofstream(p) << text; }

const char* kSingle = "alphabet a\nstate s\ninit s 1\ntrans s s 1\nemit s a 1\n";

std::string model_args() { return "--hmm " + data("cpg.hmm") + " --seq " + data("cpg.seq"); }

}  // namespace

TEST(CliValidate, ExitCodes) {
  const auto dir = scratch();
  write_file(dir / "ok.hmm", kSingle);
  write_file(dir / "bad.hmm", "alphabet a\nstate s\ninit s 1\ntrans s s 0.5\nemit s a 1\n");
  write_file(dir / "garbled.hmm", "alphabet a\nstate s\ninit s x\n");
  auto good = run("validate --hmm " + (dir / "ok.hmm").string());
  EXPECT_EQ(good.exit_code, 0);
  EXPECT_TRUE(good.out.empty());
  auto bad = run("validate --hmm " + (dir / "bad.hmm").string());
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_EQ(std::count(bad.out.begin(), bad.out.end(), '\n'), 1);
  EXPECT_EQ(run("validate --hmm " + (dir / "garbled.hmm").string()).exit_code, 2);
  EXPECT_EQ(run("validate --hmm " + (dir / "missing.hmm").string()).exit_code, 2);
}

TEST(CliDecode, SetOnSingleStateModel) {
  const auto dir = scratch();
  write_file(dir / "one.hmm", kSingle);
  write_file(dir / "one.seq", "a a a\n");
  auto r = run("decode set --backend exact --hmm " + (dir / "one.hmm").string() + " --seq " +
                     (dir / "one.seq").string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.fields["set"], "s");
  EXPECT_EQ(r.fields["prob"], "1/1");
  EXPECT_EQ(r.fields["log10_prob"], "0");
}

TEST(CliDecode, SampledFootprintIsDeterministic) {
  const std::string args = "decode footprint --method sampled --samples 100 --seed 7 " + model_args();
  auto a = run(args);
  auto b = run(args);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.fields["method"], "sampled");
  EXPECT_EQ(a.fields["samples"], "100");
}

TEST(CliDecode, FullRestrictionIsWholeStateSet) {
  auto r = run("decode restriction -k 4 --backend exact " + model_args());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.fields["restriction"], "bg bg2 isl isl2");
  EXPECT_EQ(r.fields["prob"], run("prob --backend exact " + model_args()).fields["prob"]);
}

TEST(CliDecode, ZeroProbabilityAndCaps) {
  const auto dir = scratch();
  write_file(dir / "one.hmm", "alphabet a b\nstate s\ninit s 1\ntrans s s 1\nemit s a 1\n");
  write_file(dir / "b.seq", "a b\n");
  EXPECT_EQ(run("decode viterbi --hmm " + (dir / "one.hmm").string() + " --seq " + (dir / "b.seq").string()).exit_code,
            1);
  auto capped = run("decode footprint --cap-nodes 3 " + model_args());
  EXPECT_EQ(capped.exit_code, 3);
  EXPECT_FALSE(capped.fields["incumbent"].empty());
  EXPECT_EQ(run("decode set --cap-states 2 " + model_args()).exit_code, 3);
  EXPECT_EQ(run("decode restriction " + model_args()).exit_code, 2);
  EXPECT_EQ(run("decode bogus " + model_args()).exit_code, 2);
}

TEST(CliEval, Identities) {
  const auto total = run("prob --backend exact " + model_args()).fields["prob"];
  EXPECT_EQ(run("eval restriction bg bg2 isl isl2 --backend exact " + model_args()).fields["prob"], total);
  EXPECT_EQ(run("eval set nope " + model_args()).exit_code, 2);

  // The footprint of the Viterbi path carries at least the Viterbi mass.
  auto vit = run("decode viterbi --backend exact " + model_args());
  std::istringstream states(vit.fields["path"]);
  std::string s, prev, footprint;
  while (states >> s) {
    if (s != prev) footprint += (footprint.empty() ? "" : " ") + s;
    prev = s;
  }
  auto fp = run("eval footprint " + footprint + " " + model_args());
  EXPECT_GE(std::stod(fp.fields["log10_prob"]), std::stod(vit.fields["log10_prob"]));
}

TEST(CliEval, UnreachableStateSetHasZeroMass) {
  const auto dir = scratch();
  write_file(dir / "two.hmm", "alphabet a\nstate s\nstate t\ninit s 1\ntrans s s 1\ntrans t t 1\nemit s a 1\nemit t a 1\n");
  write_file(dir / "a.seq", "a a\n");
  auto r = run("eval set s t --backend exact --hmm " + (dir / "two.hmm").string() + " --seq " +
                     (dir / "a.seq").string());
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.fields["prob"], "0/1");
  EXPECT_EQ(r.fields["log10_prob"], "-inf");
}

TEST(CliReduce, ThresholdsAndRoundTrip) {
  const auto dir = scratch();
  const std::string k3 = (dir / "k3").string();
  auto f = run("reduce clique-footprint --input " + data("k3.col") + " -k 3 --out " + k3);
  EXPECT_EQ(f.exit_code, 0);
  // 3q for a 3-vertex graph, in lowest terms.
  EXPECT_EQ(f.fields["threshold"], "1/36144686343723034274168832");
  auto fd = run("decode footprint --hmm " + k3 + ".hmm --seq " + k3 + ".seq --manifest " + k3 + ".manifest");
  EXPECT_EQ(fd.fields["decision"], "yes");
  EXPECT_EQ(fd.fields["backend"], "exact");

  const std::string k4 = (dir / "k4").string();
  EXPECT_EQ(run("reduce clique-set --input " + data("k4.col") + " -k 4 --out " + k4).fields["threshold"], "3/32");
  EXPECT_EQ(run("decode set --hmm " + k4 + ".hmm --seq " + k4 + ".seq --manifest " + k4 + ".manifest").fields["decision"],
            "yes");

  const std::string c4 = (dir / "c4").string();
  run("reduce clique-set --input " + data("c4.col") + " -k 3 --out " + c4);
  EXPECT_EQ(run("decode set --hmm " + c4 + ".hmm --seq " + c4 + ".seq --manifest " + c4 + ".manifest").fields["decision"],
            "no");

  const std::string cl = (dir / "clause").string();
  EXPECT_EQ(run("reduce sat-restriction --input " + data("clause.cnf") + " --out " + cl).fields["threshold"],
            "1/810000");
  EXPECT_EQ(run("decode restriction --hmm " + cl + ".hmm --seq " + cl + ".seq --manifest " + cl + ".manifest")
                .fields["decision"],
            "yes");
  const std::string un = (dir / "unsat").string();
  run("reduce sat-restriction --input " + data("unsat.cnf") + " --out " + un);
  EXPECT_EQ(run("decode restriction --hmm " + un + ".hmm --seq " + un + ".seq --manifest " + un + ".manifest")
                .fields["decision"],
            "no");

  write_file(dir / "broken.col", "p edge 2 1\ne 1 9\n");
  EXPECT_EQ(run("reduce clique-set --input " + (dir / "broken.col").string() + " -k 2 --out " + k4).exit_code, 2);
}

TEST(CliDnk, TableAndNk) {
  auto zero = run("dnk --max-n 0");
  EXPECT_EQ(zero.out, "n\t0\tM_n\n0\t1\t0\n");
  EXPECT_EQ(run("dnk --nk 8").out, "10 8\n");
  auto t = run("dnk --max-n 10");
  EXPECT_NE(t.out.find("10\t0\t0\t2\t1530\t72600\t932400\t5004720\t13335840\t18627840\t13063680\t3628800\t8\n"), std::string::npos);
}

TEST(CliOracle, Answers) {
  EXPECT_EQ(run("oracle clique --input " + data("c4.col")).fields["max_clique"], "2");
  EXPECT_EQ(run("oracle sat --input " + data("clause.cnf")).fields["result"], "SAT");
  EXPECT_EQ(run("oracle sat --input " + data("unsat.cnf")).fields["result"], "UNSAT");
  const auto dir = scratch();
  const std::string k3 = (dir / "k3o").string();
  run("reduce clique-footprint --input " + data("k3.col") + " -k 1 --out " + k3);
  const std::string args = "--backend exact --hmm " + k3 + ".hmm --seq " + k3 + ".seq";
  EXPECT_EQ(run("oracle paths " + args).fields["prob"], run("prob " + args).fields["prob"]);
  EXPECT_EQ(run("oracle paths " + model_args()).exit_code, 3);
}
