#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "test_support.hpp"

using namespace hmmdecode;
using namespace hmmdecode::testing;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / ("hmmdecode_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(DimacsGraph, ParsesCommentsAndEdges) {
  std::istringstream in("c a 4-cycle\np edge 4 4\ne 1 2\ne 2 3\ne 3 4\ne 4 1\n");
  const Graph g = read_dimacs_graph(in);
  EXPECT_EQ(g.vertex_count(), 4);
  EXPECT_EQ(g.edge_count(), 4u);
  EXPECT_TRUE(g.has_edge(0, 3));
  EXPECT_FALSE(g.has_edge(0, 2));
}

TEST(DimacsGraph, RoundTrip) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 20; ++t) {
    const Graph g = random_graph(rng, 1 + t % 7);
    std::ostringstream out;
    write_dimacs_graph(out, g);
    std::istringstream in(out.str());
    EXPECT_EQ(read_dimacs_graph(in).edges(), g.edges());
  }
}

TEST(DimacsGraph, Errors) {
  for (const char* bad : {"e 1 2\n", "p edge 2 1\ne 1 3\n", "p edge 2 1\ne 1 1\n", "p edge x 1\n", "p cnf 2 1\n",
                          "", "p edge 2 0\np edge 2 0\n", "p edge 2 1\nq 1 2\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_dimacs_graph(in), InputError) << bad;
  }
}

TEST(DimacsCnf, ParsesMultiLineClauses) {
  std::istringstream in("c example\np cnf 3 2\n1 -2 3 0\n-1\n2 -3 0\n");
  const CnfFormula cnf = read_dimacs_cnf(in);
  EXPECT_EQ(cnf.variables, 3);
  ASSERT_EQ(cnf.clauses.size(), 2u);
  EXPECT_EQ(cnf.clauses[1], (std::array<int, 3>{-1, 2, -3}));
}

TEST(DimacsCnf, RoundTrip) {
  std::mt19937_64 rng(62);
  for (int t = 0; t < 20; ++t) {
    const CnfFormula cnf = random_cnf(rng, 5, 6);
    std::ostringstream out;
    write_dimacs_cnf(out, cnf);
    std::istringstream in(out.str());
    const CnfFormula back = read_dimacs_cnf(in);
    EXPECT_EQ(back.variables, cnf.variables);
    EXPECT_EQ(back.clauses, cnf.clauses);
  }
}

TEST(DimacsCnf, Errors) {
  for (const char* bad : {"1 2 3 0\n", "p cnf 3 1\n1 2 0\n", "p cnf 3 1\n1 2 4 0\n", "p cnf 3 1\n1 2 3\n",
                          "p cnf 3 0\n", "p cnf 3 1\n1 2 3 4 0\n"}) {
    std::istringstream in(bad);
    EXPECT_THROW(read_dimacs_cnf(in), InputError) << bad;
  }
}

TEST(Manifest, RoundTripKeepsExactThreshold) {
  const Manifest m{Rational(3, 32), 4, "clique-set example"};
  std::ostringstream out;
  write_manifest(out, m);
  EXPECT_EQ(out.str(), "threshold 3/32\nk 4\nsource clique-set example\n");
  std::istringstream in(out.str());
  const Manifest back = read_manifest(in);
  EXPECT_EQ(back.threshold, m.threshold);
  EXPECT_EQ(back.k, m.k);
  EXPECT_EQ(back.source, m.source);
  std::istringstream missing("k 3\n");
  EXPECT_THROW(read_manifest(missing), InputError);
}

TEST(Sequence, EncodeDecode) {
  const Hmm h = footprint_hmm();
  const auto tokens = encode_graph_for_footprint(Graph::complete(2));
  const Sequence x = encode_sequence(h, tokens);
  EXPECT_EQ(decode_sequence(h, x), tokens);
  std::ostringstream out;
  write_sequence(out, h, x);
  std::istringstream in(out.str());
  EXPECT_EQ(read_tokens(in), tokens);
  EXPECT_THROW(encode_sequence(h, {"S", "Z"}), InputError);
}

TEST(Instance, WrittenFilesReloadToSameInstance) {
  const auto dir = scratch_dir();
  const auto inst = clique_to_footprint(Graph::cycle(4), 2);
  const std::string prefix = (dir / "c4").string();
  write_instance(prefix, inst);

  const Hmm h = load_hmm(prefix + ".hmm");
  std::ostringstream a, b;
  write_hmm(a, h);
  write_hmm(b, inst.hmm);
  EXPECT_EQ(a.str(), b.str());
  EXPECT_EQ(load_sequence(prefix + ".seq", h).symbols, inst.sequence.symbols);
  const Manifest m = load_manifest(prefix + ".manifest");
  EXPECT_EQ(m.threshold, inst.threshold);
  EXPECT_EQ(m.k, inst.size_param);
  std::filesystem::remove_all(dir);
}

TEST(Files, MissingFileIsAnInputError) {
  EXPECT_THROW(load_hmm("/nonexistent/model.hmm"), InputError);
  EXPECT_THROW(load_dimacs_graph("/nonexistent/g.col"), InputError);
}
