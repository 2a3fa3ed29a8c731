#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

using namespace hmmdecode;
using namespace hmmdecode::testing;

namespace {

Sequence zeros(int n) { return Sequence{std::vector<int>(n, 0)}; }

StateSet bits_set(std::uint64_t bits, const Labeling& l) { return StateSet{bits, l.group_count(), l.kind}; }

}  // namespace

TEST(SetProbability, TriangleHamiltonianWalks) {
  // 6 of the 12 length-3 walks on K_3 visit all three vertices.
  const Hmm h = graph_hmm(Graph::complete(3));
  const Model<Rational> m(h);
  const Labeling l = Labeling::by_state(h);
  const auto dist = set_probabilities(m, l, zeros(3));
  ASSERT_NE(dist.find(0b111), nullptr);
  EXPECT_EQ(*dist.find(0b111), Rational(6, 27));
  EXPECT_EQ(*dist.find(0b011), Rational(2, 27));
  EXPECT_EQ(dist.total(), Rational(12, 27));
  EXPECT_EQ(dist.find(0b001), nullptr);
}

TEST(SetProbability, PathHasHamiltonianWalk) {
  const Hmm h = graph_hmm(Graph::path(3));
  const Labeling l = Labeling::by_state(h);
  const StateSet vertices = parse_set({"v1", "v2", "v3"}, l);
  EXPECT_TRUE(has_nonzero_set_probability(Model<Rational>(h), l, zeros(3), vertices));
  // psi is unreachable without emitting 1.
  EXPECT_FALSE(has_nonzero_set_probability(Model<Rational>(h), l, zeros(3), full_set(l)));
}

TEST(SetProbability, StarHasNoHamiltonianWalk) {
  const Hmm h = graph_hmm(Graph::star(3));
  const Labeling l = Labeling::by_state(h);
  const StateSet vertices = parse_set({"v1", "v2", "v3", "v4"}, l);
  EXPECT_FALSE(has_nonzero_set_probability(Model<Rational>(h), l, zeros(4), vertices));
  EXPECT_FALSE(has_nonzero_set_probability(Model<LogProb>(h), l, zeros(4), vertices));
}

TEST(SetProbability, SingleStateAndEmptySequence) {
  const Model<Rational> m(single_state_hmm());
  const Labeling l = Labeling::by_state(m.hmm());
  const auto r = most_probable_set(m, l, zeros(5));
  EXPECT_EQ(r.set.bits, 1u);
  EXPECT_EQ(r.probability, Rational(1));
  const auto empty = set_probabilities(m, l, Sequence{});
  ASSERT_EQ(empty.entries.size(), 1u);
  EXPECT_EQ(empty.entries[0].set.bits, 0u);
}

TEST(SetProbability, MatchesBruteForce) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 80; ++t) {
    const bool labeled = t % 2 == 1;
    const Hmm h = random_hmm(rng, 2 + t % 4, 2, labeled ? 2 + t % 3 : 0);
    const Sequence x = random_sequence(rng, h, 1 + t % 6);
    const Model<Rational> m(h);
    const Labeling l = labeled ? Labeling::by_label(h) : Labeling::by_state(h);
    const auto want = brute_sets(h, x, l);
    const auto dist = set_probabilities(m, l, x);
    ASSERT_EQ(dist.entries.size(), want.size());
    for (const auto& e : dist.entries) EXPECT_EQ(e.probability, want.at(e.set.bits));
    EXPECT_EQ(dist.total(), sequence_probability(m, x));
    for (std::size_t i = 1; i < dist.entries.size(); ++i)
      EXPECT_LT(dist.entries[i - 1].set.bits, dist.entries[i].set.bits);
  }
}

TEST(SetProbability, ScaledKernelMatchesGeneric) {
  std::mt19937_64 rng(32);
  for (int t = 0; t < 40; ++t) {
    const Hmm h = random_hmm(rng, 2 + t % 6, 3, t % 3 == 0 ? 3 : 0);
    const Sequence x = random_sequence(rng, h, 5 + 7 * t);
    const Model<LogProb> m(h);
    const Labeling l = t % 3 == 0 ? Labeling::by_label(h) : Labeling::by_state(h);
    ASSERT_TRUE(detail::use_scaled_kernel(m));
    const auto fast = set_probabilities(m, l, x);
    const auto slow = detail::set_probabilities_generic(m, l, x);
    ASSERT_EQ(fast.entries.size(), slow.entries.size());
    for (std::size_t i = 0; i < fast.entries.size(); ++i) {
      EXPECT_EQ(fast.entries[i].set.bits, slow.entries[i].set.bits);
      const double a = fast.entries[i].probability.ln(), b = slow.entries[i].probability.ln();
      EXPECT_NEAR(a, b, 1e-9 * std::max(1.0, std::fabs(b)));
    }
  }
}

TEST(SetProbability, ExactBackendAgreesWithLog) {
  std::mt19937_64 rng(33);
  for (int t = 0; t < 20; ++t) {
    const Hmm h = random_hmm(rng, 4, 2);
    const Sequence x = random_sequence(rng, h, 10);
    const Labeling l = Labeling::by_state(h);
    const auto exact = set_probabilities(Model<Rational>(h), l, x);
    const auto approx = set_probabilities(Model<LogProb>(h), l, x);
    ASSERT_EQ(exact.entries.size(), approx.entries.size());
    for (std::size_t i = 0; i < exact.entries.size(); ++i)
      EXPECT_NEAR(approx.entries[i].probability.ln(),
                  ProbTraits<LogProb>::from_rational(exact.entries[i].probability).ln(), 1e-9);
  }
}

TEST(SetProbability, CapIsEnforced) {
  const Hmm h = graph_hmm(Graph::complete(21));
  const Labeling l = Labeling::by_state(h);
  EXPECT_THROW(set_probabilities(Model<LogProb>(h), l, zeros(3)), CapExceeded);
  SetOptions opts;
  opts.max_items = 4;
  EXPECT_THROW(set_probabilities(Model<LogProb>(graph_hmm(Graph::complete(5))), l, zeros(3), opts), CapExceeded);
}

TEST(MostProbableSet, MatchesBruteForceWithTieBreak) {
  std::mt19937_64 rng(34);
  for (int t = 0; t < 60; ++t) {
    const Hmm h = random_hmm(rng, 2 + t % 4, 2);
    const Sequence x = random_sequence(rng, h, 1 + t % 6);
    const Labeling l = Labeling::by_state(h);
    const auto want = brute_sets(h, x, l);
    std::uint64_t best_bits = 0;
    Rational best = -1;
    for (const auto& [bits, p] : want) {
      if (p > best || (p == best && std::popcount(bits) < std::popcount(best_bits))) {
        best = p;
        best_bits = bits;
      }
    }
    const auto r = most_probable_set(Model<Rational>(h), l, x);
    EXPECT_EQ(r.set.bits, best_bits);
    EXPECT_EQ(r.probability, best);
  }
}

TEST(MostProbableSet, SizeFilter) {
  const Hmm h = graph_hmm(Graph::complete(3));
  const Model<Rational> m(h);
  const Labeling l = Labeling::by_state(h);
  const auto three = most_probable_set(m, l, zeros(3), {}, 3);
  EXPECT_EQ(three.set.bits, 0b111u);
  EXPECT_EQ(three.probability, Rational(6, 27));
  const auto two = most_probable_set(m, l, zeros(3), {}, 2);
  EXPECT_EQ(two.set.bits, 0b011u);
  EXPECT_THROW(most_probable_set(m, l, zeros(3), {}, 1), ZeroProbabilityError);
}

TEST(Restriction, EqualsMassOfSubsets) {
  std::mt19937_64 rng(35);
  for (int t = 0; t < 40; ++t) {
    const bool labeled = t % 2 == 1;
    const Hmm h = random_hmm(rng, 3 + t % 2, 2, labeled ? 3 : 0);
    const Sequence x = random_sequence(rng, h, 1 + t % 5);
    const Model<Rational> m(h);
    const Labeling l = labeled ? Labeling::by_label(h) : Labeling::by_state(h);
    const auto dist = set_probabilities(m, l, x);
    const std::uint64_t full = (std::uint64_t{1} << l.group_count()) - 1;
    for (std::uint64_t s = 0; s <= full; ++s) {
      Rational down = 0;
      for (const auto& e : dist.entries)
        if ((e.set.bits & ~s) == 0) down += e.probability;
      const Rational r = restriction_probability(m, l, x, bits_set(s, l));
      EXPECT_EQ(r, down);
      EXPECT_EQ(r, brute_restriction(h, x, l, s));
      // Monotone under adding a group.
      for (int g = 0; g < l.group_count(); ++g)
        EXPECT_LE(r, restriction_probability(m, l, x, bits_set(s | (std::uint64_t{1} << g), l)));
    }
    EXPECT_EQ(restriction_probability(m, l, x, full_set(l)), sequence_probability(m, x));
  }
}

TEST(Restriction, BestRestrictionMatchesEnumeration) {
  std::mt19937_64 rng(36);
  for (int t = 0; t < 40; ++t) {
    const Hmm h = random_hmm(rng, 3 + t % 3, 2);
    const Sequence x = random_sequence(rng, h, 2 + t % 5);
    const Model<Rational> m(h);
    const Labeling l = Labeling::by_state(h);
    const int k = 1 + t % h.state_count();
    std::uint64_t best_bits = 0;
    Rational best = -1;
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << h.state_count()); ++s) {
      if (std::popcount(s) != k) continue;
      const Rational p = brute_restriction(h, x, l, s);
      if (p > best) {
        best = p;
        best_bits = s;
      }
    }
    const auto r = most_probable_restriction(m, l, x, k);
    EXPECT_EQ(r.set.bits, best_bits);
    EXPECT_EQ(r.probability, best);
    EXPECT_EQ(r.set.size(), k);
  }
}

TEST(Restriction, ArgumentChecks) {
  const Hmm h = graph_hmm(Graph::complete(4));
  const Model<Rational> m(h);
  const Labeling l = Labeling::by_state(h);
  EXPECT_THROW(most_probable_restriction(m, l, zeros(3), -1), InputError);
  EXPECT_THROW(most_probable_restriction(m, l, zeros(3), 6), InputError);
  const auto none = most_probable_restriction(m, l, zeros(3), 0);
  EXPECT_EQ(none.probability, Rational(0));
  EXPECT_EQ(restriction_probability(m, l, Sequence{}, bits_set(0, l)), Rational(1));
  RestrictionOptions opts;
  opts.max_subsets = 3;
  EXPECT_THROW(most_probable_restriction(m, l, zeros(3), 2, opts), CapExceeded);
}

TEST(Restriction, ZeroProbabilitySequenceIsAnError) {
  Hmm h = single_state_hmm();
  h.add_symbol("b");
  EXPECT_THROW(most_probable_restriction(Model<Rational>(h), Labeling::by_state(h), Sequence{{1}}, 1),
               ZeroProbabilityError);
}

TEST(StateSetText, ParseAndRender) {
  const Hmm h = graph_hmm(Graph::complete(3));
  const Labeling l = Labeling::by_state(h);
  const StateSet s = parse_set({"v3", "v1"}, l);
  EXPECT_EQ(s.bits, 0b101u);
  EXPECT_EQ(render_set(s, l), "v1 v3");
  EXPECT_THROW(parse_set({"v9"}, l), InputError);
}
