#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hmmdecode/prob.hpp"

using namespace hmmdecode;

namespace {

Prob exact(long n, long d) { return Prob(Rational(n, d)); }
Prob logp(double p) { return Prob(LogProb::from_double(p)); }

}  // namespace

TEST(ProbAdd, IdentityAndExactSums) {
  EXPECT_EQ(prob_add(Prob::zero(Backend::exact), exact(3, 7)), exact(3, 7));
  EXPECT_EQ(prob_add(exact(1, 4), exact(1, 4)), exact(1, 2));
  EXPECT_EQ(prob_add(Prob::zero(Backend::log), logp(0.3)).as_log(), logp(0.3).as_log());
}

TEST(ProbAdd, LogSumExpOfEqualTerms) {
  const Prob s = prob_add(logp(0.25), logp(0.25));
  EXPECT_NEAR(s.as_log().ln(), std::log(0.5), 1e-12);
}

TEST(ProbMul, IdentityZeroAndReduction) {
  EXPECT_EQ(prob_mul(exact(2, 5), Prob::one(Backend::exact)), exact(2, 5));
  EXPECT_TRUE(prob_mul(exact(2, 5), Prob::zero(Backend::exact)).is_zero());
  EXPECT_TRUE(prob_mul(logp(0.4), Prob::zero(Backend::log)).is_zero());
  const Prob p = prob_mul(exact(2, 3), exact(3, 4));
  EXPECT_EQ(to_string(p), "1/2");
}

TEST(ProbCmp, Ordering) {
  EXPECT_TRUE(prob_cmp(Prob::zero(Backend::exact), exact(1, 1000)) < 0);
  EXPECT_TRUE(prob_cmp(Prob::zero(Backend::log), logp(1e-300)) < 0);
  EXPECT_TRUE(prob_cmp(exact(1, 3), exact(2, 6)) == 0);
  BigInt p19 = 1, p20 = 1;
  for (int i = 0; i < 19; ++i) p19 *= 7;
  p20 = p19 * 7;
  EXPECT_TRUE(prob_cmp(Prob(Rational(BigInt(1), p20)), Prob(Rational(BigInt(1), p19))) < 0);
}

TEST(ProbBackend, MismatchIsRejected) {
  EXPECT_THROW(prob_add(exact(1, 2), logp(0.5)), BackendMismatch);
  EXPECT_THROW(prob_mul(exact(1, 2), logp(0.5)), BackendMismatch);
  EXPECT_THROW((void)prob_cmp(exact(1, 2), logp(0.5)), BackendMismatch);
  EXPECT_THROW((void)exact(1, 2).as_log(), BackendMismatch);
}

TEST(ProbParse, DecimalAndRatioForms) {
  EXPECT_EQ(parse_rational("0.25"), Rational(1, 4));
  EXPECT_EQ(parse_rational("1/4"), Rational(1, 4));
  EXPECT_EQ(parse_rational("2/8"), Rational(1, 4));
  EXPECT_EQ(parse_rational(".5"), Rational(1, 2));
  EXPECT_EQ(parse_rational("1"), Rational(1));
  EXPECT_EQ(parse_rational("2.5e-3"), Rational(1, 400));
  EXPECT_EQ(parse_rational("3E2"), Rational(300));
  for (const char* bad : {"", "abc", "1/", "/2", "1/0", "0.2.3", "1e", "1/2/3", "0x10", "1 "})
    EXPECT_THROW(parse_rational(bad), InputError) << bad;
  EXPECT_EQ(parse_prob("1/4", Backend::exact).as_exact(), Rational(1, 4));
  EXPECT_NEAR(parse_prob("1/4", Backend::log).as_log().ln(), std::log(0.25), 1e-15);
}

TEST(ProbRender, RationalAndLog10) {
  EXPECT_EQ(to_string(exact(6, 8)), "3/4");
  EXPECT_EQ(to_string(Prob::zero(Backend::exact)), "0/1");
  EXPECT_EQ(to_string(logp(0.001)), "-3");
  EXPECT_EQ(to_string(logp(0.5)), "-0.301029995664");
  EXPECT_EQ(to_string(Prob::zero(Backend::log)), "-inf");
  // Huge denominators do not overflow the log10 rendering.
  BigInt big = 1;
  for (int i = 0; i < 2000; ++i) big *= 10;
  EXPECT_EQ(format_log10(log10_of(Rational(BigInt(1), big))), "-2000");
}

TEST(ProbProperties, RationalFieldLaws) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long> num(0, 50), den(1, 50);
  for (int t = 0; t < 500; ++t) {
    const Rational a(num(rng), den(rng)), b(num(rng), den(rng)), c(num(rng), den(rng));
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a + b, b + a);
  }
}

TEST(ProbProperties, LogBackendRoundTripsSums) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> expo(-300.0, 0.0);
  for (int t = 0; t < 1000; ++t) {
    const double a = std::pow(10.0, expo(rng));
    const double b = std::pow(10.0, expo(rng)) * 0.5;
    const double want = a + b;
    const double got = (LogProb::from_double(a) + LogProb::from_double(b)).to_double();
    EXPECT_NEAR(got / want, 1.0, 1e-9);
    EXPECT_EQ(LogProb::from_double(a) + LogProb::from_double(b), LogProb::from_double(b) + LogProb::from_double(a));
  }
}

TEST(ProbProperties, BackendsAgreeOnDyadicRationals) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> shift(0, 60);
  std::uniform_int_distribution<long> odd(0, 1000);
  for (int t = 0; t < 500; ++t) {
    auto dyadic = [&] {
      const int s = shift(rng);
      BigInt den = BigInt(1) << s;
      const BigInt num = BigInt(odd(rng)) % (den + 1);
      return Rational(num, den);
    };
    const Rational a = dyadic(), b = dyadic();
    const auto exact_order = prob_cmp(Prob(a), Prob(b));
    const auto log_order = prob_cmp(Prob(ProbTraits<LogProb>::from_rational(a)),
                                    Prob(ProbTraits<LogProb>::from_rational(b)));
    EXPECT_EQ(exact_order, log_order) << to_string(a) << " vs " << to_string(b);
  }
}
