#pragma once

// Probability values with two interchangeable backends:
//
//   LogProb   natural log of a probability in double precision. Zero is
//             represented by -infinity, which is absorbing under
//             multiplication and an identity under addition, so products
//             with zero stay exactly zero.
//   Rational  exact rational over unbounded integers (GMP), always in lowest
//             terms.
//
// Algorithms are templates over the value type (see ProbTraits). The Prob
// class is a runtime-tagged wrapper for callers that choose the backend at
// run time; mixing backends in one operation throws BackendMismatch.

#include <boost/multiprecision/gmp.hpp>

#include <cmath>
#include <compare>
#include <concepts>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <variant>

#include "hmmdecode/error.hpp"

namespace hmmdecode {

using BigInt = boost::multiprecision::number<boost::multiprecision::gmp_int,
                                             boost::multiprecision::et_off>;
using Rational = boost::multiprecision::number<boost::multiprecision::gmp_rational,
                                               boost::multiprecision::et_off>;

enum class Backend { log, exact };

inline const char* backend_name(Backend b) { return b == Backend::log ? "log" : "exact"; }

namespace detail {

// ln|z| for an arbitrarily large integer, without overflowing a double.
inline double ln_abs(const BigInt& z) {
  long exp2 = 0;
  const double mant = mpz_get_d_2exp(&exp2, z.backend().data());
  return std::log(std::fabs(mant)) + static_cast<double>(exp2) * std::numbers::ln2;
}

}  // namespace detail

class LogProb {
 public:
  LogProb() = default;

  static LogProb zero() { return LogProb(); }
  static LogProb one() { return from_log(0.0); }
  static LogProb from_log(double ln_value) {
    LogProb p;
    p.ln_ = ln_value;
    return p;
  }
  static LogProb from_double(double p) {
    return p <= 0.0 ? zero() : from_log(std::log(p));
  }

  double ln() const { return ln_; }
  bool is_zero() const { return ln_ == -std::numeric_limits<double>::infinity(); }
  double to_double() const { return std::exp(ln_); }

  friend LogProb operator+(LogProb a, LogProb b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.ln_ < b.ln_) std::swap(a, b);
    return from_log(a.ln_ + std::log1p(std::exp(b.ln_ - a.ln_)));
  }
  friend LogProb operator*(LogProb a, LogProb b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.ln_ + b.ln_);
  }
  LogProb& operator+=(LogProb o) { return *this = *this + o; }
  LogProb& operator*=(LogProb o) { return *this = *this * o; }

  friend bool operator==(LogProb a, LogProb b) { return a.ln_ == b.ln_; }
  friend std::weak_ordering operator<=>(LogProb a, LogProb b) {
    if (a.ln_ < b.ln_) return std::weak_ordering::less;
    if (a.ln_ > b.ln_) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
  }

 private:
  double ln_ = -std::numeric_limits<double>::infinity();
};

// Parses "0.25", "1/4", "3", ".5" or "2.5e-3" into an exact rational.
// Throws InputError on anything else.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw InputError("malformed probability '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  // GMP reads a leading 0 as an octal prefix.
  auto decimal = [](std::string s) {
    const auto nz = s.find_first_not_of('0');
    return BigInt{nz == std::string::npos ? std::string("0") : s.substr(nz)};
  };
  auto digits = [&](std::size_t& p) {
    const std::size_t start = p;
    while (p < text.size() && text[p] >= '0' && text[p] <= '9') ++p;
    return text.substr(start, p - start);
  };

  Rational value;
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    std::size_t p = pos;
    const auto num = digits(p);
    if (num.empty() || p != slash) return fail();
    ++p;
    const auto den = digits(p);
    if (den.empty() || p != text.size()) return fail();
    const BigInt d = decimal(std::string(den));
    if (d == 0) throw InputError("zero denominator in '" + std::string(text) + "'");
    value = Rational(decimal(std::string(num)), d);
  } else {
    std::size_t p = pos;
    const auto whole = digits(p);
    std::string_view frac;
    if (p < text.size() && text[p] == '.') {
      ++p;
      frac = digits(p);
    }
    if (whole.empty() && frac.empty()) return fail();
    long exponent = 0;
    if (p < text.size() && (text[p] == 'e' || text[p] == 'E')) {
      ++p;
      bool exp_negative = false;
      if (p < text.size() && (text[p] == '-' || text[p] == '+')) {
        exp_negative = text[p] == '-';
        ++p;
      }
      const auto exp_digits = digits(p);
      if (exp_digits.empty() || exp_digits.size() > 6) return fail();
      exponent = std::stol(std::string(exp_digits));
      if (exp_negative) exponent = -exponent;
    }
    if (p != text.size()) return fail();
    const BigInt mantissa = decimal(std::string(whole) + std::string(frac));
    exponent -= static_cast<long>(frac.size());
    BigInt scale = 1;
    for (long i = 0; i < std::labs(exponent); ++i) scale *= 10;
    value = exponent >= 0 ? Rational(mantissa * scale) : Rational(mantissa, scale);
  }
  return negative ? Rational(-value) : value;
}

inline std::string to_string(const Rational& r) {
  return numerator(r).str() + "/" + denominator(r).str();
}

// Base-10 logarithm; -inf for zero.
inline double log10_of(const Rational& r) {
  if (r <= 0) return -std::numeric_limits<double>::infinity();
  return (detail::ln_abs(numerator(r)) - detail::ln_abs(denominator(r))) / std::numbers::ln10;
}
inline double log10_of(LogProb p) { return p.ln() / std::numbers::ln10; }

// 12 significant digits, locale independent.
inline std::string format_log10(double value) {
  if (std::isinf(value)) return value < 0 ? "-inf" : "inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

template <class P>
struct ProbTraits;

template <>
struct ProbTraits<LogProb> {
  static constexpr Backend backend = Backend::log;
  static LogProb zero() { return LogProb::zero(); }
  static LogProb one() { return LogProb::one(); }
  static LogProb from_rational(const Rational& r) {
    if (r <= 0) return LogProb::zero();
    return LogProb::from_log(detail::ln_abs(numerator(r)) - detail::ln_abs(denominator(r)));
  }
  static bool is_zero(LogProb p) { return p.is_zero(); }
  static double log10(LogProb p) { return log10_of(p); }
  // a / b as a double, for b nonzero.
  static double ratio(LogProb a, LogProb b) { return a.is_zero() ? 0.0 : std::exp(a.ln() - b.ln()); }
};

template <>
struct ProbTraits<Rational> {
  static constexpr Backend backend = Backend::exact;
  static Rational zero() { return Rational(0); }
  static Rational one() { return Rational(1); }
  static Rational from_rational(const Rational& r) { return r; }
  static bool is_zero(const Rational& p) { return p == 0; }
  static double log10(const Rational& p) { return log10_of(p); }
  static double ratio(const Rational& a, const Rational& b) {
    return static_cast<Rational>(a / b).convert_to<double>();
  }
};

template <class P>
concept ProbValue = requires(const P& a, const P& b) {
  { ProbTraits<P>::zero() } -> std::same_as<P>;
  { ProbTraits<P>::from_rational(Rational()) } -> std::same_as<P>;
  { a + b } -> std::convertible_to<P>;
  { a * b } -> std::convertible_to<P>;
  { a < b } -> std::convertible_to<bool>;
  { a == b } -> std::convertible_to<bool>;
};

template <ProbValue P>
P prob_zero() { return ProbTraits<P>::zero(); }
template <ProbValue P>
P prob_one() { return ProbTraits<P>::one(); }
template <ProbValue P>
bool is_zero(const P& p) { return ProbTraits<P>::is_zero(p); }

// Runtime-tagged probability.
class Prob {
 public:
  explicit Prob(LogProb p) : value_(p) {}
  explicit Prob(Rational r) : value_(std::move(r)) {}

  static Prob zero(Backend b) { return b == Backend::log ? Prob(LogProb::zero()) : Prob(Rational(0)); }
  static Prob one(Backend b) { return b == Backend::log ? Prob(LogProb::one()) : Prob(Rational(1)); }

  Backend backend() const { return value_.index() == 0 ? Backend::log : Backend::exact; }
  const LogProb& as_log() const {
    if (backend() != Backend::log) throw BackendMismatch();
    return std::get<LogProb>(value_);
  }
  const Rational& as_exact() const {
    if (backend() != Backend::exact) throw BackendMismatch();
    return std::get<Rational>(value_);
  }
  bool is_zero() const {
    return backend() == Backend::log ? as_log().is_zero() : as_exact() == 0;
  }
  double log10() const { return backend() == Backend::log ? log10_of(as_log()) : log10_of(as_exact()); }

  friend Prob operator+(const Prob& a, const Prob& b) {
    check_same(a, b);
    return a.backend() == Backend::log ? Prob(a.as_log() + b.as_log()) : Prob(a.as_exact() + b.as_exact());
  }
  friend Prob operator*(const Prob& a, const Prob& b) {
    check_same(a, b);
    return a.backend() == Backend::log ? Prob(a.as_log() * b.as_log()) : Prob(a.as_exact() * b.as_exact());
  }
  friend std::weak_ordering operator<=>(const Prob& a, const Prob& b) {
    check_same(a, b);
    if (a.backend() == Backend::log) return a.as_log() <=> b.as_log();
    if (a.as_exact() < b.as_exact()) return std::weak_ordering::less;
    if (b.as_exact() < a.as_exact()) return std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
  }
  friend bool operator==(const Prob& a, const Prob& b) { return (a <=> b) == 0; }

 private:
  static void check_same(const Prob& a, const Prob& b) {
    if (a.backend() != b.backend()) throw BackendMismatch();
  }

  std::variant<LogProb, Rational> value_;
};

inline Prob prob_add(const Prob& a, const Prob& b) { return a + b; }
inline Prob prob_mul(const Prob& a, const Prob& b) { return a * b; }
inline std::weak_ordering prob_cmp(const Prob& a, const Prob& b) { return a <=> b; }

template <ProbValue P>
Prob to_prob(const P& p) { return Prob(p); }

// Parses decimal or ratio text into the requested backend.
inline Prob parse_prob(std::string_view text, Backend backend) {
  Rational r = parse_rational(text);
  if (backend == Backend::exact) return Prob(std::move(r));
  return Prob(ProbTraits<LogProb>::from_rational(r));
}

// Exact values render as "num/den"; log values as their base-10 logarithm.
inline std::string to_string(const Prob& p) {
  return p.backend() == Backend::exact ? to_string(p.as_exact()) : format_log10(p.log10());
}

}  // namespace hmmdecode
