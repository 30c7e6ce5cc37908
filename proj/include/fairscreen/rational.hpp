#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace fairscreen {

// Exact fraction with 64-bit numerator/denominator, always normalized
// (denominator > 0, gcd(|num|, den) == 1). Arithmetic runs through 128-bit
// intermediates and throws std::overflow_error instead of wrapping.
class Rational {
 public:
  Rational() = default;
  Rational(std::int64_t value) : num_(value) {}  // NOLINT: implicit by design
  Rational(std::int64_t num, std::int64_t den) : num_(num), den_(den) { normalize(); }

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  double to_double() const {
    return static_cast<double>(num_) / static_cast<double>(den_);
  }

  // Canonical form: "p" for integers, "p/q" otherwise.
  std::string str() const {
    if (den_ == 1) return std::to_string(num_);
    return std::to_string(num_) + "/" + std::to_string(den_);
  }

  // Accepts "p", "p/q", finite decimals such as "-0.765625", and decimal
  // exponent notation such as "1e-3".
  static Rational parse(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("Rational::parse: empty string");
    auto slash = text.find('/');
    if (slash != std::string::npos) {
      std::int64_t p = parse_int(text.substr(0, slash));
      std::int64_t q = parse_int(text.substr(slash + 1));
      return Rational(p, q);
    }
    auto exp_pos = text.find_first_of("eE");
    if (exp_pos != std::string::npos) {
      Rational base = parse(text.substr(0, exp_pos));
      std::int64_t e = parse_int(text.substr(exp_pos + 1));
      Rational ten_pow(1);
      for (std::int64_t i = 0; i < (e < 0 ? -e : e); ++i) ten_pow *= Rational(10);
      return e < 0 ? base / ten_pow : base * ten_pow;
    }
    auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(parse_int(text));
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (frac.empty()) return Rational(parse_int(whole));
    bool negative = !whole.empty() && whole[0] == '-';
    std::int64_t scale = 1;
    for (char c : frac) {
      if (c < '0' || c > '9') throw std::invalid_argument("Rational::parse: bad digit in '" + text + "'");
      scale = checked_cast(static_cast<__int128>(scale) * 10);
    }
    std::int64_t whole_part = (whole.empty() || whole == "-" || whole == "+") ? 0 : parse_int(whole);
    std::int64_t frac_part = parse_int(frac);
    __int128 num = static_cast<__int128>(whole_part) * scale;
    num += negative ? -static_cast<__int128>(frac_part) : static_cast<__int128>(frac_part);
    return make(num, scale);
  }

  Rational operator-() const {
    Rational r;
    r.num_ = -num_;
    r.den_ = den_;
    return r;
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    __int128 num = static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_;
    return make(num, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("Rational: division by zero");
    return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }

  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }
  Rational& operator/=(const Rational& o) { return *this = *this / o; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator<=(const Rational& a, const Rational& b) { return !(b < a); }
  friend bool operator>=(const Rational& a, const Rational& b) { return !(a < b); }

 private:
  static std::int64_t parse_int(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("Rational::parse: empty component");
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(s, &pos);
    } catch (const std::exception&) {
      throw std::invalid_argument("Rational::parse: cannot parse '" + s + "'");
    }
    if (pos != s.size()) throw std::invalid_argument("Rational::parse: trailing characters in '" + s + "'");
    return v;
  }

  static std::int64_t checked_cast(__int128 v) {
    if (v > static_cast<__int128>(INT64_MAX) || v < static_cast<__int128>(INT64_MIN))
      throw std::overflow_error("Rational: 64-bit overflow");
    return static_cast<std::int64_t>(v);
  }

  static Rational make(__int128 num, __int128 den) {
    if (den == 0) throw std::domain_error("Rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    __int128 a = num < 0 ? -num : num;
    __int128 g = gcd128(a, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
    Rational r;
    r.num_ = checked_cast(num);
    r.den_ = checked_cast(den);
    return r;
  }

  static __int128 gcd128(__int128 a, __int128 b) {
    while (b != 0) {
      __int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }

  void normalize() { *this = make(num_, den_); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

inline double to_double(double v) { return v; }
inline double to_double(const Rational& r) { return r.to_double(); }

}  // namespace fairscreen
