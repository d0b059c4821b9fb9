#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nashflow {

// Exact rational number, always kept in canonical form (reduced fraction,
// positive denominator). All engine quantities -- capacities, delays, times,
// labels, queue volumes, flows -- are carried as Rat; there is no rounding
// anywhere in the library.
class Rat {
 public:
  Rat() : v_(0) {}
  Rat(long n) : v_(n) {}
  Rat(long n, long d) : v_(n, d) {
    if (d == 0) throw std::invalid_argument("Rat: zero denominator");
    v_.canonicalize();
  }
  explicit Rat(const mpq_class& q) : v_(q) { v_.canonicalize(); }
  explicit Rat(const mpz_class& z) : v_(z) {}

  // Parses "p/q" or "n" with optional sign. Throws std::invalid_argument on
  // malformed input (including q == 0).
  static Rat parse(const std::string& text);

  // "p/q" for non-integers, plain "n" otherwise.
  std::string str() const;

  // Correctly rounded decimal in scientific notation with `digits`
  // significant digits, e.g. "1.0833333333333333333e+00".
  std::string decimal(int digits = 20) const;

  const mpq_class& raw() const { return v_; }
  mpz_class num() const { return v_.get_num(); }
  mpz_class den() const { return v_.get_den(); }

  bool is_zero() const { return sgn(v_) == 0; }
  bool is_integer() const { return v_.get_den() == 1; }
  int sign() const { return sgn(v_); }

  Rat& operator+=(const Rat& o) { v_ += o.v_; return *this; }
  Rat& operator-=(const Rat& o) { v_ -= o.v_; return *this; }
  Rat& operator*=(const Rat& o) { v_ *= o.v_; return *this; }
  Rat& operator/=(const Rat& o) {
    if (o.is_zero()) throw std::domain_error("Rat: division by zero");
    v_ /= o.v_;
    return *this;
  }

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  friend Rat operator-(const Rat& a) { return Rat(mpq_class(-a.v_)); }

  friend bool operator==(const Rat& a, const Rat& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Rat& a, const Rat& b) { return a.v_ != b.v_; }
  friend bool operator<(const Rat& a, const Rat& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Rat& a, const Rat& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Rat& a, const Rat& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Rat& a, const Rat& b) { return a.v_ >= b.v_; }

  double to_double() const { return v_.get_d(); }

 private:
  mpq_class v_;
};

inline Rat min(const Rat& a, const Rat& b) { return a < b ? a : b; }
inline Rat max(const Rat& a, const Rat& b) { return a < b ? b : a; }
inline Rat abs(const Rat& a) { return a.sign() < 0 ? -a : a; }

// Least positive integer K such that K*x is integral for every x.
mpz_class lcm_of_denominators(const std::vector<Rat>& xs);

}  // namespace nashflow
