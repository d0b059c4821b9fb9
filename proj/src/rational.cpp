#include "nashflow/rational.hpp"

#include <cctype>

namespace nashflow {

namespace {

bool valid_int_token(const std::string& s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '+' || s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i)
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return true;
}

}  // namespace

Rat Rat::parse(const std::string& text) {
  auto slash = text.find('/');
  std::string num = text.substr(0, slash);
  std::string den = slash == std::string::npos ? "" : text.substr(slash + 1);
  if (!valid_int_token(num) || (slash != std::string::npos && !valid_int_token(den)))
    throw std::invalid_argument("malformed rational: '" + text + "'");
  if (num[0] == '+') num.erase(0, 1);  // mpz rejects an explicit plus
  if (!den.empty() && den[0] == '+') den.erase(0, 1);
  mpq_class q;
  if (slash == std::string::npos) {
    q = mpq_class(mpz_class(num));
  } else {
    mpz_class d(den);
    if (d == 0) throw std::invalid_argument("malformed rational (zero denominator): '" + text + "'");
    q = mpq_class(mpz_class(num), d);
  }
  q.canonicalize();
  return Rat(q);
}

std::string Rat::str() const {
  if (is_integer()) return v_.get_num().get_str();
  return v_.get_num().get_str() + "/" + v_.get_den().get_str();
}

std::string Rat::decimal(int digits) const {
  if (digits < 1) digits = 1;
  if (is_zero()) {
    std::string d = "0.";
    d.append(static_cast<std::size_t>(digits - 1), '0');
    return d + "e+00";
  }
  mpz_class p = num();
  mpz_class q = den();
  bool neg = p < 0;
  if (neg) p = -p;

  // Exponent e with 10^e <= p/q < 10^(e+1), found via digit counts then
  // corrected by exact comparison.
  long e = static_cast<long>(mpz_sizeinbase(p.get_mpz_t(), 10)) -
           static_cast<long>(mpz_sizeinbase(q.get_mpz_t(), 10));
  auto pow10 = [](long k) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, static_cast<unsigned long>(k));
    return r;
  };
  auto cmp_with_pow = [&](long k) {
    // sign of p/q - 10^k
    if (k >= 0) return cmp(p, q * pow10(k));
    return cmp(p * pow10(-k), q);
  };
  while (cmp_with_pow(e) < 0) --e;
  while (cmp_with_pow(e + 1) >= 0) ++e;

  // Round p/q * 10^(digits-1-e) to an integer, half to even.
  long shift = digits - 1 - e;
  mpz_class sp = p, sq = q;
  if (shift >= 0) sp *= pow10(shift); else sq *= pow10(-shift);
  mpz_class quo, rem;
  mpz_fdiv_qr(quo.get_mpz_t(), rem.get_mpz_t(), sp.get_mpz_t(), sq.get_mpz_t());
  int half = cmp(rem * 2, sq);
  if (half > 0 || (half == 0 && mpz_odd_p(quo.get_mpz_t()))) quo += 1;

  std::string ds = quo.get_str();
  if (static_cast<int>(ds.size()) > digits) {  // rounding carried into a new digit
    ds.pop_back();
    ++e;
  }
  std::string out = neg ? "-" : "";
  out += ds.substr(0, 1);
  if (ds.size() > 1) {
    out += ".";
    out += ds.substr(1);
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "%+03ld", e);
  out += "e";
  out += buf;
  return out;
}

mpz_class lcm_of_denominators(const std::vector<Rat>& xs) {
  mpz_class k = 1;
  for (const auto& x : xs) mpz_lcm(k.get_mpz_t(), k.get_mpz_t(), x.den().get_mpz_t());
  return k;
}

}  // namespace nashflow
