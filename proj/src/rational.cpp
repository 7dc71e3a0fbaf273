#include "wtg/rational.hpp"

#include <sstream>

namespace wtg {

Int rat_num(const Rat& r) { return numerator(r); }
Int rat_den(const Rat& r) { return denominator(r); }

Int floor_div(const Int& a, const Int& b) {
  Int q = a / b;
  if ((a % b) != 0 && ((a < 0) != (b < 0))) q -= 1;
  return q;
}

Int rat_floor(const Rat& r) { return floor_div(numerator(r), denominator(r)); }

Int rat_ceil(const Rat& r) { return -floor_div(-numerator(r), denominator(r)); }

Rat rat_abs(const Rat& r) { return r < 0 ? Rat(-r) : r; }

std::optional<Rat> parse_rat(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto slash = s.find('/');
  try {
    if (slash != std::string::npos) {
      Int num(s.substr(0, slash));
      Int den(s.substr(slash + 1));
      if (den == 0) return std::nullopt;
      return Rat(num, den);
    }
    auto dot = s.find('.');
    if (dot != std::string::npos) {
      std::string ip = s.substr(0, dot), fp = s.substr(dot + 1);
      if (fp.empty()) fp = "0";
      bool neg = !ip.empty() && ip[0] == '-';
      if (ip == "-" || ip.empty()) ip = "0";
      Int den = 1;
      for (size_t i = 0; i < fp.size(); ++i) den *= 10;
      Int whole(ip);
      Int frac(fp);
      Int mag = whole < 0 ? Int(-whole) : whole;
      Rat v = Rat(mag * den + frac, den);
      return neg || whole < 0 ? Rat(-v) : v;
    }
    return Rat(Int(s));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

std::string rat_to_string(const Rat& r) {
  std::ostringstream os;
  os << numerator(r);
  if (denominator(r) != 1) os << '/' << denominator(r);
  return os.str();
}

std::string rat_to_decimal(const Rat& r, int digits) {
  Int scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rat scaled = r * scale;
  Int rounded = rat_floor(scaled + Rat(1, 2));
  bool neg = rounded < 0;
  Int mag = neg ? Int(-rounded) : rounded;
  std::ostringstream os;
  os << mag;
  std::string s = os.str();
  if (digits > 0) {
    if ((int)s.size() <= digits) s.insert(0, digits + 1 - s.size(), '0');
    s.insert(s.size() - digits, ".");
  }
  if (neg) s.insert(0, "-");
  return s;
}

ExtRat ExtRat::operator+(const ExtRat& o) const {
  if (is_finite() && o.is_finite()) return ExtRat(Rat(value_ + o.value_));
  if (is_plus_inf() || o.is_plus_inf()) {
    if (is_minus_inf() || o.is_minus_inf())
      throw std::logic_error("ExtRat: (+inf) + (-inf)");
    return plus_inf();
  }
  return minus_inf();
}

ExtRat ExtRat::operator-() const {
  switch (kind_) {
    case PlusInf: return minus_inf();
    case MinusInf: return plus_inf();
    default: return ExtRat(Rat(-value_));
  }
}

bool ExtRat::operator<(const ExtRat& o) const {
  if (kind_ == o.kind_) return kind_ == Finite && value_ < o.value_;
  if (is_minus_inf()) return true;
  if (o.is_minus_inf()) return false;
  if (o.is_plus_inf()) return true;
  return false;
}

std::string ExtRat::to_string() const {
  switch (kind_) {
    case PlusInf: return "+inf";
    case MinusInf: return "-inf";
    default: return rat_to_string(value_);
  }
}

ExtRat ext_min(const ExtRat& a, const ExtRat& b) { return a < b ? a : b; }
ExtRat ext_max(const ExtRat& a, const ExtRat& b) { return a < b ? b : a; }

}  // namespace wtg
