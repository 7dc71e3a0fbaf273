#pragma once

// Exact arbitrary-precision rational numbers and their extension with
// +infinity / -infinity.  Every numeric quantity in the solver core
// (weights, delays, corner coordinates, value functions) is a Rat or an
// ExtRat; no floating point is used anywhere below the CLI printing layer.

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>
#include <string>

namespace wtg {

namespace mp = boost::multiprecision;

using Int = mp::number<mp::backends::cpp_int_backend<>, mp::et_off>;
using Rat = mp::number<mp::backends::rational_adaptor<mp::backends::cpp_int_backend<>>,
                       mp::et_off>;

Int rat_num(const Rat& r);
Int rat_den(const Rat& r);

Int floor_div(const Int& a, const Int& b);
Int rat_floor(const Rat& r);
Int rat_ceil(const Rat& r);
Rat rat_abs(const Rat& r);

// Parses "p", "p/q" or a plain decimal like "-1.25".
std::optional<Rat> parse_rat(const std::string& s);

std::string rat_to_string(const Rat& r);
// Decimal rendering with the given number of fractional digits (round to
// nearest, ties away from zero).
std::string rat_to_decimal(const Rat& r, int digits);

// Rational extended with +inf/-inf.  (+inf) + (-inf) is a program error.
class ExtRat {
 public:
  enum Kind { Finite, PlusInf, MinusInf };

  ExtRat() : kind_(Finite), value_(0) {}
  ExtRat(const Rat& v) : kind_(Finite), value_(v) {}  // NOLINT(implicit)
  ExtRat(long v) : kind_(Finite), value_(v) {}        // NOLINT(implicit)

  static ExtRat plus_inf() { return ExtRat(PlusInf); }
  static ExtRat minus_inf() { return ExtRat(MinusInf); }

  Kind kind() const { return kind_; }
  bool is_finite() const { return kind_ == Finite; }
  bool is_plus_inf() const { return kind_ == PlusInf; }
  bool is_minus_inf() const { return kind_ == MinusInf; }

  const Rat& value() const {
    if (!is_finite()) throw std::logic_error("ExtRat: value() on infinity");
    return value_;
  }

  ExtRat operator+(const ExtRat& o) const;
  ExtRat operator-() const;
  ExtRat operator-(const ExtRat& o) const { return *this + (-o); }

  bool operator==(const ExtRat& o) const {
    return kind_ == o.kind_ && (kind_ != Finite || value_ == o.value_);
  }
  bool operator!=(const ExtRat& o) const { return !(*this == o); }
  bool operator<(const ExtRat& o) const;
  bool operator<=(const ExtRat& o) const { return *this < o || *this == o; }
  bool operator>(const ExtRat& o) const { return o < *this; }
  bool operator>=(const ExtRat& o) const { return o <= *this; }

  std::string to_string() const;

 private:
  explicit ExtRat(Kind k) : kind_(k), value_(0) {}
  Kind kind_;
  Rat value_;
};

ExtRat ext_min(const ExtRat& a, const ExtRat& b);
ExtRat ext_max(const ExtRat& a, const ExtRat& b);

}  // namespace wtg
