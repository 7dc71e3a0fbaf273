#pragma once

// Exact piecewise-linear functions over clock space.
//
// A PWLFunction is a list of (Cell, value) pieces where each cell is a convex
// polyhedron given by rational linear inequalities and each value is either an
// affine expression or a +inf/-inf tag.  Cells are expected to be bounded
// (every construction path in the solver conjoins the 0 <= x <= M box), which
// makes exact vertex enumeration of cell closures available; all geometric
// predicates (emptiness, comparison of affine pieces on a cell, envelope
// selection) reduce to evaluations at those vertices.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "wtg/rational.hpp"

namespace wtg {

using Vec = std::vector<Rat>;  // a point of clock space

struct AffineExpr {
  Vec a;  // one coefficient per clock
  Rat b;

  AffineExpr() = default;
  explicit AffineExpr(int dim) : a(dim, Rat(0)), b(0) {}
  AffineExpr(Vec coeffs, Rat c) : a(std::move(coeffs)), b(std::move(c)) {}
  static AffineExpr constant(int dim, const Rat& c) {
    AffineExpr e(dim);
    e.b = c;
    return e;
  }

  int dim() const { return (int)a.size(); }
  Rat eval(const Vec& nu) const;
  AffineExpr operator+(const AffineExpr& o) const;
  AffineExpr operator-(const AffineExpr& o) const;
  AffineExpr operator-() const;
  AffineExpr scaled(const Rat& k) const;
  bool operator==(const AffineExpr& o) const { return a == o.a && b == o.b; }
  bool is_constant() const;
  std::string to_string(const std::vector<std::string>& clock_names) const;
};

// Linear constraint  e(x) >= 0  (strict: e(x) > 0).
struct LinCon {
  AffineExpr e;
  bool strict = false;

  LinCon() = default;
  LinCon(AffineExpr ex, bool s) : e(std::move(ex)), strict(s) {}
  // Canonical integer key of the hyperplane e = 0; `flipped` reports whether
  // the canonical orientation negates e.
  std::pair<std::vector<Int>, bool> normalized_key() const;
};

class Cell {
 public:
  Cell() = default;
  explicit Cell(int dim) : dim_(dim) {}
  // The box 0 <= x_i <= M.
  static Cell box(int dim, const Rat& M);

  int dim() const { return dim_; }
  const std::vector<LinCon>& cons() const { return cons_; }
  void add(LinCon c);
  Cell intersect(const Cell& o) const;

  bool contains(const Vec& nu) const;
  bool closure_contains(const Vec& nu) const;
  // Vertices of the closure (deduplicated).  Empty result means the closure
  // is empty.  Cached.
  const std::vector<Vec>& vertices() const;
  // True when no point satisfies all constraints including strict ones.
  bool is_empty() const;
  // Average of the closure vertices; a relative-interior point of the closure.
  std::optional<Vec> barycenter() const;
  // Drops duplicate constraints and constraints strictly positive on the whole
  // closure.  Keeps the geometric meaning unchanged.
  void simplify();

 private:
  int dim_ = 0;
  std::vector<LinCon> cons_;
  mutable bool have_verts_ = false;
  mutable std::vector<Vec> verts_;
};

// An affine expression extended with infinity tags.
struct ExtAffine {
  ExtRat::Kind kind = ExtRat::Finite;
  AffineExpr f;

  static ExtAffine finite(AffineExpr e) { return {ExtRat::Finite, std::move(e)}; }
  static ExtAffine inf(bool plus, int dim) {
    return {plus ? ExtRat::PlusInf : ExtRat::MinusInf, AffineExpr(dim)};
  }
  bool is_finite() const { return kind == ExtRat::Finite; }
  ExtRat eval(const Vec& nu) const;
  bool operator==(const ExtAffine& o) const {
    return kind == o.kind && (kind != ExtRat::Finite || f == o.f);
  }
};

struct Piece {
  Cell cell;
  ExtAffine val;
};

class PWLFunction {
 public:
  PWLFunction() = default;
  explicit PWLFunction(int dim) : dim_(dim) {}
  static PWLFunction constant(const Cell& domain, const ExtRat& v);
  static PWLFunction affine(const Cell& domain, AffineExpr e);

  int dim() const { return dim_; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  void add_piece(Piece p);
  size_t piece_count() const { return pieces_.size(); }
  bool empty() const { return pieces_.empty(); }

  std::optional<ExtRat> try_eval(const Vec& nu) const;
  ExtRat eval(const Vec& nu) const;  // throws std::domain_error outside domain

  PWLFunction restrict_to(const Cell& c) const;
  PWLFunction add_affine(const AffineExpr& e) const;
  PWLFunction add_const(const Rat& c) const;
  // g(nu) = f(nu[Y := 0]); `reset` is a per-clock flag vector.
  PWLFunction compose_reset(const std::vector<bool>& reset) const;
  // True if the function is the tag `k` somewhere.
  bool has_tag(ExtRat::Kind k) const;
  // Max |coefficient| over finite pieces; `flagged` set when infinite pieces
  // were skipped.
  Rat lipschitz_bound(bool* flagged = nullptr) const;
  // Coalesces adjacent cells carrying the same value expression.
  void merge_pieces();

 private:
  int dim_ = 0;
  std::vector<Piece> pieces_;
};

PWLFunction pwl_min(const PWLFunction& f, const PWLFunction& g);
PWLFunction pwl_max(const PWLFunction& f, const PWLFunction& g);

// Semantic equality on the common cell structure (assumes equal domains).
bool pwl_equal(const PWLFunction& f, const PWLFunction& g);

// One candidate move for the envelope solver: the value expression `val`
// is achievable exactly on the (closed) cell `valid`.
struct EnvCandidate {
  Cell valid;
  ExtAffine val;
};

// Lower (is_min) or upper envelope of partially defined affine candidates over
// `domain`.  Subcells of the domain where no candidate is valid are omitted
// from the result.
PWLFunction envelope(const Cell& domain, std::vector<EnvCandidate> cands,
                     bool is_min);

// One step of the game operator for a single move:
//   result(nu) = inf/sup over d >= 0 with (nu + d*1) in delay_set of
//                rate*d + weight + vdest((nu + d*1)[Y := 0])
// computed over the closure of the delay constraints (one-sided limits).
// `delay_set` constrains the point nu + d*1 and must bound d from above on
// the domain whenever rate or vdest make the objective unbounded.
// The result is defined on the subcells of `domain` from which some delay is
// valid; other subcells are omitted.
PWLFunction opt_delay(bool is_min, const Rat& rate, const Cell& delay_set,
                      const std::vector<bool>& reset, const Rat& weight,
                      const PWLFunction& vdest, const Cell& domain);

}  // namespace wtg
