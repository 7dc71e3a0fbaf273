#include "wtg/pwl.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wtg {

// ---------------------------------------------------------------- AffineExpr

Rat AffineExpr::eval(const Vec& nu) const {
  Rat r = b;
  for (size_t i = 0; i < a.size(); ++i) r += a[i] * nu[i];
  return r;
}

AffineExpr AffineExpr::operator+(const AffineExpr& o) const {
  AffineExpr r = *this;
  for (size_t i = 0; i < a.size(); ++i) r.a[i] += o.a[i];
  r.b += o.b;
  return r;
}

AffineExpr AffineExpr::operator-(const AffineExpr& o) const {
  return *this + (-o);
}

AffineExpr AffineExpr::operator-() const {
  AffineExpr r = *this;
  for (auto& c : r.a) c = -c;
  r.b = -r.b;
  return r;
}

AffineExpr AffineExpr::scaled(const Rat& k) const {
  AffineExpr r = *this;
  for (auto& c : r.a) c *= k;
  r.b *= k;
  return r;
}

bool AffineExpr::is_constant() const {
  for (const auto& c : a)
    if (c != 0) return false;
  return true;
}

std::string AffineExpr::to_string(const std::vector<std::string>& names) const {
  std::ostringstream os;
  bool first = true;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    if (!first) os << " + ";
    os << rat_to_string(a[i]) << "*" << (i < names.size() ? names[i] : "x" + std::to_string(i));
    first = false;
  }
  if (first || b != 0) {
    if (!first) os << " + ";
    os << rat_to_string(b);
  }
  return os.str();
}

// -------------------------------------------------------------------- LinCon

std::pair<std::vector<Int>, bool> LinCon::normalized_key() const {
  Int l = 1;
  for (const auto& c : e.a) l = lcm(l, rat_den(c));
  l = lcm(l, rat_den(e.b));
  std::vector<Int> v;
  v.reserve(e.a.size() + 1);
  for (const auto& c : e.a) v.push_back(Int(rat_num(c) * (l / rat_den(c))));
  v.push_back(Int(rat_num(e.b) * (l / rat_den(e.b))));
  Int g = 0;
  for (const auto& x : v) g = gcd(g, x);
  if (g > 1)
    for (auto& x : v) x /= g;
  bool flipped = false;
  for (const auto& x : v) {
    if (x == 0) continue;
    if (x < 0) flipped = true;
    break;
  }
  if (flipped)
    for (auto& x : v) x = -x;
  return {v, flipped};
}

// ---------------------------------------------------------------------- Cell

Cell Cell::box(int dim, const Rat& M) {
  Cell c(dim);
  for (int i = 0; i < dim; ++i) {
    AffineExpr lo(dim), hi(dim);
    lo.a[i] = 1;                  // x_i >= 0
    hi.a[i] = -1;                 // M - x_i >= 0
    hi.b = M;
    c.add(LinCon(lo, false));
    c.add(LinCon(hi, false));
  }
  return c;
}

void Cell::add(LinCon c) {
  // Skip exact duplicates so repeated box intersections stay canonical.
  for (const auto& ex : cons_)
    if (ex.strict == c.strict && ex.e.b == c.e.b && ex.e.a == c.e.a) return;
  cons_.push_back(std::move(c));
  have_verts_ = false;
}

Cell Cell::intersect(const Cell& o) const {
  Cell r = *this;
  for (const auto& c : o.cons_) r.add(c);
  return r;
}

bool Cell::contains(const Vec& nu) const {
  for (const auto& c : cons_) {
    Rat v = c.e.eval(nu);
    if (c.strict ? v <= 0 : v < 0) return false;
  }
  return true;
}

bool Cell::closure_contains(const Vec& nu) const {
  for (const auto& c : cons_)
    if (c.e.eval(nu) < 0) return false;
  return true;
}

namespace {

// Solves the square system rows[i] . x + rhs[i] = 0 exactly; returns nullopt
// when singular.
std::optional<Vec> solve_square(std::vector<Vec> rows, Vec rhs) {
  int n = (int)rows.size();
  for (int col = 0; col < n; ++col) {
    int piv = -1;
    for (int r = col; r < n; ++r)
      if (rows[r][col] != 0) { piv = r; break; }
    if (piv < 0) return std::nullopt;
    std::swap(rows[piv], rows[col]);
    std::swap(rhs[piv], rhs[col]);
    Rat p = rows[col][col];
    for (int r = 0; r < n; ++r) {
      if (r == col || rows[r][col] == 0) continue;
      Rat f = rows[r][col] / p;
      for (int c2 = col; c2 < n; ++c2) rows[r][c2] -= f * rows[col][c2];
      rhs[r] -= f * rhs[col];
    }
  }
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = Rat(-rhs[i] / rows[i][i]);
  return x;
}

}  // namespace

const std::vector<Vec>& Cell::vertices() const {
  if (have_verts_) return verts_;
  verts_.clear();
  int n = dim_;
  int k = (int)cons_.size();
  if (n == 0) {
    // Zero-dimensional space: the single point is the empty tuple.
    bool ok = true;
    for (const auto& c : cons_)
      if (c.e.b < 0) ok = false;
    if (ok) verts_.push_back({});
    have_verts_ = true;
    return verts_;
  }
  std::vector<int> idx(n);
  std::function<void(int, int)> rec = [&](int start, int depth) {
    if (depth == n) {
      std::vector<Vec> rows;
      Vec rhs;
      for (int i = 0; i < n; ++i) {
        rows.push_back(cons_[idx[i]].e.a);
        rhs.push_back(cons_[idx[i]].e.b);
      }
      auto sol = solve_square(std::move(rows), std::move(rhs));
      if (!sol) return;
      if (!closure_contains(*sol)) return;
      if (std::find(verts_.begin(), verts_.end(), *sol) == verts_.end())
        verts_.push_back(*sol);
      return;
    }
    for (int i = start; i <= k - (n - depth); ++i) {
      idx[depth] = i;
      rec(i + 1, depth + 1);
    }
  };
  if (k >= n) rec(0, 0);
  have_verts_ = true;
  return verts_;
}

bool Cell::is_empty() const {
  const auto& vs = vertices();
  if (vs.empty()) return true;
  for (const auto& c : cons_) {
    if (!c.strict) continue;
    bool all_zero = true;
    for (const auto& v : vs)
      if (c.e.eval(v) != 0) { all_zero = false; break; }
    if (all_zero) return true;  // constraint holds with equality on the closure
  }
  return false;
}

std::optional<Vec> Cell::barycenter() const {
  const auto& vs = vertices();
  if (vs.empty()) return std::nullopt;
  Vec p(dim_, Rat(0));
  for (const auto& v : vs)
    for (int i = 0; i < dim_; ++i) p[i] += v[i];
  Rat k(1, (long)vs.size());
  for (auto& c : p) c *= k;
  return p;
}

void Cell::simplify() {
  const auto vs = vertices();  // copy: we mutate cons_ below
  if (vs.empty()) return;
  std::vector<LinCon> kept;
  std::set<std::tuple<std::vector<Int>, bool, bool>> seen;
  for (const auto& c : cons_) {
    Rat mn = c.e.eval(vs[0]);
    for (const auto& v : vs) mn = std::min(mn, c.e.eval(v));
    if (mn > 0) continue;  // never active on the closure
    auto [key, flipped] = c.normalized_key();
    if (!seen.insert({key, flipped, c.strict}).second) continue;
    kept.push_back(c);
  }
  cons_ = std::move(kept);
  verts_ = vs;
  have_verts_ = true;
}

// ----------------------------------------------------------------- ExtAffine

ExtRat ExtAffine::eval(const Vec& nu) const {
  switch (kind) {
    case ExtRat::PlusInf: return ExtRat::plus_inf();
    case ExtRat::MinusInf: return ExtRat::minus_inf();
    default: return ExtRat(f.eval(nu));
  }
}

// --------------------------------------------------------------- PWLFunction

PWLFunction PWLFunction::constant(const Cell& domain, const ExtRat& v) {
  PWLFunction f(domain.dim());
  ExtAffine e = v.is_finite()
                    ? ExtAffine::finite(AffineExpr::constant(domain.dim(), v.value()))
                    : ExtAffine::inf(v.is_plus_inf(), domain.dim());
  f.add_piece({domain, e});
  return f;
}

PWLFunction PWLFunction::affine(const Cell& domain, AffineExpr e) {
  PWLFunction f(domain.dim());
  f.add_piece({domain, ExtAffine::finite(std::move(e))});
  return f;
}

void PWLFunction::add_piece(Piece p) { pieces_.push_back(std::move(p)); }

std::optional<ExtRat> PWLFunction::try_eval(const Vec& nu) const {
  for (const auto& p : pieces_)
    if (p.cell.contains(nu)) return p.val.eval(nu);
  for (const auto& p : pieces_)
    if (p.cell.closure_contains(nu)) return p.val.eval(nu);
  return std::nullopt;
}

ExtRat PWLFunction::eval(const Vec& nu) const {
  auto v = try_eval(nu);
  if (!v) throw std::domain_error("PWLFunction::eval: point outside domain");
  return *v;
}

PWLFunction PWLFunction::restrict_to(const Cell& c) const {
  PWLFunction r(dim_);
  for (const auto& p : pieces_) {
    Cell cc = p.cell.intersect(c);
    if (cc.is_empty()) continue;
    r.add_piece({std::move(cc), p.val});
  }
  return r;
}

PWLFunction PWLFunction::add_affine(const AffineExpr& e) const {
  PWLFunction r(dim_);
  for (const auto& p : pieces_) {
    Piece q = p;
    if (q.val.is_finite()) q.val.f = q.val.f + e;
    r.add_piece(std::move(q));
  }
  return r;
}

PWLFunction PWLFunction::add_const(const Rat& c) const {
  return add_affine(AffineExpr::constant(dim_, c));
}

PWLFunction PWLFunction::compose_reset(const std::vector<bool>& reset) const {
  PWLFunction r(dim_);
  for (const auto& p : pieces_) {
    Cell c(dim_);
    bool dead = false;
    for (const auto& con : p.cell.cons()) {
      AffineExpr e = con.e;
      for (int i = 0; i < dim_; ++i)
        if (reset[i]) e.a[i] = 0;
      if (e.is_constant()) {
        if (con.strict ? e.b <= 0 : e.b < 0) { dead = true; break; }
        continue;
      }
      c.add(LinCon(e, con.strict));
    }
    if (dead) continue;
    ExtAffine v = p.val;
    if (v.is_finite())
      for (int i = 0; i < dim_; ++i)
        if (reset[i]) v.f.a[i] = 0;
    r.add_piece({std::move(c), std::move(v)});
  }
  return r;
}

bool PWLFunction::has_tag(ExtRat::Kind k) const {
  for (const auto& p : pieces_)
    if (p.val.kind == k) return true;
  return false;
}

Rat PWLFunction::lipschitz_bound(bool* flagged) const {
  Rat best(0);
  bool flag = false;
  for (const auto& p : pieces_) {
    if (!p.val.is_finite()) { flag = true; continue; }
    for (const auto& c : p.val.f.a) best = std::max(best, rat_abs(c));
  }
  if (flagged) *flagged = flag;
  return best;
}

namespace {

using ConId = std::tuple<std::vector<Int>, bool, bool>;  // key, flipped, strict

std::vector<ConId> cell_ids(const Cell& c) {
  std::vector<ConId> ids;
  for (const auto& con : c.cons()) {
    auto [key, fl] = con.normalized_key();
    ids.push_back({key, fl, con.strict});
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

// If cells a and b are identical except for one complementary constraint,
// returns the merged cell (their union).
std::optional<Cell> try_complement_merge(const Cell& a, const Cell& b) {
  auto ia = cell_ids(a), ib = cell_ids(b);
  std::vector<ConId> da, db;
  std::set_difference(ia.begin(), ia.end(), ib.begin(), ib.end(),
                      std::back_inserter(da));
  std::set_difference(ib.begin(), ib.end(), ia.begin(), ia.end(),
                      std::back_inserter(db));
  if (da.size() != 1 || db.size() != 1) return std::nullopt;
  const auto& [ka, fa, sa] = da[0];
  const auto& [kb, fb, sb] = db[0];
  if (ka != kb || fa == fb) return std::nullopt;
  if (sa && sb) return std::nullopt;  // union would miss the hyperplane itself
  // Merged cell: the shared constraints.
  Cell m(a.dim());
  const auto& [dka, dfa, dsa] = da[0];
  (void)dka; (void)dfa; (void)dsa;
  for (const auto& con : a.cons()) {
    auto [key, fl] = con.normalized_key();
    if (std::tuple<std::vector<Int>, bool, bool>{key, fl, con.strict} == da[0])
      continue;
    m.add(con);
  }
  return m;
}

}  // namespace

void PWLFunction::merge_pieces() {
  for (auto it = pieces_.begin(); it != pieces_.end();) {
    it->cell.simplify();
    if (it->cell.vertices().empty())
      it = pieces_.erase(it);
    else
      ++it;
  }
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < pieces_.size() && !changed; ++i) {
      for (size_t j = i + 1; j < pieces_.size() && !changed; ++j) {
        if (!(pieces_[i].val == pieces_[j].val)) continue;
        auto m = try_complement_merge(pieces_[i].cell, pieces_[j].cell);
        if (!m) continue;
        m->simplify();
        pieces_[i].cell = std::move(*m);
        pieces_.erase(pieces_.begin() + j);
        changed = true;
      }
    }
  }
}

// ------------------------------------------------------------- min/max/equal

namespace {

PWLFunction pwl_minmax(const PWLFunction& f, const PWLFunction& g, bool is_min) {
  PWLFunction r(f.dim());
  for (const auto& pf : f.pieces()) {
    for (const auto& pg : g.pieces()) {
      Cell c = pf.cell.intersect(pg.cell);
      if (c.is_empty()) continue;
      const ExtAffine& vf = pf.val;
      const ExtAffine& vg = pg.val;
      if (!vf.is_finite() || !vg.is_finite()) {
        // Total order on tags: -inf < finite < +inf.
        auto rank = [](const ExtAffine& v) {
          return v.kind == ExtRat::MinusInf ? 0 : v.kind == ExtRat::Finite ? 1 : 2;
        };
        bool take_f = is_min ? rank(vf) <= rank(vg) : rank(vf) >= rank(vg);
        r.add_piece({std::move(c), take_f ? vf : vg});
        continue;
      }
      AffineExpr diff = vf.f - vg.f;  // f - g
      const auto& vs = c.vertices();
      bool has_pos = false, has_neg = false;
      for (const auto& v : vs) {
        Rat d = diff.eval(v);
        if (d > 0) has_pos = true;
        if (d < 0) has_neg = true;
      }
      bool f_wins_low = is_min ? !has_pos : !has_neg;   // f optimal everywhere
      bool g_wins_low = is_min ? !has_neg : !has_pos;   // g optimal everywhere
      if (f_wins_low) {
        r.add_piece({std::move(c), vf});
      } else if (g_wins_low) {
        r.add_piece({std::move(c), vg});
      } else {
        // Split on the hyperplane f - g = 0.
        Cell cf = c, cg = c;
        if (is_min) {
          cf.add(LinCon(-diff, false));  // f <= g
          cg.add(LinCon(diff, true));    // f > g
        } else {
          cf.add(LinCon(diff, false));   // f >= g
          cg.add(LinCon(-diff, true));   // f < g
        }
        if (!cf.is_empty()) r.add_piece({std::move(cf), vf});
        if (!cg.is_empty()) r.add_piece({std::move(cg), vg});
      }
    }
  }
  r.merge_pieces();
  return r;
}

}  // namespace

PWLFunction pwl_min(const PWLFunction& f, const PWLFunction& g) {
  return pwl_minmax(f, g, true);
}

PWLFunction pwl_max(const PWLFunction& f, const PWLFunction& g) {
  return pwl_minmax(f, g, false);
}

bool pwl_equal(const PWLFunction& f, const PWLFunction& g) {
  for (const auto& pf : f.pieces()) {
    for (const auto& pg : g.pieces()) {
      Cell c = pf.cell.intersect(pg.cell);
      if (c.is_empty()) continue;
      if (pf.val.kind != pg.val.kind) return false;
      if (!pf.val.is_finite()) continue;
      AffineExpr diff = pf.val.f - pg.val.f;
      for (const auto& v : c.vertices())
        if (diff.eval(v) != 0) return false;
    }
  }
  return true;
}

// ------------------------------------------------------------------ envelope

PWLFunction envelope(const Cell& domain, std::vector<EnvCandidate> cands,
                     bool is_min) {
  const int dim = domain.dim();
  PWLFunction result(dim);
  const auto& dom_verts = domain.vertices();
  if (dom_verts.empty()) return result;

  // Drop candidates whose validity region misses the domain entirely.
  std::vector<EnvCandidate> live;
  for (auto& c : cands) {
    Cell v = c.valid.intersect(domain);
    if (v.vertices().empty()) continue;
    live.push_back(std::move(c));
  }

  // Collect splitting hyperplanes: candidate validity boundaries and pairwise
  // differences of finite values.  Hyperplanes with a uniform sign over the
  // domain can never split a subcell and are dropped immediately.
  std::vector<AffineExpr> hyps;
  std::set<std::vector<Int>> seen;
  auto consider = [&](const AffineExpr& e) {
    if (e.is_constant()) return;
    auto [key, flipped] = LinCon(e, false).normalized_key();
    (void)flipped;
    if (!seen.insert(key).second) return;
    bool pos = false, neg = false;
    for (const auto& v : dom_verts) {
      Rat x = e.eval(v);
      if (x > 0) pos = true;
      if (x < 0) neg = true;
    }
    if (pos && neg) hyps.push_back(e);
  };
  for (const auto& c : live)
    for (const auto& con : c.valid.cons()) consider(con.e);
  for (size_t i = 0; i < live.size(); ++i) {
    if (!live[i].val.is_finite()) continue;
    for (size_t j = i + 1; j < live.size(); ++j) {
      if (!live[j].val.is_finite()) continue;
      consider(live[i].val.f - live[j].val.f);
    }
  }

  // Subdivide the domain.
  std::vector<Cell> cells{domain};
  for (const auto& h : hyps) {
    std::vector<Cell> next;
    for (auto& c : cells) {
      bool pos = false, neg = false;
      for (const auto& v : c.vertices()) {
        Rat x = h.eval(v);
        if (x > 0) pos = true;
        if (x < 0) neg = true;
      }
      if (pos && neg) {
        Cell a = c, b = c;
        a.add(LinCon(h, false));
        b.add(LinCon(-h, true));
        if (!a.vertices().empty()) next.push_back(std::move(a));
        if (!b.vertices().empty()) next.push_back(std::move(b));
      } else {
        next.push_back(std::move(c));
      }
    }
    cells = std::move(next);
  }

  // Select the optimal valid candidate on each subcell.
  for (auto& cell : cells) {
    const auto& vs = cell.vertices();
    if (vs.empty()) continue;
    bool have_minus = false, have_plus = false;
    const EnvCandidate* best = nullptr;
    Rat best_sum(0);
    for (const auto& cand : live) {
      bool valid = true;
      for (const auto& con : cand.valid.cons()) {
        for (const auto& v : vs)
          if (con.e.eval(v) < 0) { valid = false; break; }
        if (!valid) break;
      }
      if (!valid) continue;
      if (cand.val.kind == ExtRat::MinusInf) { have_minus = true; continue; }
      if (cand.val.kind == ExtRat::PlusInf) { have_plus = true; continue; }
      Rat sum(0);
      for (const auto& v : vs) sum += cand.val.f.eval(v);
      if (!best || (is_min ? sum < best_sum : sum > best_sum)) {
        best = &cand;
        best_sum = sum;
      }
    }
    if (is_min && have_minus) {
      result.add_piece({std::move(cell), ExtAffine::inf(false, dim)});
    } else if (!is_min && have_plus) {
      result.add_piece({std::move(cell), ExtAffine::inf(true, dim)});
    } else if (best) {
      result.add_piece({std::move(cell), best->val});
    } else if (is_min && have_plus) {
      result.add_piece({std::move(cell), ExtAffine::inf(true, dim)});
    } else if (!is_min && have_minus) {
      result.add_piece({std::move(cell), ExtAffine::inf(false, dim)});
    }
    // No valid candidate at all: the subcell is omitted.
  }
  result.merge_pieces();
  return result;
}

// ----------------------------------------------------------------- opt_delay

namespace {

// A constraint or expression over (nu, d): anu . nu + ad * d + b.
struct JointExpr {
  Vec anu;
  Rat ad;
  Rat b;

  // Substitutes d = D(nu); the result is affine in nu.
  AffineExpr at_delay(const AffineExpr& D) const {
    AffineExpr e(D.dim());
    for (int i = 0; i < D.dim(); ++i) e.a[i] = anu[i] + ad * D.a[i];
    e.b = b + ad * D.b;
    return e;
  }
};

}  // namespace

PWLFunction opt_delay(bool is_min, const Rat& rate, const Cell& delay_set,
                      const std::vector<bool>& reset, const Rat& weight,
                      const PWLFunction& vdest, const Cell& domain) {
  const int dim = domain.dim();
  std::vector<EnvCandidate> cands;

  // Constraints from the delay set act on the point nu + d.
  std::vector<JointExpr> base;
  for (const auto& con : delay_set.cons()) {
    JointExpr j;
    j.anu = con.e.a;
    j.ad = 0;
    for (const auto& c : con.e.a) j.ad += c;
    j.b = con.e.b;
    base.push_back(std::move(j));
  }
  {
    JointExpr dpos;  // d >= 0
    dpos.anu = Vec(dim, Rat(0));
    dpos.ad = 1;
    dpos.b = 0;
    base.push_back(std::move(dpos));
  }

  for (const auto& piece : vdest.pieces()) {
    std::vector<JointExpr> joints = base;
    // Piece cell constraints act on (nu + d)[Y := 0].
    for (const auto& con : piece.cell.cons()) {
      JointExpr j;
      j.anu = Vec(dim, Rat(0));
      j.ad = 0;
      for (int i = 0; i < dim; ++i) {
        if (reset[i]) continue;
        j.anu[i] = con.e.a[i];
        j.ad += con.e.a[i];
      }
      j.b = con.e.b;
      joints.push_back(std::move(j));
    }

    // Objective rate*d + weight + piece value at (nu + d)[Y := 0].
    JointExpr obj;
    obj.anu = Vec(dim, Rat(0));
    obj.ad = rate;
    obj.b = weight;
    if (piece.val.is_finite()) {
      for (int i = 0; i < dim; ++i) {
        if (reset[i]) continue;
        obj.anu[i] = piece.val.f.a[i];
        obj.ad += piece.val.f.a[i];
      }
      obj.b += piece.val.f.b;
    }

    // Candidate delays: d = 0 and each constraint boundary solvable for d.
    std::vector<AffineExpr> delays;
    delays.push_back(AffineExpr(dim));  // d = 0
    for (const auto& j : joints) {
      if (j.ad == 0) continue;
      AffineExpr D(dim);
      Rat inv = Rat(-1) / j.ad;
      for (int i = 0; i < dim; ++i) D.a[i] = j.anu[i] * inv;
      D.b = j.b * inv;
      if (std::find(delays.begin(), delays.end(), D) == delays.end())
        delays.push_back(std::move(D));
    }

    for (const auto& D : delays) {
      EnvCandidate cand;
      cand.valid = Cell(dim);
      for (const auto& j : joints)
        cand.valid.add(LinCon(j.at_delay(D), false));  // closure
      Cell pruned = cand.valid.intersect(domain);
      if (pruned.vertices().empty()) continue;
      cand.val = piece.val.is_finite() ? ExtAffine::finite(obj.at_delay(D))
                                       : piece.val;
      cands.push_back(std::move(cand));
    }
  }

  return envelope(domain, std::move(cands), is_min);
}

}  // namespace wtg
