#include <doctest.h>

#include "support.hpp"

using namespace wtg;
using namespace testsupport;

namespace {

// f = 3 - 2y on the region x = 0, 0 < y < 1 (two clocks, M = 2).
PWLFunction three_minus_2y() {
  Cell c = Cell::box(2, Rat(2));
  c.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});  // -x >= 0
  c.add({AffineExpr({Rat(0), Rat(1)}, Rat(0)), true});    // y > 0
  c.add({AffineExpr({Rat(0), Rat(-1)}, Rat(1)), true});   // 1 - y > 0
  return PWLFunction::affine(c, AffineExpr({Rat(0), Rat(-2)}, Rat(3)));
}

}  // namespace

TEST_CASE("eval picks the unique piece") {
  PWLFunction f = three_minus_2y();
  CHECK(f.eval({Rat(0), Q(1, 2)}) == ExtRat(Rat(2)));
  Cell box = Cell::box(1, Rat(3));
  PWLFunction z = PWLFunction::constant(box, ExtRat(Rat(0)));
  CHECK(z.eval({Q(7, 5)}) == ExtRat(Rat(0)));
  CHECK_THROWS_AS(f.eval({Rat(1), Q(1, 2)}), std::domain_error);
  CHECK(!f.try_eval({Rat(1), Q(1, 2)}).has_value());
}

TEST_CASE("pwl_min refines cells at the crossing hyperplane") {
  Cell box = Cell::box(1, Rat(3));
  PWLFunction f = PWLFunction::affine(box, AffineExpr({Rat(-2)}, Rat(3)));
  PWLFunction g = PWLFunction::affine(box, AffineExpr({Rat(1)}, Rat(1)));
  PWLFunction h = pwl_min(f, g);
  CHECK(h.eval({Q(2, 3)}) == ExtRat(Q(5, 3)));
  CHECK(h.eval({Rat(0)}) == ExtRat(Rat(1)));      // 1+x below the breakpoint
  CHECK(h.eval({Q(1, 3)}) == ExtRat(Q(4, 3)));
  CHECK(h.eval({Rat(1)}) == ExtRat(Rat(1)));      // 3-2x above
  CHECK(h.eval({Rat(3)}) == ExtRat(Rat(-3)));
  // The breakpoint x = 2/3 appears as a cell vertex of the refinement.
  bool has_breakpoint_vertex = false;
  for (const auto& piece : h.pieces())
    for (const auto& v : piece.cell.vertices())
      if (v[0] == Q(2, 3)) has_breakpoint_vertex = true;
  CHECK(has_breakpoint_vertex);
  // ... and it is the unique one strictly inside the domain.
  for (const auto& piece : h.pieces())
    for (const auto& v : piece.cell.vertices())
      if (v[0] != Rat(0) && v[0] != Rat(3)) CHECK(v[0] == Q(2, 3));

  // Idempotence and +inf as neutral element.
  PWLFunction ff = pwl_min(f, f);
  CHECK(pwl_equal(ff, f));
  PWLFunction top = PWLFunction::constant(box, ExtRat::plus_inf());
  CHECK(pwl_equal(pwl_min(f, top), f));
  CHECK(pwl_equal(pwl_max(f, top), top));
}

TEST_CASE("add_affine shifts pieces pointwise") {
  PWLFunction f = three_minus_2y();
  PWLFunction g = f.add_const(Rat(1));
  CHECK(g.eval({Rat(0), Q(1, 2)}) == ExtRat(Rat(3)));  // 4 - 2y at 1/2
  CHECK(pwl_equal(f.add_const(Rat(0)), f));
  Cell box = Cell::box(1, Rat(1));
  PWLFunction x = PWLFunction::affine(box, AffineExpr({Rat(1)}, Rat(0)));
  PWLFunction zero = x.add_affine(AffineExpr({Rat(-1)}, Rat(0)));
  CHECK(zero.eval({Q(1, 3)}) == ExtRat(Rat(0)));
  CHECK(zero.eval({Rat(1)}) == ExtRat(Rat(0)));
}

TEST_CASE("compose_reset substitutes zeroed clocks") {
  // f = 3 - 2y on the closed cell x = 0, 0 <= y <= 1.
  Cell c = Cell::box(2, Rat(2));
  c.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});  // x <= 0
  c.add({AffineExpr({Rat(0), Rat(-1)}, Rat(1)), false});  // y <= 1
  PWLFunction f = PWLFunction::affine(c, AffineExpr({Rat(0), Rat(-2)}, Rat(3)));
  PWLFunction g = f.compose_reset({false, true});  // y := 0
  // g(nu) = f(x, 0) = 3 wherever (x, 0) is in f's domain (x = 0).
  CHECK(g.eval({Rat(0), Q(3, 4)}) == ExtRat(Rat(3)));
  CHECK(pwl_equal(f.compose_reset({false, false}), f));
  Cell box = Cell::box(2, Rat(1));
  PWLFunction xy =
      PWLFunction::affine(box, AffineExpr({Rat(1), Rat(1)}, Rat(5)));
  PWLFunction both = xy.compose_reset({true, true});
  CHECK(both.eval({Q(1, 2), Q(1, 3)}) == ExtRat(Rat(5)));
}

TEST_CASE("opt_delay: Min against a sloped destination") {
  // rate -1, guard 1 < x < 2 (y free below 1), reset {x}, weight 1,
  // destination value 3 - 2y on x = 0: the result is 3x - 2 on y = 0.
  Cell dest_cell = Cell::box(2, Rat(2));
  dest_cell.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});  // x <= 0
  dest_cell.add({AffineExpr({Rat(0), Rat(-1)}, Rat(1)), false});  // y <= 1
  PWLFunction vdest =
      PWLFunction::affine(dest_cell, AffineExpr({Rat(0), Rat(-2)}, Rat(3)));

  Cell delay_set = Cell::box(2, Rat(2));
  delay_set.add({AffineExpr({Rat(1), Rat(0)}, Rat(-1)), true});   // x > 1
  delay_set.add({AffineExpr({Rat(-1), Rat(0)}, Rat(2)), true});   // x < 2
  delay_set.add({AffineExpr({Rat(0), Rat(-1)}, Rat(1)), true});   // y < 1

  Cell domain = Cell::box(2, Rat(2));
  domain.add({AffineExpr({Rat(1), Rat(0)}, Rat(-1)), true});
  domain.add({AffineExpr({Rat(-1), Rat(0)}, Rat(2)), true});
  domain.add({AffineExpr({Rat(0), Rat(-1)}, Rat(0)), false});     // y <= 0

  PWLFunction r = opt_delay(true, Rat(-1), delay_set, {true, false}, Rat(1),
                            vdest, domain);
  CHECK(r.eval({Q(3, 2), Rat(0)}) == ExtRat(Q(5, 2)));
  CHECK(r.eval({Q(5, 4), Rat(0)}) == ExtRat(Q(7, 4)));
  CHECK(r.eval({Q(7, 4), Rat(0)}) == ExtRat(Q(13, 4)));
  bool flagged = false;
  CHECK(r.lipschitz_bound(&flagged) == Rat(3));
}

TEST_CASE("opt_delay: Max over a piecewise destination") {
  // rate 0, weight 0, guard 0 < x < 1, reset {x}; destination on x = 0 is
  // 2 for y <= 1/2 and 3 - 2y above; sup over 0 < d < 1 from (0,0) is 2.
  Cell c1 = Cell::box(2, Rat(2));
  c1.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});          // x <= 0
  c1.add({AffineExpr({Rat(0), Rat(-1)}, Q(1, 2)), false});         // y <= 1/2
  Cell c2 = Cell::box(2, Rat(2));
  c2.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});
  c2.add({AffineExpr({Rat(0), Rat(1)}, Q(-1, 2)), true});          // y > 1/2
  c2.add({AffineExpr({Rat(0), Rat(-1)}, Rat(1)), false});          // y <= 1
  PWLFunction vdest(2);
  vdest.add_piece({c1, ExtAffine::finite(AffineExpr::constant(2, Rat(2)))});
  vdest.add_piece({c2, ExtAffine::finite(AffineExpr({Rat(0), Rat(-2)}, Rat(3)))});

  Cell delay_set = Cell::box(2, Rat(2));
  delay_set.add({AffineExpr({Rat(1), Rat(0)}, Rat(0)), true});     // x > 0
  delay_set.add({AffineExpr({Rat(-1), Rat(0)}, Rat(1)), true});    // x < 1
  Cell domain = Cell::box(2, Rat(2));
  domain.add({AffineExpr({Rat(-1), Rat(0)}, Rat(0)), false});      // x <= 0
  domain.add({AffineExpr({Rat(0), Rat(-1)}, Rat(0)), false});      // y <= 0

  PWLFunction r = opt_delay(false, Rat(0), delay_set, {true, false}, Rat(0),
                            vdest, domain);
  CHECK(r.eval({Rat(0), Rat(0)}) == ExtRat(Rat(2)));
}

TEST_CASE("opt_delay: constant destination is invariant") {
  Cell box = Cell::box(1, Rat(2));
  PWLFunction vdest = PWLFunction::constant(box, ExtRat(Q(7, 3)));
  PWLFunction r =
      opt_delay(true, Rat(0), box, {false}, Rat(0), vdest, box);
  CHECK(r.eval({Rat(0)}) == ExtRat(Q(7, 3)));
  CHECK(r.eval({Q(3, 2)}) == ExtRat(Q(7, 3)));
}

TEST_CASE("lipschitz_bound takes the steepest finite piece") {
  CHECK(three_minus_2y().lipschitz_bound() == Rat(2));
  Cell box = Cell::box(1, Rat(1));
  CHECK(PWLFunction::constant(box, ExtRat(Rat(9))).lipschitz_bound() == Rat(0));

  // Interpolation through (0,2), (1/3,2), (2/3,5/3), (1,1): slopes 0, -1, -2.
  auto seg = [&](const Rat& lo, const Rat& hi) {
    Cell c = Cell::box(1, Rat(1));
    c.add({AffineExpr({Rat(1)}, -lo), false});
    c.add({AffineExpr({Rat(-1)}, hi), false});
    return c;
  };
  PWLFunction f(1);
  f.add_piece({seg(Rat(0), Q(1, 3)),
               ExtAffine::finite(AffineExpr::constant(1, Rat(2)))});
  f.add_piece({seg(Q(1, 3), Q(2, 3)),
               ExtAffine::finite(AffineExpr({Rat(-1)}, Q(7, 3)))});
  f.add_piece({seg(Q(2, 3), Rat(1)),
               ExtAffine::finite(AffineExpr({Rat(-2)}, Rat(3)))});
  CHECK(f.eval({Q(2, 3)}) == ExtRat(Q(5, 3)));
  CHECK(f.eval({Rat(1)}) == ExtRat(Rat(1)));
  CHECK(f.lipschitz_bound() == Rat(2));

  bool flagged = false;
  PWLFunction withinf = f;
  Cell c = Cell::box(1, Rat(1));
  withinf.lipschitz_bound(&flagged);
  CHECK(!flagged);
  PWLFunction inf2(1);
  inf2.add_piece({c, ExtAffine::inf(true, 1)});
  inf2.lipschitz_bound(&flagged);
  CHECK(flagged);
}

TEST_CASE("pwl algebra on random functions") {
  std::mt19937 rng(77);
  auto rnd_aff = [&](int dim) {
    AffineExpr e(dim);
    for (int c = 0; c < dim; ++c)
      e.a[c] = Q(std::uniform_int_distribution<int>(-2, 2)(rng));
    e.b = Q(std::uniform_int_distribution<int>(-3, 3)(rng));
    return e;
  };
  for (int rep = 0; rep < 50; ++rep) {
    int dim = std::uniform_int_distribution<int>(1, 2)(rng);
    Cell box = Cell::box(dim, Rat(2));
    PWLFunction f = PWLFunction::affine(box, rnd_aff(dim));
    PWLFunction g = PWLFunction::affine(box, rnd_aff(dim));
    PWLFunction h = PWLFunction::affine(box, rnd_aff(dim));
    PWLFunction mfg = pwl_min(f, g);
    PWLFunction mgf = pwl_min(g, f);
    PWLFunction assoc1 = pwl_min(mfg, h);
    PWLFunction assoc2 = pwl_min(f, pwl_min(g, h));
    for (int pt = 0; pt < 10; ++pt) {
      Vec nu(dim);
      for (int c = 0; c < dim; ++c)
        nu[c] = Q(std::uniform_int_distribution<int>(0, 16)(rng), 8);
      ExtRat expect = ext_min(f.eval(nu), g.eval(nu));
      CHECK(mfg.eval(nu) == expect);
      CHECK(mgf.eval(nu) == expect);
      CHECK(assoc1.eval(nu) == assoc2.eval(nu));
      CHECK(pwl_max(f, g).eval(nu) == ext_max(f.eval(nu), g.eval(nu)));
      // Partition soundness: exactly one piece strictly contains interior
      // points; boundary points evaluate consistently (checked via eval).
      int containing = 0;
      for (const auto& piece : mfg.pieces())
        if (piece.cell.contains(nu)) ++containing;
      CHECK(containing <= 1);
    }
  }
}
