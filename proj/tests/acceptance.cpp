// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure.  Criteria mirror the golden worked example, the infinite-value
// detection, the PWL breakpoint, the divergence verdicts, the randomized
// property suites, and cross-schema consistency.

#include <chrono>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include "properties.hpp"
#include "support.hpp"

using namespace wtg;
using namespace testsupport;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& detail) {
  std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": "
            << detail << std::endl;
  if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

struct Check {
  bool ok = true;
  std::ostringstream why;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      if (!ok) why << "; ";
      why << what;
      ok = false;
    }
  }
};

ExtRat limit_at(const RGame& rg, const PWLFunction& f, int state,
                const Vec& nu) {
  return eval_limit_in_region(f, nu, rg.states[state].region.cell());
}

void criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  WTG g = load_fixture("fig5.json");
  RGame rg = build_region_game(g, 1);
  CornerGame cg = build_corner_game(rg);
  SccDecomposition dec = scc_decompose(rg);
  SccInfo* scc = nullptr;
  for (auto& s : dec.sccs)
    if (s.has_cycle) scc = &s;
  c.expect(scc != nullptr, "no cyclic SCC found");
  if (!scc) {
    report(1, false, c.why.str());
    return;
  }
  scc->cls = classify_scc(*scc, rg, cg);
  // (a) classification and exact kernel.
  c.expect(scc->cls == SccClass::NonNegative, "SCC not NonNegative");
  Kernel kernel = compute_kernel(*scc, scc->cls, rg, cg);
  std::set<std::string> ktrans;
  for (size_t t = 0; t < kernel.transitions.size(); ++t)
    if (kernel.transitions[t])
      ktrans.insert(rg.states[rg.transitions[t].src].name + " -> " +
                    rg.states[rg.transitions[t].dst].name);
  c.expect(ktrans == std::set<std::string>{
                         "l1 {x=0, 0<y<1} -> l3 {0<x<1, y=0}",
                         "l3 {0<x<1, y=0} -> l4 {x=1, 0<y<1}",
                         "l4 {x=1, 0<y<1} -> l1 {x=0, 0<y<1}"},
           "kernel transitions differ from the 0-cycle");

  int k1 = state_at(rg, g, "l1", {Rat(0), Q(1, 2)});
  int s2 = state_at(rg, g, "l2", {Q(3, 2), Rat(0)});
  c.expect(k1 >= 0 && s2 >= 0, "expected region states missing");

  // (b) first kernel pass at N=1: corner values 3 and 1.
  ValueMap v = initial_value_map(rg);
  auto pass1 = approximate_kernel(rg, *scc, kernel, v, Rat(15), 1);
  const PWLFunction& p1 = pass1.at(k1);
  c.expect(limit_at(rg, p1, k1, {Rat(0), Rat(0)}) == ExtRat(Rat(3)),
           "corner c1 != 3");
  c.expect(limit_at(rg, p1, k1, {Rat(0), Rat(1)}) == ExtRat(Rat(1)),
           "corner c1' != 1");

  // (c) interpolation 3-2y on x=0 and the composition 3x-2 through l2.
  c.expect(p1.eval({Rat(0), Q(1, 4)}) == ExtRat(Q(5, 2)) &&
               p1.eval({Rat(0), Q(1, 2)}) == ExtRat(Rat(2)) &&
               p1.eval({Rat(0), Q(3, 4)}) == ExtRat(Q(3, 2)),
           "first-pass value on x=0 is not 3-2y");
  for (const auto& [s, fn] : pass1) v[s] = fn;
  v[s2] = state_one_step(rg, s2, v);
  c.expect(v[s2].eval({Q(5, 4), Rat(0)}) == ExtRat(Q(7, 4)) &&
               v[s2].eval({Q(3, 2), Rat(0)}) == ExtRat(Q(5, 2)) &&
               v[s2].eval({Q(7, 4), Rat(0)}) == ExtRat(Q(13, 4)),
           "one-step value at l2 is not 3x-2");

  // (d) second pass: 2 / 3-2y split at y=1/2, and 3x-2 / x+1 split at x=3/2.
  auto pass2 = approximate_kernel(rg, *scc, kernel, v, Rat(15), 2);
  const PWLFunction& p2 = pass2.at(k1);
  c.expect(p2.eval({Rat(0), Q(1, 8)}) == ExtRat(Rat(2)) &&
               p2.eval({Rat(0), Q(1, 4)}) == ExtRat(Rat(2)) &&
               p2.eval({Rat(0), Q(1, 2)}) == ExtRat(Rat(2)) &&
               p2.eval({Rat(0), Q(5, 8)}) == ExtRat(Q(7, 4)) &&
               p2.eval({Rat(0), Q(3, 4)}) == ExtRat(Q(3, 2)) &&
               limit_at(rg, p2, k1, {Rat(0), Rat(1)}) == ExtRat(Rat(1)),
           "second-pass value at l1 is not 2 / 3-2y with breakpoint 1/2");
  ValueMap v2 = v;
  for (const auto& [s, fn] : pass2) v2[s] = fn;
  PWLFunction l2v = state_one_step(rg, s2, v2);
  c.expect(l2v.eval({Q(9, 8), Rat(0)}) == ExtRat(Q(11, 8)) &&
               l2v.eval({Q(5, 4), Rat(0)}) == ExtRat(Q(7, 4)) &&
               l2v.eval({Q(3, 2), Rat(0)}) == ExtRat(Q(5, 2)) &&
               l2v.eval({Q(7, 4), Rat(0)}) == ExtRat(Q(11, 4)) &&
               limit_at(rg, l2v, s2, {Rat(2), Rat(0)}) == ExtRat(Rat(3)),
           "value at l2 is not 3x-2 / x+1 with breakpoint 3/2");

  // (e) forced N=3: 1/3-corner values 2, 2, 5/3, 1.
  v2[s2] = l2v;
  KernelApproxConfig cfg;
  auto pass3 = approximate_kernel(rg, *scc, kernel, v2, Rat(15), 3, &cfg);
  const PWLFunction& p3 = pass3.at(k1);
  c.expect(cfg.N == 3 && cfg.forced, "granularity not forced to 3");
  c.expect(limit_at(rg, p3, k1, {Rat(0), Rat(0)}) == ExtRat(Rat(2)) &&
               limit_at(rg, p3, k1, {Rat(0), Q(1, 3)}) == ExtRat(Rat(2)) &&
               limit_at(rg, p3, k1, {Rat(0), Q(2, 3)}) == ExtRat(Q(5, 3)) &&
               limit_at(rg, p3, k1, {Rat(0), Rat(1)}) == ExtRat(Rat(1)),
           "1/3-corner values differ from 2, 2, 5/3, 1");

  // (f) end to end.
  ApproxResult res = approximate_game(g, Rat(15));
  int s0 = state_at(res.rg, g, "l0", {Rat(0), Rat(0)});
  ExtRat val = value_at(res.rg, res.values, s0, {Rat(0), Rat(0)});
  c.expect(val.is_finite() && val.value() >= Rat(-13) &&
               val.value() <= Rat(17),
           "final value outside [2-eps, 2+eps]");
  c.expect(val == ExtRat(Rat(2)), "final value not exactly 2");

  double secs = seconds_since(t0);
  c.expect(secs < 10.0, "runtime >= 10 s");
  std::ostringstream d;
  d << "golden run (eps=15): kernel, corner solve, both passes, N=3 corners, "
       "final value 2 in "
    << secs << " s";
  if (!c.ok) d << " -- " << c.why.str();
  report(1, c.ok, d.str());
}

void criterion2() {
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  WTG g = load_fixture("fig1.json");
  RGame rg = build_region_game(g, 1);
  CornerGame cg = build_corner_game(rg);
  DivergenceReport div = check_almost_divergent(rg, cg);
  c.expect(div.almost_divergent, "not almost-divergent");
  InfinityReport inf = compute_infinity(rg, cg, div);
  bool l1_plus = false, l5_minus = false, wrong = false;
  for (size_t s = 0; s < rg.states.size(); ++s) {
    const std::string& id = g.locations[rg.states[s].loc].id;
    if (id == "l1" && inf.plus_inf[s]) l1_plus = true;
    if (id == "l5" && inf.minus_inf[s]) l5_minus = true;
    if (id != "l1" && inf.plus_inf[s]) wrong = true;
    if (id != "l5" && inf.minus_inf[s]) wrong = true;
  }
  c.expect(l1_plus, "l1 not in plus-infinity states");
  c.expect(l5_minus, "l5 not in minus-infinity states");
  c.expect(!wrong, "unexpected infinite states");
  double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime >= 1 s");
  std::ostringstream d;
  d << "infinite-value detection (l1 -> +inf, l5 -> -inf) in " << secs << " s";
  if (!c.ok) d << " -- " << c.why.str();
  report(2, c.ok, d.str());
}

void criterion3() {
  Check c;
  Cell box = Cell::box(1, Rat(3));
  PWLFunction f = PWLFunction::affine(box, AffineExpr({Rat(-2)}, Rat(3)));
  PWLFunction g = PWLFunction::affine(box, AffineExpr({Rat(1)}, Rat(1)));
  PWLFunction m = pwl_min(f, g);
  c.expect(m.eval({Q(2, 3)}) == ExtRat(Q(5, 3)), "value at 2/3 is not 5/3");
  c.expect(m.eval({Q(1, 3)}) == ExtRat(Q(4, 3)), "left piece wrong");
  c.expect(m.eval({Rat(1)}) == ExtRat(Rat(1)), "right piece wrong");
  bool seen = false, unique = true;
  for (const auto& p : m.pieces())
    for (const auto& vtx : p.cell.vertices()) {
      if (vtx[0] == Rat(0) || vtx[0] == Rat(3)) continue;
      if (vtx[0] == Q(2, 3))
        seen = true;
      else
        unique = false;
    }
  c.expect(seen, "no breakpoint at 2/3");
  c.expect(unique, "breakpoints besides 2/3");
  std::string d = "min(3-2x, 1+x) breaks uniquely at x = 2/3";
  if (!c.ok) d += " -- " + c.why.str();
  report(3, c.ok, d);
}

void criterion4() {
  Check c;
  double worst = 0;
  auto verdict = [&](const std::string& name, bool want_ad, bool want_div,
                     bool want_witness) {
    auto t0 = std::chrono::steady_clock::now();
    WTG g = load_fixture(name);
    RGame rg = build_region_game(g, 1);
    DivergenceReport div = check_almost_divergent(rg, build_corner_game(rg));
    c.expect(div.almost_divergent == want_ad, name + ": almost-divergence");
    c.expect(div.divergent == want_div, name + ": divergence");
    c.expect(div.mixed_witness.has_value() == want_witness,
             name + ": witness");
    worst = std::max(worst, seconds_since(t0));
  };
  verdict("fig5.json", true, false, false);
  verdict("fig1.json", true, true, false);
  verdict("mixed.json", false, false, true);
  c.expect(worst < 1.0, "a verdict took >= 1 s");
  std::ostringstream d;
  d << "divergence verdicts (almost-divergent / divergent / rejected), worst "
    << worst << " s";
  if (!c.ok) d << " -- " << c.why.str();
  report(4, c.ok, d.str());
}

void criterion5() {
  Check c;
  std::ostringstream d;
  d << "property suites:";
  auto run = [&](const std::string& name, const SuiteResult& r) {
    c.expect(r.cases >= 200, name + ": fewer than 200 cases");
    c.expect(r.violations == 0, name + ": violations");
    d << " " << name << "=" << r.cases << "/" << r.violations;
  };
  run("corner-interval", suite_corner_interval(101, 200));
  run("kernel-cycles", suite_kernel_cycles(102, 200));
  run("grid-oracle", suite_grid_oracle(103, 200));
  run("granularity", suite_granularity(104, 200, 200));
  run("lipschitz", suite_lipschitz(105, 200));
  run("monotonicity", suite_monotonicity(106, 200));
  std::string msg = d.str() + " (cases/violations)";
  if (!c.ok) msg += " -- " + c.why.str();
  report(5, c.ok, msg);
}

void criterion6() {
  auto t0 = std::chrono::steady_clock::now();
  Check c;
  SuiteResult r = suite_cross_schema(107, 20, 50);
  c.expect(r.cases >= 20, "fewer than 20 comparable games");
  c.expect(r.violations == 0, "schema disagreement beyond 2 eps");
  double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime >= 60 s");
  std::ostringstream d;
  d << "cross-schema consistency on 20 games x 50 points in " << secs << " s";
  if (!c.ok) d << " -- " << c.why.str();
  report(6, c.ok, d.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  return failures == 0 ? 0 : 1;
}
