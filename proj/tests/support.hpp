#pragma once

// Shared test helpers: fixture loading, random game generation, the
// discretized grid oracle, and concrete play sampling along region paths.

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "wtg/analysis.hpp"
#include "wtg/approx.hpp"
#include "wtg/timed.hpp"

namespace testsupport {

using namespace wtg;

inline std::string data_path(const std::string& name) {
  return std::string(TEST_DATA_DIR) + "/" + name;
}

inline WTG load_fixture(const std::string& name) {
  std::ifstream in(data_path(name));
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_game(buf.str());
}

inline Rat Q(long n, long d = 1) { return Rat(Int(n), Int(d)); }

// Region-game state of `loc` whose region contains `nu`; -1 if none.
inline int state_at(const RGame& rg, const WTG& g, const std::string& loc,
                    const Vec& nu) {
  int li = g.location_index(loc);
  for (size_t s = 0; s < rg.states.size(); ++s)
    if (rg.states[s].loc == li && rg.states[s].region.contains(nu))
      return (int)s;
  return -1;
}

// ------------------------------------------------------------ random games

struct GenParams {
  int min_clocks = 1;
  int max_clocks = 2;
  int max_locations = 5;
  int wmax = 3;  // |weights|, |rates| bound
  int max_M = 2;
};

inline WTG random_game(std::mt19937& rng, const GenParams& p = {}) {
  auto ri = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  for (int attempt = 0; attempt < 100; ++attempt) {
    WTG g;
    int dim = ri(p.min_clocks, p.max_clocks);
    g.clocks = {"x", "y", "z"};
    g.clocks.resize(dim);
    int M = ri(1, p.max_M);
    g.clock_bound = Q(M);
    int nloc = ri(2, p.max_locations);
    for (int i = 0; i < nloc; ++i) {
      Location l;
      l.id = "l" + std::to_string(i);
      bool target = i == nloc - 1;
      l.target = target;
      l.owner = (!target && ri(0, 1)) ? Owner::Max : Owner::Min;
      l.rate = target ? Int(0) : Int(ri(-p.wmax, p.wmax));
      g.locations.push_back(std::move(l));
    }
    for (int i = 0; i < nloc - 1; ++i) {
      int k = ri(1, 3);
      for (int e = 0; e < k; ++e) {
        Transition t;
        t.from = i;
        t.to = ri(0, nloc - 1);
        t.weight = Int(ri(-p.wmax, p.wmax));
        t.resets.assign(dim, false);
        for (int c = 0; c < dim; ++c) {
          if (ri(0, 1)) t.resets[c] = true;
          if (ri(0, 1)) {
            AtomicConstraint a;
            a.clock = c;
            int op = ri(0, 4);
            a.op = op == 0   ? Cmp::Lt
                   : op == 1 ? Cmp::Le
                   : op == 2 ? Cmp::Eq
                   : op == 3 ? Cmp::Ge
                             : Cmp::Gt;
            a.constant = Q(ri(0, M));
            t.guard.constraints.push_back(a);
          }
        }
        g.transitions.push_back(std::move(t));
      }
      // Deadlock repair: an always-enabled escape to the target.
      Transition esc;
      esc.from = i;
      esc.to = nloc - 1;
      esc.weight = Int(ri(-p.wmax, p.wmax));
      esc.resets.assign(dim, false);
      g.transitions.push_back(std::move(esc));
    }
    // Final weight: a random affine function over the whole box.
    Cell box = Cell::box(dim, g.clock_bound);
    AffineExpr fw(dim);
    fw.b = Q(ri(-p.wmax, p.wmax));
    for (int c = 0; c < dim; ++c) fw.a[c] = Q(ri(-2, 2));
    g.final_weights.emplace(nloc - 1, PWLFunction::affine(box, fw));
    g.initial = 0;
    try {
      g.validate();
      g.compute_stats();
      build_region_game(g, 1);
      return g;
    } catch (const GameError&) {
      continue;
    }
  }
  throw std::runtime_error("random_game: generation kept failing");
}

// ------------------------------------------------- concrete play sampling

// A random rational in (0, 1).
inline Rat random_unit(std::mt19937& rng) {
  int j = std::uniform_int_distribution<int>(1, 31)(rng);
  return Q(j, 32);
}

// A random point in the (relative) interior of a region.
inline Vec random_region_point(const NRegion& r, std::mt19937& rng) {
  Cell cell = r.cell();
  const auto& verts = cell.vertices();
  Vec pt(r.dim(), Rat(0));
  Rat total(0);
  std::vector<Rat> w;
  for (size_t i = 0; i < verts.size(); ++i) {
    w.push_back(Q(std::uniform_int_distribution<int>(1, 9)(rng)));
    total += w.back();
  }
  for (size_t i = 0; i < verts.size(); ++i)
    for (int c = 0; c < r.dim(); ++c) pt[c] += verts[i][c] * w[i] / total;
  return pt;
}

// Follows a region path concretely from `nu`, choosing a random valid delay
// at each step; returns the cumulated weight (no final weight).
inline std::optional<Rat> sample_play_weight(const RGame& rg,
                                             const std::vector<int>& path,
                                             Vec nu, std::mt19937& rng) {
  Rat total(0);
  for (int ti : path) {
    const auto& t = rg.transitions[ti];
    // Valid delays: {d >= 0 : nu + d*1 in via}; via is bounded, so the set is
    // an interval [/(]lo, hi[/)].
    Rat lo(0), hi(-1);
    bool lo_strict = false, hi_strict = false, have_hi = false;
    bool feasible = true;
    Cell via_cell = t.via.cell();
    for (const auto& con : via_cell.cons()) {
      Rat s(0);
      for (const auto& a : con.e.a) s += a;
      Rat at = con.e.eval(nu);
      if (s == 0) {
        if (at < 0 || (con.strict && at == 0)) { feasible = false; break; }
      } else if (s > 0) {
        Rat bound = -at / s;
        if (bound > lo || (bound == lo && con.strict)) {
          lo = bound;
          lo_strict = con.strict;
        }
      } else {
        Rat bound = -at / s;
        if (!have_hi || bound < hi || (bound == hi && con.strict)) {
          hi = bound;
          hi_strict = con.strict;
          have_hi = true;
        }
      }
    }
    if (!feasible || !have_hi || hi < lo || (hi == lo && (lo_strict || hi_strict)))
      return std::nullopt;
    Rat d = lo == hi ? lo : lo + (hi - lo) * random_unit(rng);
    if (d < 0) return std::nullopt;
    total += d * Rat(rg.states[t.src].rate) + Rat(t.weight);
    for (int c = 0; c < rg.dim; ++c) nu[c] = t.resets[c] ? Rat(0) : nu[c] + d;
  }
  return total;
}

// Random region path of length <= max_len starting anywhere.
inline std::vector<int> random_path(const RGame& rg, std::mt19937& rng,
                                    int max_len, int* start_state) {
  auto ri = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  std::vector<int> path;
  int s = ri(0, (int)rg.states.size() - 1);
  *start_state = s;
  int len = ri(1, max_len);
  for (int i = 0; i < len; ++i) {
    if (rg.out[s].empty()) break;
    int ti = rg.out[s][ri(0, (int)rg.out[s].size() - 1)];
    path.push_back(ti);
    s = rg.transitions[ti].dst;
  }
  return path;
}

// ------------------------------------------------------------- grid oracle

// Brute-force discretized value of a 1-clock game: delays restricted to the
// 1/K grid, horizon kmax.  vals[k][loc][i] for grid point i/K.
struct GridOracle {
  const WTG& g;
  int K;
  int points;
  std::vector<std::vector<std::vector<ExtRat>>> vals;

  GridOracle(const WTG& game, int grid, int kmax) : g(game), K(grid) {
    points = (int)(rat_num(g.clock_bound) * K).convert_to<long>() + 1;
    int nloc = (int)g.locations.size();
    vals.assign(kmax + 1,
                std::vector<std::vector<ExtRat>>(
                    nloc, std::vector<ExtRat>(points, ExtRat::plus_inf())));
    for (int l = 0; l < nloc; ++l) {
      if (!g.locations[l].target) continue;
      const auto& wt = g.final_weights.at(l);
      for (int i = 0; i < points; ++i)
        for (int k = 0; k <= kmax; ++k) vals[k][l][i] = wt.eval({Q(i, K)});
    }
    for (int k = 1; k <= kmax; ++k) {
      for (int l = 0; l < nloc; ++l) {
        if (g.locations[l].target) continue;
        bool is_min = g.locations[l].owner == Owner::Min;
        for (int i = 0; i < points; ++i) {
          ExtRat best = ExtRat::plus_inf();
          bool first = true;
          for (size_t ti = 0; ti < g.transitions.size(); ++ti) {
            const auto& t = g.transitions[ti];
            if (t.from != l) continue;
            for (int di = 0; i + di < points; ++di) {
              Vec q{Q(i + di, K)};
              if (!t.guard.satisfied(q)) continue;
              int dest_i = t.resets[0] ? 0 : i + di;
              ExtRat dest = vals[k - 1][t.to][dest_i];
              ExtRat cand =
                  dest.is_finite()
                      ? ExtRat(Q(di, K) * Rat(g.locations[l].rate) +
                               Rat(t.weight) + dest.value())
                      : dest;
              best = first ? cand
                           : (is_min ? ext_min(best, cand)
                                     : ext_max(best, cand));
              first = false;
            }
          }
          vals[k][l][i] = best;
        }
      }
    }
  }
};

}  // namespace testsupport
