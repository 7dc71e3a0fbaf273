#include "wtg/untimed.hpp"

#include <algorithm>

namespace wtg {

void FiniteWeightedGame::rebuild_out() {
  out.assign(vertices.size(), {});
  for (size_t i = 0; i < edges.size(); ++i) out[edges[i].src].push_back((int)i);
}

FiniteWeightedGame FiniteWeightedGame::from_corner_game(const CornerGame& cg) {
  FiniteWeightedGame g;
  for (const auto& v : cg.vertices)
    g.vertices.push_back({v.owner, v.target, v.final});
  for (const auto& e : cg.edges) g.edges.push_back({e.src, e.dst, e.weight});
  g.rebuild_out();
  return g;
}

std::vector<ExtRat> solve_untimed(const FiniteWeightedGame& g) {
  const size_t V = g.vertices.size();
  std::vector<ExtRat> val(V);
  for (size_t i = 0; i < V; ++i)
    val[i] = g.vertices[i].target ? g.vertices[i].final : ExtRat::plus_inf();

  // Pseudo-polynomial horizon and the -infinity threshold.
  Rat W(0);
  for (const auto& e : g.edges) W = std::max(W, rat_abs(e.weight));
  Int Wc = rat_ceil(W);
  Int horizon = Int((long)V) * (2 * Int((long)(V > 0 ? V - 1 : 0)) * Wc + 1);
  bool have_final = false;
  Rat min_final(0);
  for (const auto& v : g.vertices) {
    if (!v.target || !v.final.is_finite()) continue;
    if (!have_final || v.final.value() < min_final) min_final = v.final.value();
    have_final = true;
  }
  ExtRat threshold =
      have_final ? ExtRat(Rat(min_final - Rat(Int((long)(V > 0 ? V - 1 : 0)) * Wc)))
                 : ExtRat::minus_inf();

  for (Int sweep = 0; sweep < horizon; ++sweep) {
    bool changed = false;
    std::vector<ExtRat> next = val;
    for (size_t i = 0; i < V; ++i) {
      if (g.vertices[i].target) continue;
      if (g.out[i].empty()) continue;
      bool is_min = g.vertices[i].owner == Owner::Min;
      ExtRat best = is_min ? ExtRat::plus_inf() : ExtRat::minus_inf();
      for (int ei : g.out[i]) {
        const auto& e = g.edges[ei];
        ExtRat cand = val[e.dst].is_plus_inf()   ? ExtRat::plus_inf()
                      : val[e.dst].is_minus_inf() ? ExtRat::minus_inf()
                                                  : ExtRat(Rat(e.weight)) + val[e.dst];
        best = is_min ? ext_min(best, cand) : ext_max(best, cand);
      }
      // Any value provably below the simple-path bound is -infinity.
      if (best.is_finite() && best < threshold) best = ExtRat::minus_inf();
      if (best != next[i]) {
        next[i] = best;
        changed = true;
      }
    }
    val = std::move(next);
    if (!changed) break;
  }
  return val;
}

}  // namespace wtg
