#pragma once

// Value solver for finite untimed weighted games (the corner games):
// min/max value iteration with a pseudo-polynomial stabilization horizon and
// a -infinity classification threshold.

#include <vector>

#include "wtg/rational.hpp"
#include "wtg/region.hpp"

namespace wtg {

struct FiniteWeightedGame {
  struct Vertex {
    Owner owner = Owner::Min;
    bool target = false;
    ExtRat final;  // targets only
  };
  struct Edge {
    int src = 0;
    int dst = 0;
    Rat weight;
  };

  std::vector<Vertex> vertices;
  std::vector<Edge> edges;  // multi-edges kept explicit
  std::vector<std::vector<int>> out;

  void rebuild_out();
  static FiniteWeightedGame from_corner_game(const CornerGame& cg);
};

// Value iteration from V0 = final weights on targets, +inf elsewhere; runs to
// stabilization or to the horizon V*(2*(V-1)*W + 1); horizon values below
// (min finite final) - (V-1)*W are classified -inf.
std::vector<ExtRat> solve_untimed(const FiniteWeightedGame& g);

}  // namespace wtg
