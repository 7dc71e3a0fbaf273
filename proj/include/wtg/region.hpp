#pragma once

// 1/N-regions, the region game, and the corner-point abstraction.
//
// A region records the integer part of N*x per clock plus the ordered
// partition of clocks by the fractional part of N*x (block 0 holds the clocks
// with integral N*x).  The region game pairs game locations with reachable
// regions; the corner game pins valuations to region corners and is a finite
// untimed weighted multi-graph.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wtg/model.hpp"
#include "wtg/pwl.hpp"

namespace wtg {

struct NRegion {
  int N = 1;
  std::vector<int> iota;   // integer part of N*x, in [0, M*N]
  std::vector<int> block;  // 0: integral; 1..m: increasing fractional blocks

  bool operator==(const NRegion& o) const {
    return N == o.N && iota == o.iota && block == o.block;
  }
  bool operator<(const NRegion& o) const {
    return std::tie(N, iota, block) < std::tie(o.N, o.iota, o.block);
  }

  int dim() const { return (int)iota.size(); }
  int num_blocks() const;
  bool punctual() const { return num_blocks() == 0; }

  static NRegion of(const Vec& nu, int N, const Rat& M);
  bool contains(const Vec& nu) const;
  // An exact interior point (fractional block i sits at i/(m+1)).
  Vec representative() const;
  Cell cell() const;
  // The immediate time successor; nullopt when some clock sits at the bound.
  std::optional<NRegion> time_successor(int MN) const;
  // The full ordered chain of proper time successors.
  std::vector<NRegion> time_successors(int MN) const;
  NRegion reset(const std::vector<bool>& resets) const;
  // m+1 closure corners; corner j rounds blocks above j up and the rest down.
  std::vector<Vec> corners() const;
  std::string to_string(const std::vector<std::string>& clock_names) const;
};

// Enumerates every N-region of [0, M]^dim.
std::vector<NRegion> all_regions(int dim, const Rat& M, int N);

struct RGameState {
  int loc = -1;  // original location index; -1 for synthetic exit targets
  std::string name;
  Owner owner = Owner::Min;
  Int rate = 0;
  bool target = false;
  NRegion region;
  PWLFunction wT;  // targets only; defined on (at least) the region closure
  int base_state = -1;  // index into a base region game, for refinements
};

struct RGameTransition {
  int src = 0;
  int dst = 0;
  NRegion via;  // the time-successor region satisfying the original guard
  std::vector<bool> resets;
  Int weight = 0;
  int orig_transition = -1;  // index into the WTG transition list, if any
  int base_transition = -1;  // index into a base region game, for refinements
};

struct RGame {
  int dim = 0;
  Rat M;
  int N = 1;
  std::vector<std::string> clock_names;
  std::vector<RGameState> states;
  std::vector<RGameTransition> transitions;
  std::vector<std::vector<int>> out;  // per state
  int initial = 0;

  int find_state(int loc, const NRegion& r) const;
  void rebuild_out();
  Int max_abs_weight() const;
};

// Builds the reachable region game of g at granularity N from
// (g.initial, region of the zero valuation).  Performs the deadlock check:
// a reachable non-target state without outgoing transitions raises
// GameError(Deadlock).
RGame build_region_game(const WTG& g, int N);

// Splits every state region into its granularity-(N*factor) subregions and
// lifts the transitions accordingly.
RGame refine_rgame(const RGame& rg, int factor);

struct CornerGame {
  struct Vertex {
    int rstate = 0;
    int corner = 0;
    Vec coords;
    Owner owner = Owner::Min;
    bool target = false;
    ExtRat final;
  };
  struct Edge {
    int src = 0;
    int dst = 0;
    Rat weight;
    int rtrans = 0;  // underlying region transition
  };

  std::vector<Vertex> vertices;
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;

  int vertex_index(int rstate, int corner) const;
};

CornerGame build_corner_game(const RGame& rg);

// One-sided limit of f at a closure point `at`, approached from inside
// `region_cell` (valid because f is affine per cell and continuous per
// region).
ExtRat eval_limit_in_region(const PWLFunction& f, const Vec& at,
                            const Cell& region_cell);

std::string region_game_dot(const RGame& rg);
std::string corner_game_dot(const RGame& rg, const CornerGame& cg);

}  // namespace wtg
