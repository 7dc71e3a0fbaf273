#pragma once

// The one-step operator F on value maps over the region game, bounded-horizon
// value iteration, and the exact backward sweep for acyclic region games.

#include <vector>

#include "wtg/region.hpp"

namespace wtg {

// One PWLFunction per region-game state, defined on (at least) the state's
// region; targets always hold their final weight function.
using ValueMap = std::vector<PWLFunction>;

// V0: final weights on targets, +infinity elsewhere.
ValueMap initial_value_map(const RGame& rg);

// Value of one region transition against the destination value function:
// optimal delay within the via-region, then the transition weight and reset.
PWLFunction transition_value(const RGame& rg, const RGameTransition& t,
                             const PWLFunction& vdest);

// F restricted to one state: pwl_min/pwl_max over the outgoing transitions'
// values against `v`; targets return their final weight.
PWLFunction state_one_step(const RGame& rg, int s, const ValueMap& v,
                           size_t piece_cap = 100000);

// One application of F; throws GameError(PieceCapExceeded) when some state's
// function exceeds `piece_cap` pieces after merging.
ValueMap apply_F(const RGame& rg, const ValueMap& v,
                 size_t piece_cap = 100000);

struct IterationResult {
  ValueMap values;
  int steps = 0;          // applications of F actually performed
  bool stabilized = false;  // fixpoint reached before the horizon
  std::vector<size_t> piece_counts;  // total pieces after each step
};

// k-fold application of F from V0, stopping early on stabilization when
// `stop_on_fixpoint` is set.
IterationResult value_iteration(const RGame& rg, long horizon,
                                size_t piece_cap = 100000,
                                bool stop_on_fixpoint = true);

// Exact values of an acyclic region game by one reverse-topological sweep.
// Throws GameError(Deadlock-free pre violated) when the game has a cycle.
ValueMap solve_acyclic(const RGame& rg, size_t piece_cap = 100000);

// Evaluates V at a state, falling back to the one-sided limit within the
// state's region when `nu` sits on the region border.
ExtRat value_at(const RGame& rg, const ValueMap& v, int state, const Vec& nu);

}  // namespace wtg
