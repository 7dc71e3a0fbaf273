#pragma once

// Graph analyses on the region and corner games: SCC decomposition,
// attractors, almost-divergence decision, kernel extraction, and detection of
// +infinity / -infinity value regions.

#include <optional>
#include <vector>

#include "wtg/region.hpp"

namespace wtg {

enum class SccClass { Positive, Negative, NonNegative, NonPositive, Mixed };

std::string scc_class_name(SccClass c);

struct SccInfo {
  int id = 0;
  std::vector<int> states;  // region-game state ids
  SccClass cls = SccClass::Positive;
  bool has_cycle = false;
  int topo_index = 0;  // position in reverse topological order (sinks first)
};

struct SccDecomposition {
  std::vector<SccInfo> sccs;   // listed in reverse topological order
  std::vector<int> scc_of;     // per region-game state: index into sccs
};

SccDecomposition scc_decompose(const RGame& rg);

// States from which `player` can force reaching `targets` inside `sub`.
// Transitions leaving `sub` are unavailable to `player` and count as escapes
// for the opponent.
std::vector<bool> attractor(const RGame& rg, Owner player,
                            const std::vector<bool>& targets,
                            const std::vector<bool>& sub);

// Classifies one SCC from the corner game restricted to it (sign tests plus
// the pair-corner product test).  Also reports whether a zero-weight corner
// cycle exists (separates Positive/Negative from NonNegative/NonPositive).
SccClass classify_scc(const SccInfo& scc, const RGame& rg, const CornerGame& cg,
                      bool* zero_cycle = nullptr);

struct Kernel {
  std::vector<bool> states;       // over region-game states
  std::vector<bool> transitions;  // over region-game transitions
  bool empty() const;
};

// T_K: region transitions inside the SCC whose extremal corner-cycle weight
// through some corner edge is 0.  Requires a non-Mixed classification.
Kernel compute_kernel(const SccInfo& scc, SccClass cls, const RGame& rg,
                      const CornerGame& cg);

// Oracle used by property tests: all simple cycles of the region game within
// one SCC, as transition index lists (bounded enumeration).
std::vector<std::vector<int>> simple_cycles(const RGame& rg,
                                            const std::vector<int>& states,
                                            size_t cap = 100000);

// Min and max weight over corner plays following the cyclic region path
// `cycle` once (any start corner).  nullopt if no corner play follows it.
std::optional<std::pair<Rat, Rat>> corner_play_bounds(
    const RGame& rg, const CornerGame& cg, const std::vector<int>& cycle);

struct DivergenceReport {
  bool almost_divergent = false;
  bool divergent = false;
  SccDecomposition sccs;
  std::optional<int> mixed_witness;  // scc index
};

DivergenceReport check_almost_divergent(const RGame& rg, const CornerGame& cg);

// Complement of Min's attractor to the targets that are not identically
// +infinity.
std::vector<bool> plus_infinity_states(const RGame& rg);

struct InfinityReport {
  std::vector<bool> plus_inf;
  std::vector<bool> minus_inf;
  int buchi_rounds = 0;  // max outer fixpoint rounds seen (warn above 4)
};

// Full +inf/-inf detection; requires an almost-divergent game (classification
// is taken from `report`).
InfinityReport compute_infinity(const RGame& rg, const CornerGame& cg,
                                const DivergenceReport& report);

}  // namespace wtg
