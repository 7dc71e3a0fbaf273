#pragma once

// Data model of weighted timed games: clocks, guards, locations, transitions,
// plays, and the concrete one-step edge semantics.  All values are immutable
// after construction.

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "wtg/pwl.hpp"
#include "wtg/rational.hpp"

namespace wtg {

enum class Owner { Min, Max };

enum class Cmp { Lt, Le, Eq, Ge, Gt };

struct AtomicConstraint {
  int clock = 0;
  Cmp op = Cmp::Le;
  Rat constant;
};

struct Guard {
  std::vector<AtomicConstraint> constraints;

  bool satisfied(const Vec& nu) const;
  // The closed version: < becomes <=, > becomes >=.
  Guard closed() const;
  // The guard as a cell over clock space, conjoined with 0 <= x <= M for all
  // clocks (guards implicitly keep every clock below the global bound).
  Cell cell(int dim, const Rat& M) const;
};

struct Location {
  std::string id;
  Owner owner = Owner::Min;
  Int rate = 0;        // weight per time unit
  bool target = false;
};

struct Transition {
  int from = 0;
  Guard guard;
  std::vector<bool> resets;  // per clock
  int to = 0;
  Int weight = 0;
};

// Error taxonomy used by the parser and validators.
enum class GameErrorCode {
  Syntax,
  UnknownClock,
  UnknownLocation,
  NoLocations,
  ClockBoundRequired,
  NonIntegerConstant,
  TargetOutgoing,
  TargetOwnedByMax,
  UnboundedClock,   // guard constant above the clock bound
  Deadlock,
  BadFinalWeight,
  EdgeDisabled,
  NotAcyclic,
  NotAlmostDivergent,
  MinusInfObstruction,
  PieceCapExceeded,
};

struct GameError : std::runtime_error {
  GameErrorCode code;
  GameError(GameErrorCode c, const std::string& msg)
      : std::runtime_error(msg), code(c) {}
};

struct WTG {
  std::vector<std::string> clocks;
  Rat clock_bound;  // M, a positive integer
  std::vector<Location> locations;
  std::vector<Transition> transitions;
  std::map<int, PWLFunction> final_weights;  // target location -> wT
  int initial = 0;

  // Derived statistics.
  Int w_max_L = 0;  // max |location rate|
  Int w_max_T = 0;  // max |transition weight|
  Int w_max_e = 0;  // M * w_max_L + w_max_T

  int dim() const { return (int)clocks.size(); }
  int clock_index(const std::string& name) const;
  int location_index(const std::string& id) const;
  std::vector<int> transitions_from(int loc) const;
  void compute_stats();
  // Structural validation (no region-game construction): target/no-outgoing,
  // target ownership, guard constants within the bound, final weight presence.
  void validate() const;
};

struct Config {
  int location = 0;
  Vec valuation;
};

struct Move {
  Rat delay;
  int transition = 0;
};

struct Play {
  Config start;
  std::vector<Move> moves;
};

// Parses the JSON game format; throws GameError.
WTG parse_game(const std::string& text);
std::string serialize_game(const WTG& g);

// (config, delay, transition) -> (config', edge weight); throws GameError on
// a disabled edge.
std::pair<Config, Rat> edge_successor(const WTG& g, const Config& c,
                                      const Rat& delay, int transition);

// Cumulated weight of the play plus the final weight if it ends in a target;
// +inf when it does not reach a target.
ExtRat play_weight(const WTG& g, const Play& play);
// Cumulated weight only (no final weight).
Rat play_cumulated_weight(const WTG& g, const Play& play);

}  // namespace wtg
