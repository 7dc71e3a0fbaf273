#pragma once

// The two epsilon-approximation schemas: (a) static — SCC decomposition,
// kernel approximation by 1/N-corner interpolation, semi-unfolding, exact
// acyclic solving; (b) symbolic — value iteration to a computed horizon
// certificate.

#include <map>
#include <optional>
#include <vector>

#include "wtg/analysis.hpp"
#include "wtg/timed.hpp"

namespace wtg {

struct KernelApproxConfig {
  Rat epsilon;     // threshold this kernel was solved at
  Rat kappa;       // rate_max * |kernel region states| + output Lipschitz
  int N = 1;       // granularity actually used (>= kappa/epsilon unless forced)
  bool forced = false;
};

// Value functions of the kernel states given current value functions for
// every destination of a non-kernel transition leaving a kernel state.
// Infinite destination values propagate as region-uniform tags.  When
// forced_N > 0 the granularity is taken as given instead of ceil(kappa/eps).
std::map<int, PWLFunction> approximate_kernel(
    const RGame& rg, const SccInfo& scc, const Kernel& kernel,
    const ValueMap& dest_values, const Rat& eps, int forced_N = 0,
    KernelApproxConfig* out_cfg = nullptr);

// Occurrence bound 3|R|w_e + 2 sup|wT| + 2; sup_wt is the finite bound on the
// current output weights.
Int occurrence_bound(const RGame& rg, const Rat& sup_wt);

struct SemiUnfolding {
  struct Node {
    enum Kind { Interior, KernelNode, TargetLeaf, StopLeaf };
    Kind kind = Interior;
    int rstate = -1;  // label: entry region state (TargetLeaf: exit state)
    std::vector<std::pair<int, int>> children;  // (region transition, node id)
  };
  std::vector<Node> nodes;
  int root = 0;
  Int bound;   // per-label occurrence bound used
  int depth = 0;
};

// Explicit semi-unfolding tree of one SCC from `entry`, with kernel sub-games
// as unexpanded nodes; a branch gets a stop leaf when a label would occur
// `bound` times.  Intended for inspection and small bounds; the solver
// evaluates the equivalent depth-memoized recursion instead.
SemiUnfolding build_semi_unfolding(const RGame& rg, const SccInfo& scc,
                                   const Kernel& kernel, int entry,
                                   const Int& bound,
                                   size_t node_cap = 2000000);

struct ApproxOptions {
  int forced_kernel_N = 0;   // 0: from the kappa/epsilon rule
  size_t piece_cap = 100000;
  int max_rounds = 300;      // cap on fixpoint rounds per SCC
};

// Approximate values of the SCC states given exact-or-approximate value
// functions for every out-of-SCC successor (read from `values`); results are
// written back into `values`.  Kernel thresholds are re-validated a
// posteriori: with D stabilization rounds the accumulated kernel error is
// D * kappa / N, and N is enlarged and the SCC re-solved when that exceeds
// eps.  Throws GameError when no fixpoint is reached within max_rounds.
void approximate_scc(const RGame& rg, const SccInfo& scc, const Kernel& kernel,
                     ValueMap& values, const Rat& eps,
                     const ApproxOptions& opts,
                     std::vector<KernelApproxConfig>* kernel_log = nullptr);

struct ApproxResult {
  RGame rg;  // base region game (granularity 1) the values live on
  ValueMap values;
  DivergenceReport divergence;
  InfinityReport infinity;
  std::vector<KernelApproxConfig> kernels;  // one entry per kernel solve pass
  int scc_chain = 0;  // cyclic SCCs the budget was split across
  Rat eps_per_scc;
};

// The static schema end to end: divergence check, infinity detection, then
// the SCC chain in reverse topological order with a split epsilon budget.
ApproxResult approximate_game(const WTG& g, const Rat& eps,
                              const ApproxOptions& opts = {});

struct HorizonCertificate {
  Rat eps;
  Int gamma_occ;                  // occurrence bound used for depths
  std::vector<Int> kernel_P;      // per kernel, the section-7 formula value
  std::vector<Int> kernel_N;      // granularity each P_K was instantiated at
  std::vector<Int> scc_P;         // per SCC bound (P+ / P- / depth)
  Int total_P;                    // sum over the SCC chain
};

// Horizon such that Val^P is an eps-approximation; requires almost-divergence
// and the absence of -infinity configurations (GameError otherwise).  The
// bound is constructive and deliberately conservative.
HorizonCertificate symbolic_horizon(const WTG& g, const Rat& eps);

struct SymbolicResult {
  RGame rg;
  ValueMap values;
  HorizonCertificate certificate;
  long steps = 0;
  bool stabilized = false;      // exact fixpoint reached (result is exact)
  bool certificate_met = false; // ran to >= certificate horizon or stabilized
};

// Value iteration to the certificate horizon, the stabilization fixpoint, or
// the explicit override, whichever comes first.
SymbolicResult approximate_symbolic(const WTG& g, const Rat& eps,
                                    std::optional<long> horizon_override = {},
                                    const ApproxOptions& opts = {});

// Number of 1/N-regions of [0, M]^dim (counting formula; exact).
Int count_regions(int dim, const Int& MN);

}  // namespace wtg
