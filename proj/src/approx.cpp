#include "wtg/approx.hpp"

#include <algorithm>
#include <functional>

#include "wtg/untimed.hpp"

namespace wtg {

namespace {

constexpr int kGranularityCap = 128;

Int int_pow(const Int& base, int e) {
  Int r(1);
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

Int binom(int n, int k) {
  Int r(1);
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

// Ordered set partition counts (Fubini numbers).
Int fubini(int n) {
  std::vector<Int> a(n + 1);
  a[0] = 1;
  for (int k = 1; k <= n; ++k) {
    a[k] = 0;
    for (int j = 1; j <= k; ++j) a[k] += binom(k, j) * a[k - j];
  }
  return a[n];
}

Int max_abs_rate(const RGame& rg) {
  Int r(0);
  for (const auto& s : rg.states) r = std::max(r, Int(abs(s.rate)));
  return r;
}

// Finite bound on |wT| over all target states (infinite pieces skipped).
Rat sup_abs_final(const RGame& rg) {
  Rat sup(0);
  for (const auto& s : rg.states) {
    if (!s.target) continue;
    for (const auto& p : s.wT.pieces()) {
      if (!p.val.is_finite()) continue;
      for (const auto& v : p.cell.vertices())
        sup = std::max(sup, rat_abs(p.val.f.eval(v)));
    }
  }
  return sup;
}

}  // namespace

Int count_regions(int dim, const Int& MN) {
  Int total(0);
  for (int k = 0; k <= dim; ++k)
    total += binom(dim, k) * int_pow(MN, k) * int_pow(MN + 1, dim - k) *
             fubini(k);
  return total;
}

Int occurrence_bound(const RGame& rg, const Rat& sup_wt) {
  // One-step edge weight magnitude: discrete weight plus rate times the
  // largest delay available inside the clock box.
  Int we = rg.max_abs_weight() + rat_ceil(Rat(max_abs_rate(rg)) * rg.M);
  return 3 * Int((long)rg.states.size()) * we + 2 * rat_ceil(sup_wt) + 2;
}

// ---------------------------------------------------------------- kernels

std::map<int, PWLFunction> approximate_kernel(
    const RGame& rg, const SccInfo& scc, const Kernel& kernel,
    const ValueMap& dest_values, const Rat& eps, int forced_N,
    KernelApproxConfig* out_cfg) {
  (void)scc;
  // Kernel sub-game: kernel states plus one synthetic target per destination
  // of a non-kernel transition leaving the kernel; the target carries the
  // current value function of that destination as its final weight.
  RGame krg;
  krg.dim = rg.dim;
  krg.M = rg.M;
  krg.N = rg.N;
  krg.clock_names = rg.clock_names;
  std::vector<int> to_sub(rg.states.size(), -1);
  std::vector<int> kernel_orig;  // krg kernel state -> rg state
  for (size_t s = 0; s < rg.states.size(); ++s) {
    if (!kernel.states[s]) continue;
    to_sub[s] = (int)krg.states.size();
    kernel_orig.push_back((int)s);
    krg.states.push_back(rg.states[s]);
  }
  int n_kernel = (int)krg.states.size();
  std::map<int, int> exit_state;  // rg destination -> krg synthetic target
  for (size_t ti = 0; ti < rg.transitions.size(); ++ti) {
    const auto& t = rg.transitions[ti];
    if (to_sub[t.src] < 0) continue;
    RGameTransition nt = t;
    nt.src = to_sub[t.src];
    if (kernel.transitions[ti]) {
      nt.dst = to_sub[t.dst];
    } else {
      auto it = exit_state.find(t.dst);
      if (it == exit_state.end()) {
        RGameState ex;
        ex.loc = -1;
        ex.name = "exit:" + rg.states[t.dst].name;
        ex.owner = Owner::Min;
        ex.target = true;
        ex.region = rg.states[t.dst].region;
        ex.wT = dest_values[t.dst];
        it = exit_state.emplace(t.dst, (int)krg.states.size()).first;
        krg.states.push_back(std::move(ex));
      }
      nt.dst = it->second;
    }
    krg.transitions.push_back(std::move(nt));
  }
  krg.rebuild_out();
  krg.initial = 0;

  // kappa = rate_max * |kernel region states| + Lipschitz(output weights).
  Rat L(0);
  for (const auto& [dst, id] : exit_state) {
    (void)dst;
    L = std::max(L, krg.states[id].wT.lipschitz_bound());
  }
  Rat kappa = Rat(max_abs_rate(krg)) * Rat(Int((long)n_kernel)) + L;
  int N = forced_N;
  if (N <= 0) {
    Int Ni = kappa <= 0 ? Int(1) : rat_ceil(kappa / eps);
    if (Ni < 1) Ni = 1;
    if (Ni > kGranularityCap)
      throw GameError(GameErrorCode::PieceCapExceeded,
                      "kernel granularity N=" + Ni.str() +
                          " exceeds the practical cap; increase epsilon");
    N = (int)Ni.convert_to<long>();
  }
  if (out_cfg) *out_cfg = {eps, kappa, N, forced_N > 0};

  RGame fine = N > 1 ? refine_rgame(krg, N) : krg;
  CornerGame cg = build_corner_game(fine);
  auto vals = solve_untimed(FiniteWeightedGame::from_corner_game(cg));

  // Interpolate corner values affinely on every 1/N-subregion.
  std::map<int, PWLFunction> result;
  for (int ko : kernel_orig)
    result.emplace(ko, PWLFunction(rg.dim));
  for (size_t fs = 0; fs < fine.states.size(); ++fs) {
    const auto& st = fine.states[fs];
    if (st.target) continue;
    int base = st.base_state >= 0 ? st.base_state : (int)fs;
    int orig = kernel_orig[base];
    const NRegion& r = st.region;
    int m = r.num_blocks();
    std::vector<ExtRat> cv(m + 1);
    bool finite = true;
    for (int j = 0; j <= m; ++j) {
      cv[j] = vals[cg.vertex_index((int)fs, j)];
      if (!cv[j].is_finite()) finite = false;
    }
    Piece p;
    p.cell = r.cell();
    if (!finite) {
      ExtRat tag = cv[m];
      for (int j = 0; j <= m && tag.is_finite(); ++j) tag = cv[j];
      p.val = ExtAffine::inf(tag.is_plus_inf(), rg.dim);
    } else {
      // value = a0 + sum_k a_k * (N*x_{rep(k)} - iota_{rep(k)}) where a0 is
      // the all-floors corner and a_k the k-th corner difference.
      AffineExpr e(rg.dim);
      e.b = cv[m].value();
      for (int k = 1; k <= m; ++k) {
        Rat ak = cv[k - 1].value() - cv[k].value();
        int rep = -1;
        for (int c = 0; c < rg.dim; ++c)
          if (r.block[c] == k) { rep = c; break; }
        e.a[rep] += ak * Rat(Int(fine.N));
        e.b -= ak * Rat(Int(r.iota[rep]));
      }
      p.val = ExtAffine::finite(std::move(e));
    }
    result[orig].add_piece(std::move(p));
  }
  for (auto& [orig, f] : result) {
    (void)orig;
    f.merge_pieces();
  }
  return result;
}

// ---------------------------------------------------------- semi-unfolding

SemiUnfolding build_semi_unfolding(const RGame& rg, const SccInfo& scc,
                                   const Kernel& kernel, int entry,
                                   const Int& bound, size_t node_cap) {
  SemiUnfolding su;
  su.bound = bound;
  std::vector<bool> in_scc(rg.states.size(), false);
  for (int s : scc.states) in_scc[s] = true;
  std::map<int, Int> occ;

  std::function<int(int, int)> make = [&](int s, int depth) -> int {
    if (su.nodes.size() >= node_cap)
      throw GameError(GameErrorCode::PieceCapExceeded,
                      "semi-unfolding node cap exceeded");
    su.depth = std::max(su.depth, depth);
    int id = (int)su.nodes.size();
    su.nodes.push_back({});
    su.nodes[id].rstate = s;
    if (!in_scc[s]) {
      su.nodes[id].kind = SemiUnfolding::Node::TargetLeaf;
      return id;
    }
    Int& cnt = occ[s];
    ++cnt;
    if (cnt >= bound) {
      su.nodes[id].kind = SemiUnfolding::Node::StopLeaf;
      --cnt;
      return id;
    }
    std::vector<std::pair<int, int>> kids;  // (rtrans, child)
    if (kernel.states[s]) {
      su.nodes[id].kind = SemiUnfolding::Node::KernelNode;
      // Exits: non-kernel transitions from any kernel state reachable from s
      // through kernel transitions.
      std::vector<bool> seen(rg.states.size(), false);
      std::vector<int> stack{s};
      seen[s] = true;
      std::vector<int> comp;
      while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        comp.push_back(v);
        for (int ti : rg.out[v]) {
          int d = rg.transitions[ti].dst;
          if (kernel.transitions[ti] && !seen[d]) {
            seen[d] = true;
            stack.push_back(d);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      for (int v : comp)
        for (int ti : rg.out[v])
          if (!kernel.transitions[ti])
            kids.push_back({ti, make(rg.transitions[ti].dst, depth + 1)});
    } else {
      su.nodes[id].kind = SemiUnfolding::Node::Interior;
      for (int ti : rg.out[s])
        kids.push_back({ti, make(rg.transitions[ti].dst, depth + 1)});
    }
    su.nodes[id].children = std::move(kids);
    --cnt;
    return id;
  };
  su.root = make(entry, 0);
  return su;
}

// --------------------------------------------------------------- static SCC

void approximate_scc(const RGame& rg, const SccInfo& scc, const Kernel& kernel,
                     ValueMap& values, const Rat& eps,
                     const ApproxOptions& opts,
                     std::vector<KernelApproxConfig>* kernel_log) {
  bool lower = scc.cls == SccClass::Negative || scc.cls == SccClass::NonPositive;
  bool has_kernel = !kernel.empty();

  // The semi-unfolding is evaluated as a depth-memoized recursion: V_d is the
  // value of the depth-d truncation with stop value +inf (non-negative SCC)
  // or -inf (non-positive); stabilization V_d == V_{d-1} is an exact fixpoint
  // of the monotone update and therefore equals the full unfolding value.
  Int mult(1);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 6)
      throw GameError(GameErrorCode::PieceCapExceeded,
                      "kernel error budget not met after repeated refinement");
    ValueMap v = values;
    for (int s : scc.states)
      v[s] = PWLFunction::constant(rg.states[s].region.cell(),
                                   lower ? ExtRat::minus_inf()
                                         : ExtRat::plus_inf());
    int rounds = 0;
    bool stabilized = false;
    Rat err_sum(0);
    KernelApproxConfig last_cfg;
    while (rounds < opts.max_rounds) {
      ValueMap next = v;
      if (has_kernel) {
        KernelApproxConfig cfg;
        auto kres = approximate_kernel(rg, scc, kernel, v,
                                       eps / Rat(mult),
                                       opts.forced_kernel_N, &cfg);
        last_cfg = cfg;
        if (cfg.N > 0) err_sum += cfg.kappa / Rat(Int(cfg.N));
        for (auto& [s, f] : kres) next[s] = std::move(f);
      }
      for (int s : scc.states)
        if (!has_kernel || !kernel.states[s])
          next[s] = state_one_step(rg, s, v, opts.piece_cap);
      ++rounds;
      bool same = true;
      for (int s : scc.states)
        if (!pwl_equal(next[s], v[s])) { same = false; break; }
      v = std::move(next);
      if (same) {
        stabilized = true;
        break;
      }
    }
    if (!stabilized)
      throw GameError(GameErrorCode::PieceCapExceeded,
                      "SCC value functions did not stabilize within " +
                          std::to_string(opts.max_rounds) + " rounds");
    bool ok = !has_kernel || opts.forced_kernel_N > 0 || err_sum <= eps;
    if (ok) {
      for (int s : scc.states) values[s] = std::move(v[s]);
      if (kernel_log && has_kernel) kernel_log->push_back(last_cfg);
      return;
    }
    // A posteriori budget check failed: accumulated kernel error over the
    // rounds exceeded eps; refine so that `rounds` solves fit the budget.
    mult = 2 * Int((long)rounds);
  }
}

// -------------------------------------------------------------- full schema

ApproxResult approximate_game(const WTG& g, const Rat& eps,
                              const ApproxOptions& opts) {
  ApproxResult res;
  res.rg = build_region_game(g, 1);
  CornerGame cg = build_corner_game(res.rg);
  res.divergence = check_almost_divergent(res.rg, cg);
  if (!res.divergence.almost_divergent) {
    std::string w = res.divergence.mixed_witness
                        ? res.divergence.sccs.sccs[*res.divergence.mixed_witness]
                              .states.empty()
                              ? std::string()
                              : res.rg.states[res.divergence.sccs
                                                  .sccs[*res.divergence
                                                             .mixed_witness]
                                                  .states[0]]
                                    .name
                        : std::string();
    throw GameError(GameErrorCode::NotAlmostDivergent,
                    "game is not almost-divergent (mixed SCC" +
                        (w.empty() ? std::string() : " at " + w) + ")");
  }
  res.infinity = compute_infinity(res.rg, cg, res.divergence);

  // Restrict to states with finite value.
  const RGame& rg = res.rg;
  int n = (int)rg.states.size();
  std::vector<int> map(n, -1);
  RGame rrg;
  rrg.dim = rg.dim;
  rrg.M = rg.M;
  rrg.N = rg.N;
  rrg.clock_names = rg.clock_names;
  for (int s = 0; s < n; ++s) {
    if (res.infinity.plus_inf[s] || res.infinity.minus_inf[s]) continue;
    map[s] = (int)rrg.states.size();
    rrg.states.push_back(rg.states[s]);
  }
  for (const auto& t : rg.transitions) {
    if (map[t.src] < 0 || map[t.dst] < 0) continue;
    RGameTransition nt = t;
    nt.src = map[t.src];
    nt.dst = map[t.dst];
    rrg.transitions.push_back(std::move(nt));
  }
  rrg.rebuild_out();
  rrg.initial = map[rg.initial] >= 0 ? map[rg.initial] : 0;

  ValueMap v;
  if (!rrg.states.empty()) {
    CornerGame rcg = build_corner_game(rrg);
    DivergenceReport rdiv = check_almost_divergent(rrg, rcg);
    int chain = 0;
    for (const auto& scc : rdiv.sccs.sccs)
      if (scc.has_cycle) ++chain;
    res.scc_chain = std::max(chain, 1);
    res.eps_per_scc = eps / Rat(Int((long)res.scc_chain));

    v = initial_value_map(rrg);
    for (const auto& scc : rdiv.sccs.sccs) {  // reverse topological order
      if (!scc.has_cycle) {
        int s = scc.states[0];
        v[s] = state_one_step(rrg, s, v, opts.piece_cap);
      } else {
        Kernel kernel = compute_kernel(scc, scc.cls, rrg, rcg);
        approximate_scc(rrg, scc, kernel, v, res.eps_per_scc, opts,
                        &res.kernels);
      }
    }
  } else {
    res.scc_chain = 0;
    res.eps_per_scc = eps;
  }

  res.values.resize(n);
  for (int s = 0; s < n; ++s) {
    Cell cell = rg.states[s].region.cell();
    if (res.infinity.plus_inf[s])
      res.values[s] = PWLFunction::constant(cell, ExtRat::plus_inf());
    else if (res.infinity.minus_inf[s])
      res.values[s] = PWLFunction::constant(cell, ExtRat::minus_inf());
    else
      res.values[s] = v[map[s]];
  }
  return res;
}

// ----------------------------------------------------------------- symbolic

HorizonCertificate symbolic_horizon(const WTG& g, const Rat& eps) {
  RGame rg = build_region_game(g, 1);
  CornerGame cg = build_corner_game(rg);
  DivergenceReport div = check_almost_divergent(rg, cg);
  if (!div.almost_divergent)
    throw GameError(GameErrorCode::NotAlmostDivergent,
                    "symbolic horizon requires an almost-divergent game");
  InfinityReport inf = compute_infinity(rg, cg, div);
  for (bool b : inf.minus_inf)
    if (b)
      throw GameError(GameErrorCode::MinusInfObstruction,
                      "symbolic method unavailable: -infinity configurations "
                      "exist");

  HorizonCertificate cert;
  cert.eps = eps;
  Rat sup_wt = sup_abs_final(rg);
  cert.gamma_occ = occurrence_bound(rg, sup_wt);
  Int R((long)rg.states.size());
  Int we = rg.max_abs_weight() + rat_ceil(Rat(max_abs_rate(rg)) * rg.M);
  // alpha: kernel nodes on one branch of the semi-unfolding, bounded by the
  // per-label occurrence bound times the number of kernel entry labels.
  cert.total_P = 0;
  Int Mi = rat_num(rg.M);
  Rat Lw(0);
  for (const auto& s : rg.states)
    if (s.target) Lw = std::max(Lw, s.wT.lipschitz_bound());
  for (const auto& scc : div.sccs.sccs) {
    if (!scc.has_cycle) {
      // Targets never change under F; only non-target states cost a step.
      bool target = rg.states[scc.states[0]].target;
      cert.scc_P.push_back(Int(target ? 0 : 1));
      cert.total_P += target ? 0 : 1;
      continue;
    }
    Kernel kernel = compute_kernel(scc, scc.cls, rg, cg);
    Int depth = R * cert.gamma_occ;
    Int P = depth;
    if (!kernel.empty()) {
      Int nk(0);
      for (size_t s = 0; s < kernel.states.size(); ++s)
        if (kernel.states[s]) ++nk;
      Int alpha = nk * cert.gamma_occ;
      Rat kappa = Rat(max_abs_rate(rg)) * Rat(nk) + Lw;
      Rat budget = eps / Rat(2 * alpha);
      Int N = budget <= 0 ? Int(1) : rat_ceil(kappa / budget);
      if (N < 1) N = 1;
      Int S = nk * count_regions(rg.dim, Mi * N) * Int(rg.dim + 1);
      Int PK = S * (2 * (S - 1) * we + 1);
      cert.kernel_P.push_back(PK);
      cert.kernel_N.push_back(N);
      P += alpha * PK;
    }
    if (scc.cls == SccClass::Negative || scc.cls == SccClass::NonPositive)
      P += R;
    cert.scc_P.push_back(P);
    cert.total_P += P;
  }
  return cert;
}

SymbolicResult approximate_symbolic(const WTG& g, const Rat& eps,
                                    std::optional<long> horizon_override,
                                    const ApproxOptions& opts) {
  SymbolicResult res;
  res.certificate = symbolic_horizon(g, eps);
  res.rg = build_region_game(g, 1);
  long horizon;
  if (horizon_override) {
    horizon = *horizon_override;
  } else {
    // The certificate is deliberately conservative; run to the fixpoint (an
    // exact result) within the configured round cap by default.
    horizon = opts.max_rounds;
    if (res.certificate.total_P < Int(horizon))
      horizon = res.certificate.total_P.convert_to<long>();
  }
  auto it = value_iteration(res.rg, horizon, opts.piece_cap, true);
  res.values = std::move(it.values);
  res.steps = it.steps;
  res.stabilized = it.stabilized;
  res.certificate_met =
      res.stabilized || Int(res.steps) >= res.certificate.total_P;
  return res;
}

}  // namespace wtg
