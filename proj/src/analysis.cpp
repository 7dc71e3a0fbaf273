#include "wtg/analysis.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace wtg {

std::string scc_class_name(SccClass c) {
  switch (c) {
    case SccClass::Positive: return "positive";
    case SccClass::Negative: return "negative";
    case SccClass::NonNegative: return "non-negative";
    case SccClass::NonPositive: return "non-positive";
    default: return "mixed";
  }
}

// ---------------------------------------------------------------------- SCCs

SccDecomposition scc_decompose(const RGame& rg) {
  // Tarjan; SCCs are emitted sinks-first, i.e. in reverse topological order.
  int n = (int)rg.states.size();
  SccDecomposition dec;
  dec.scc_of.assign(n, -1);
  std::vector<int> index(n, -1), low(n, 0), stack;
  std::vector<bool> on_stack(n, false);
  int counter = 0;
  std::function<void(int)> strong = [&](int v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (int ti : rg.out[v]) {
      int w = rg.transitions[ti].dst;
      if (index[w] < 0) {
        strong(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      SccInfo scc;
      scc.id = (int)dec.sccs.size();
      scc.topo_index = scc.id;
      int w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        dec.scc_of[w] = scc.id;
        scc.states.push_back(w);
      } while (w != v);
      dec.sccs.push_back(std::move(scc));
    }
  };
  for (int v = 0; v < n; ++v)
    if (index[v] < 0) strong(v);
  for (auto& scc : dec.sccs) {
    scc.has_cycle = scc.states.size() > 1;
    if (!scc.has_cycle) {
      int s = scc.states[0];
      for (int ti : rg.out[s])
        if (rg.transitions[ti].dst == s) scc.has_cycle = true;
    }
  }
  return dec;
}

std::vector<bool> attractor(const RGame& rg, Owner player,
                            const std::vector<bool>& targets,
                            const std::vector<bool>& sub) {
  int n = (int)rg.states.size();
  std::vector<bool> A(n, false);
  for (int i = 0; i < n; ++i) A[i] = targets[i] && sub[i];
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < n; ++s) {
      if (!sub[s] || A[s] || rg.states[s].target) continue;
      bool add;
      if (rg.states[s].owner == player) {
        add = false;
        for (int ti : rg.out[s]) {
          int d = rg.transitions[ti].dst;
          if (sub[d] && A[d]) { add = true; break; }
        }
      } else {
        add = !rg.out[s].empty();
        for (int ti : rg.out[s]) {
          int d = rg.transitions[ti].dst;
          if (!sub[d] || !A[d]) { add = false; break; }
        }
      }
      if (add) {
        A[s] = true;
        changed = true;
      }
    }
  }
  return A;
}

// -------------------------------------------------- corner subgraph utilities

namespace {

struct SubGraph {
  std::vector<int> verts;              // corner-game vertex ids
  std::vector<int> local;              // cg vertex -> local index or -1
  struct E { int u, v; Rat w; int rtrans; int cedge; };
  std::vector<E> edges;
};

SubGraph corner_subgraph(const SccInfo& scc, const RGame& rg,
                         const CornerGame& cg, bool negate) {
  SubGraph sg;
  std::vector<bool> in_scc(rg.states.size(), false);
  for (int s : scc.states) in_scc[s] = true;
  sg.local.assign(cg.vertices.size(), -1);
  for (size_t i = 0; i < cg.vertices.size(); ++i) {
    if (in_scc[cg.vertices[i].rstate]) {
      sg.local[i] = (int)sg.verts.size();
      sg.verts.push_back((int)i);
    }
  }
  for (size_t ei = 0; ei < cg.edges.size(); ++ei) {
    const auto& e = cg.edges[ei];
    if (sg.local[e.src] < 0 || sg.local[e.dst] < 0) continue;
    sg.edges.push_back({sg.local[e.src], sg.local[e.dst],
                        negate ? Rat(-e.weight) : e.weight, e.rtrans, (int)ei});
  }
  return sg;
}

// Bellman-Ford shortest-path potentials from a virtual source connected to
// every vertex with weight 0; nullopt when a negative cycle exists.
template <typename EdgeList>
std::optional<std::vector<Rat>> bf_potentials(int n, const EdgeList& edges) {
  std::vector<Rat> dist(n, Rat(0));
  for (int round = 0; round <= n; ++round) {
    bool changed = false;
    for (const auto& e : edges) {
      if (dist[e.u] + e.w < dist[e.v]) {
        dist[e.v] = dist[e.u] + e.w;
        changed = true;
      }
    }
    if (!changed) return dist;
  }
  return std::nullopt;
}

// Cycle detection among a subset of edges (DFS colouring).
template <typename EdgeList>
bool has_cycle_among(int n, const EdgeList& edges,
                     const std::vector<bool>& keep) {
  std::vector<std::vector<int>> adj(n);
  for (size_t i = 0; i < edges.size(); ++i)
    if (keep[i]) adj[edges[i].u].push_back(edges[i].v);
  std::vector<int> color(n, 0);
  std::function<bool(int)> dfs = [&](int v) {
    color[v] = 1;
    for (int w : adj[v]) {
      if (color[w] == 1) return true;
      if (color[w] == 0 && dfs(w)) return true;
    }
    color[v] = 2;
    return false;
  };
  for (int v = 0; v < n; ++v)
    if (color[v] == 0 && dfs(v)) return true;
  return false;
}

bool zero_cycle_exists(int n, const std::vector<SubGraph::E>& edges,
                       const std::vector<Rat>& pot) {
  std::vector<bool> tight(edges.size(), false);
  for (size_t i = 0; i < edges.size(); ++i)
    tight[i] = edges[i].w + pot[edges[i].u] - pot[edges[i].v] == 0;
  return has_cycle_among(n, edges, tight);
}

// The pair-corner product test: assuming no negative cycle among `sg.edges`,
// looks for a synchronized cycle whose first component weighs 0 and second
// weighs more (one corner play of weight 0 and one of nonzero weight along
// the same region-transition sequence).
bool pair_mixed_test(const SccInfo& scc, const RGame& rg, const CornerGame& cg,
                     const SubGraph& sg) {
  (void)rg;
  // Product vertices: pairs of corners of the same region state.
  std::map<std::pair<int, int>, int> id;
  std::vector<std::pair<int, int>> nodes;
  for (int a : sg.verts)
    for (int b : sg.verts)
      if (cg.vertices[a].rstate == cg.vertices[b].rstate) {
        id[{a, b}] = (int)nodes.size();
        nodes.push_back({a, b});
      }
  (void)scc;
  struct PE { int u, v; Rat w; Rat w2; };
  std::vector<PE> pedges;
  // Group subgraph edges per region transition.
  std::map<int, std::vector<const SubGraph::E*>> by_rt;
  for (const auto& e : sg.edges) by_rt[e.rtrans].push_back(&e);
  for (const auto& [rt, list] : by_rt) {
    (void)rt;
    for (const auto* e1 : list)
      for (const auto* e2 : list) {
        int u = id.at({sg.verts[e1->u], sg.verts[e2->u]});
        int v = id.at({sg.verts[e1->v], sg.verts[e2->v]});
        pedges.push_back({u, v, e1->w, e2->w});
      }
  }
  struct W1 { int u, v; Rat w; };
  std::vector<W1> w1;
  for (const auto& e : pedges) w1.push_back({e.u, e.v, e.w});
  auto pot = bf_potentials((int)nodes.size(), w1);
  if (!pot) return true;  // negative corner cycle: caller handles as Mixed
  // Tight edges carry all w1-zero cycles; look for a positive w2 cycle there.
  struct W2 { int u, v; Rat w; };
  std::vector<W2> tight;
  for (const auto& e : pedges)
    if (e.w + (*pot)[e.u] - (*pot)[e.v] == 0) tight.push_back({e.u, e.v, Rat(-e.w2)});
  return !bf_potentials((int)nodes.size(), tight).has_value();
}

}  // namespace

SccClass classify_scc(const SccInfo& scc, const RGame& rg, const CornerGame& cg,
                      bool* zero_cycle) {
  if (zero_cycle) *zero_cycle = false;
  SubGraph pos_sg = corner_subgraph(scc, rg, cg, false);
  SubGraph neg_sg = corner_subgraph(scc, rg, cg, true);
  int n = (int)pos_sg.verts.size();
  auto pot_pos = bf_potentials(n, pos_sg.edges);  // fails iff negative cycle
  auto pot_neg = bf_potentials(n, neg_sg.edges);  // fails iff positive cycle
  bool has_neg = !pot_pos.has_value();
  bool has_pos = !pot_neg.has_value();
  if (has_neg && has_pos) return SccClass::Mixed;
  if (!has_neg) {
    if (has_pos && pair_mixed_test(scc, rg, cg, pos_sg)) return SccClass::Mixed;
    bool zero = zero_cycle_exists(n, pos_sg.edges, *pot_pos);
    if (zero_cycle) *zero_cycle = zero;
    return zero ? SccClass::NonNegative
                : (has_pos ? SccClass::Positive : SccClass::Positive);
  }
  // Non-positive side: work on negated weights.
  if (pair_mixed_test(scc, rg, cg, neg_sg)) return SccClass::Mixed;
  bool zero = zero_cycle_exists(n, neg_sg.edges, *pot_neg);
  if (zero_cycle) *zero_cycle = zero;
  return zero ? SccClass::NonPositive : SccClass::Negative;
}

bool Kernel::empty() const {
  for (bool b : transitions)
    if (b) return false;
  return true;
}

Kernel compute_kernel(const SccInfo& scc, SccClass cls, const RGame& rg,
                      const CornerGame& cg) {
  if (cls == SccClass::Mixed)
    throw GameError(GameErrorCode::NotAlmostDivergent,
                    "kernel of a mixed SCC is undefined");
  Kernel k;
  k.states.assign(rg.states.size(), false);
  k.transitions.assign(rg.transitions.size(), false);
  if (cls == SccClass::Positive || cls == SccClass::Negative) return k;
  bool negate = cls == SccClass::NonPositive;
  SubGraph sg = corner_subgraph(scc, rg, cg, negate);
  int n = (int)sg.verts.size();
  // All-pairs shortest paths (no negative cycles in this orientation).
  std::vector<std::vector<ExtRat>> dist(
      n, std::vector<ExtRat>(n, ExtRat::plus_inf()));
  for (int i = 0; i < n; ++i) dist[i][i] = ExtRat(Rat(0));
  for (const auto& e : sg.edges)
    dist[e.u][e.v] = ext_min(dist[e.u][e.v], ExtRat(e.w));
  for (int m = 0; m < n; ++m)
    for (int i = 0; i < n; ++i) {
      if (dist[i][m].is_plus_inf()) continue;
      for (int j = 0; j < n; ++j) {
        if (dist[m][j].is_plus_inf()) continue;
        dist[i][j] = ext_min(dist[i][j], dist[i][m] + dist[m][j]);
      }
    }
  for (const auto& e : sg.edges) {
    int rt = e.rtrans;
    if (k.transitions[rt]) continue;
    ExtRat cyc = dist[e.v][e.u].is_plus_inf() ? ExtRat::plus_inf()
                                              : ExtRat(e.w) + dist[e.v][e.u];
    if (cyc == ExtRat(Rat(0))) {
      k.transitions[rt] = true;
      k.states[rg.transitions[rt].src] = true;
      k.states[rg.transitions[rt].dst] = true;
    }
  }
  return k;
}

std::vector<std::vector<int>> simple_cycles(const RGame& rg,
                                            const std::vector<int>& states,
                                            size_t cap) {
  std::vector<bool> in_set(rg.states.size(), false);
  for (int s : states) in_set[s] = true;
  std::vector<std::vector<int>> cycles;
  std::vector<int> sorted = states;
  std::sort(sorted.begin(), sorted.end());
  for (int start : sorted) {
    std::vector<bool> on_path(rg.states.size(), false);
    std::vector<int> path;  // transition ids
    std::function<void(int)> dfs = [&](int v) {
      if (cycles.size() >= cap) return;
      on_path[v] = true;
      for (int ti : rg.out[v]) {
        int w = rg.transitions[ti].dst;
        if (!in_set[w] || w < start) continue;
        if (w == start) {
          path.push_back(ti);
          cycles.push_back(path);
          path.pop_back();
          if (cycles.size() >= cap) break;
        } else if (!on_path[w]) {
          path.push_back(ti);
          dfs(w);
          path.pop_back();
        }
      }
      on_path[v] = false;
    };
    dfs(start);
  }
  return cycles;
}

std::optional<std::pair<Rat, Rat>> corner_play_bounds(
    const RGame& rg, const CornerGame& cg, const std::vector<int>& cycle) {
  // Corner edges grouped by region transition.
  std::map<int, std::vector<const CornerGame::Edge*>> by_rt;
  for (const auto& e : cg.edges) by_rt[e.rtrans].push_back(&e);
  (void)rg;
  std::map<int, std::pair<Rat, Rat>> layer;  // corner vertex -> (min, max)
  int start_state = rg.transitions[cycle[0]].src;
  for (size_t vi = 0; vi < cg.vertices.size(); ++vi)
    if (cg.vertices[vi].rstate == start_state)
      layer[(int)vi] = {Rat(0), Rat(0)};
  for (int rt : cycle) {
    std::map<int, std::pair<Rat, Rat>> next;
    auto it = by_rt.find(rt);
    if (it == by_rt.end()) return std::nullopt;
    for (const auto* e : it->second) {
      auto src = layer.find(e->src);
      if (src == layer.end()) continue;
      Rat lo = src->second.first + e->weight;
      Rat hi = src->second.second + e->weight;
      auto [slot, fresh] = next.emplace(e->dst, std::make_pair(lo, hi));
      if (!fresh) {
        slot->second.first = std::min(slot->second.first, lo);
        slot->second.second = std::max(slot->second.second, hi);
      }
    }
    layer = std::move(next);
    if (layer.empty()) return std::nullopt;
  }
  auto it = layer.begin();
  Rat lo = it->second.first, hi = it->second.second;
  for (; it != layer.end(); ++it) {
    lo = std::min(lo, it->second.first);
    hi = std::max(hi, it->second.second);
  }
  return std::make_pair(lo, hi);
}

DivergenceReport check_almost_divergent(const RGame& rg, const CornerGame& cg) {
  DivergenceReport rep;
  rep.sccs = scc_decompose(rg);
  rep.almost_divergent = true;
  rep.divergent = true;
  for (auto& scc : rep.sccs.sccs) {
    if (!scc.has_cycle) {
      scc.cls = SccClass::Positive;  // no cycles: vacuously divergent
      continue;
    }
    bool zero = false;
    scc.cls = classify_scc(scc, rg, cg, &zero);
    if (scc.cls == SccClass::Mixed) {
      rep.almost_divergent = false;
      rep.divergent = false;
      if (!rep.mixed_witness) rep.mixed_witness = scc.id;
    } else if (zero) {
      rep.divergent = false;
    }
  }
  return rep;
}

// ------------------------------------------------------------------ infinity

std::vector<bool> plus_infinity_states(const RGame& rg) {
  int n = (int)rg.states.size();
  std::vector<bool> finite_target(n, false), all(n, true);
  for (int i = 0; i < n; ++i) {
    const auto& s = rg.states[i];
    if (!s.target) continue;
    ExtRat v = eval_limit_in_region(s.wT, s.region.representative(),
                                    s.region.cell());
    if (!v.is_plus_inf()) finite_target[i] = true;
  }
  auto reach = attractor(rg, Owner::Min, finite_target, all);
  std::vector<bool> plus(n, false);
  for (int i = 0; i < n; ++i) plus[i] = !reach[i];
  return plus;
}

namespace {

struct SimpleArena {
  std::vector<Owner> owner;
  std::vector<std::vector<int>> succ;
  std::vector<bool> buchi;
};

std::vector<bool> pre_min(const SimpleArena& a, const std::vector<bool>& X) {
  int n = (int)a.owner.size();
  std::vector<bool> out(n, false);
  for (int s = 0; s < n; ++s) {
    if (a.owner[s] == Owner::Min) {
      for (int d : a.succ[s])
        if (X[d]) { out[s] = true; break; }
    } else {
      out[s] = !a.succ[s].empty();
      for (int d : a.succ[s])
        if (!X[d]) { out[s] = false; break; }
    }
  }
  return out;
}

// nu Z. mu Y. (B and pre(Z)) or pre(Y): Min wins "visit B infinitely often".
std::vector<bool> buchi_win_min(const SimpleArena& a, int* rounds) {
  int n = (int)a.owner.size();
  std::vector<bool> Z(n, true);
  int outer = 0;
  while (true) {
    ++outer;
    auto preZ = pre_min(a, Z);
    std::vector<bool> Y(n, false);
    bool grow = true;
    while (grow) {
      grow = false;
      auto preY = pre_min(a, Y);
      for (int s = 0; s < n; ++s) {
        bool v = (a.buchi[s] && preZ[s]) || preY[s];
        if (v && !Y[s]) {
          Y[s] = true;
          grow = true;
        }
      }
    }
    if (Y == Z) break;
    Z = std::move(Y);
  }
  if (rounds) *rounds = outer;
  return Z;
}

}  // namespace

InfinityReport compute_infinity(const RGame& rg, const CornerGame& cg,
                                const DivergenceReport& report) {
  int n = (int)rg.states.size();
  InfinityReport rep;
  rep.plus_inf = plus_infinity_states(rg);
  std::vector<bool> sub(n, false);
  for (int i = 0; i < n; ++i) sub[i] = !rep.plus_inf[i];

  // Seed: target states whose final weight is -infinity on their region.
  std::vector<bool> W(n, false);
  for (int i = 0; i < n; ++i) {
    const auto& s = rg.states[i];
    if (!s.target || !sub[i]) continue;
    ExtRat v = eval_limit_in_region(s.wT, s.region.representative(),
                                    s.region.cell());
    if (v.is_minus_inf()) W[i] = true;
  }

  rep.buchi_rounds = 0;
  // Reverse topological pass (scc_decompose already lists sinks first): in
  // non-positive SCCs Min may force unboundedly negative accumulation.
  for (const auto& scc : report.sccs.sccs) {
    if (!scc.has_cycle) continue;
    if (scc.cls != SccClass::Negative && scc.cls != SccClass::NonPositive)
      continue;
    bool in_sub = true;
    for (int s : scc.states)
      if (!sub[s]) in_sub = false;
    if (!in_sub) continue;  // SCC contains +inf states: not usable by Min
    auto Wc = attractor(rg, Owner::Min, W, sub);
    Kernel kernel = compute_kernel(scc, scc.cls, rg, cg);
    // Arena: 0 = winning sink, 1 = losing sink, then SCC states, then one
    // virtual node per marked (non-kernel) internal transition.
    SimpleArena a;
    a.owner = {Owner::Min, Owner::Min};
    a.succ = {{0}, {1}};
    a.buchi = {true, false};
    std::vector<int> node_of(n, -1);
    for (int s : scc.states) {
      node_of[s] = (int)a.owner.size();
      a.owner.push_back(rg.states[s].owner);
      a.succ.push_back({});
      a.buchi.push_back(false);
    }
    std::vector<bool> in_scc(n, false);
    for (int s : scc.states) in_scc[s] = true;
    for (int s : scc.states) {
      for (int ti : rg.out[s]) {
        const auto& t = rg.transitions[ti];
        if (in_scc[t.dst]) {
          if (!kernel.transitions[ti]) {
            int v = (int)a.owner.size();
            a.owner.push_back(Owner::Min);
            a.succ.push_back({node_of[t.dst]});
            a.buchi.push_back(true);
            a.succ[node_of[s]].push_back(v);
          } else {
            a.succ[node_of[s]].push_back(node_of[t.dst]);
          }
        } else if (sub[t.dst]) {
          a.succ[node_of[s]].push_back(Wc[t.dst] ? 0 : 1);
        }
        // Transitions into +inf states are never useful for Min: omitted.
      }
    }
    int rounds = 0;
    auto win = buchi_win_min(a, &rounds);
    rep.buchi_rounds = std::max(rep.buchi_rounds, rounds);
    for (int s : scc.states)
      if (win[node_of[s]]) W[s] = true;
  }
  rep.minus_inf = attractor(rg, Owner::Min, W, sub);
  for (int i = 0; i < n; ++i)
    if (W[i]) rep.minus_inf[i] = true;
  return rep;
}

}  // namespace wtg
