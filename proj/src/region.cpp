#include "wtg/region.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <sstream>

namespace wtg {

// ------------------------------------------------------------------- NRegion

int NRegion::num_blocks() const {
  int m = 0;
  for (int b : block) m = std::max(m, b);
  return m;
}

NRegion NRegion::of(const Vec& nu, int N, const Rat& M) {
  NRegion r;
  r.N = N;
  int dim = (int)nu.size();
  r.iota.resize(dim);
  r.block.resize(dim);
  std::vector<Rat> fracs(dim);
  for (int i = 0; i < dim; ++i) {
    if (nu[i] < 0 || nu[i] > M)
      throw std::invalid_argument("valuation outside [0,M]");
    Rat scaled = nu[i] * N;
    Int fl = rat_floor(scaled);
    r.iota[i] = (int)fl.convert_to<long long>();
    fracs[i] = scaled - Rat(fl);
  }
  std::vector<Rat> distinct;
  for (int i = 0; i < dim; ++i)
    if (fracs[i] != 0 &&
        std::find(distinct.begin(), distinct.end(), fracs[i]) == distinct.end())
      distinct.push_back(fracs[i]);
  std::sort(distinct.begin(), distinct.end());
  for (int i = 0; i < dim; ++i) {
    if (fracs[i] == 0) {
      r.block[i] = 0;
    } else {
      r.block[i] =
          1 + (int)(std::find(distinct.begin(), distinct.end(), fracs[i]) -
                    distinct.begin());
    }
  }
  return r;
}

bool NRegion::contains(const Vec& nu) const {
  int dim = (int)iota.size();
  std::vector<Rat> fracs(dim);
  for (int i = 0; i < dim; ++i) {
    Rat scaled = nu[i] * N;
    if (nu[i] < 0) return false;
    Int fl = rat_floor(scaled);
    if (fl != iota[i]) return false;
    fracs[i] = scaled - Rat(fl);
    if ((block[i] == 0) != (fracs[i] == 0)) return false;
  }
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      if (block[i] == 0 || block[j] == 0) continue;
      if (block[i] < block[j] && !(fracs[i] < fracs[j])) return false;
      if (block[i] == block[j] && fracs[i] != fracs[j]) return false;
    }
  return true;
}

Vec NRegion::representative() const {
  int m = num_blocks();
  Vec nu(iota.size());
  for (size_t i = 0; i < iota.size(); ++i) {
    Rat frac = block[i] == 0 ? Rat(0) : Rat(block[i], m + 1);
    nu[i] = Rat(Rat(iota[i]) + frac) / N;
  }
  return nu;
}

Cell NRegion::cell() const {
  int dim = (int)iota.size();
  Cell c(dim);
  auto scaled = [&](int i) {
    AffineExpr e(dim);
    e.a[i] = N;
    e.b = -iota[i];
    return e;  // N*x_i - iota_i
  };
  for (int i = 0; i < dim; ++i) {
    AffineExpr f = scaled(i);
    if (block[i] == 0) {
      c.add(LinCon(f, false));
      c.add(LinCon(-f, false));
    } else {
      c.add(LinCon(f, true));  // frac > 0
      AffineExpr upper = -f;   // 1 - frac > 0
      upper.b += 1;
      c.add(LinCon(upper, true));
    }
  }
  // Ordering between fractional blocks and equality within a block.
  int m = num_blocks();
  std::vector<int> rep(m + 1, -1);
  for (int i = 0; i < dim; ++i) {
    if (block[i] == 0) continue;
    if (rep[block[i]] < 0) {
      rep[block[i]] = i;
    } else {
      AffineExpr eq = scaled(i) - scaled(rep[block[i]]);
      c.add(LinCon(eq, false));
      c.add(LinCon(-eq, false));
    }
  }
  for (int b = 1; b < m; ++b) {
    AffineExpr diff = scaled(rep[b + 1]) - scaled(rep[b]);
    c.add(LinCon(diff, true));
  }
  return c;
}

std::optional<NRegion> NRegion::time_successor(int MN) const {
  int dim = (int)iota.size();
  for (int i = 0; i < dim; ++i)
    if (block[i] == 0 && iota[i] == MN) return std::nullopt;  // at the bound
  NRegion r = *this;
  bool has_zero = false;
  for (int i = 0; i < dim; ++i)
    if (block[i] == 0) has_zero = true;
  if (has_zero) {
    // Integral clocks become the smallest fractional block.
    for (int i = 0; i < dim; ++i)
      r.block[i] = block[i] == 0 ? 1 : block[i] + 1;
  } else {
    int m = num_blocks();
    for (int i = 0; i < dim; ++i) {
      if (block[i] == m) {
        r.iota[i] += 1;
        r.block[i] = 0;
      }
    }
  }
  return r;
}

std::vector<NRegion> NRegion::time_successors(int MN) const {
  std::vector<NRegion> chain;
  NRegion cur = *this;
  while (auto next = cur.time_successor(MN)) {
    chain.push_back(*next);
    cur = *next;
  }
  return chain;
}

NRegion NRegion::reset(const std::vector<bool>& resets) const {
  NRegion r = *this;
  for (size_t i = 0; i < iota.size(); ++i) {
    if (resets[i]) {
      r.iota[i] = 0;
      r.block[i] = 0;
    }
  }
  // Compress fractional block labels.
  std::vector<int> labels;
  for (int b : r.block)
    if (b > 0 && std::find(labels.begin(), labels.end(), b) == labels.end())
      labels.push_back(b);
  std::sort(labels.begin(), labels.end());
  for (auto& b : r.block)
    if (b > 0)
      b = 1 + (int)(std::find(labels.begin(), labels.end(), b) - labels.begin());
  return r;
}

std::vector<Vec> NRegion::corners() const {
  int m = num_blocks();
  std::vector<Vec> cs;
  for (int j = 0; j <= m; ++j) {
    Vec v(iota.size());
    for (size_t i = 0; i < iota.size(); ++i) {
      int up = (block[i] > j) ? 1 : 0;
      v[i] = Rat(iota[i] + up, N);
    }
    cs.push_back(std::move(v));
  }
  return cs;
}

std::string NRegion::to_string(const std::vector<std::string>& names) const {
  std::ostringstream os;
  int m = num_blocks();
  os << "{";
  bool first = true;
  for (size_t i = 0; i < iota.size(); ++i) {
    if (!first) os << ", ";
    first = false;
    const std::string& x = i < names.size() ? names[i] : "x" + std::to_string(i);
    if (block[i] == 0)
      os << x << "=" << rat_to_string(Rat(iota[i], N));
    else
      os << rat_to_string(Rat(iota[i], N)) << "<" << x << "<"
         << rat_to_string(Rat(iota[i] + 1, N));
  }
  if (m > 1) {
    os << "; frac order:";
    for (int b = 1; b <= m; ++b) {
      os << " ";
      for (size_t i = 0; i < iota.size(); ++i)
        if (block[i] == b)
          os << (i < names.size() ? names[i] : "x" + std::to_string(i));
    }
  }
  os << "}";
  return os.str();
}

std::vector<NRegion> all_regions(int dim, const Rat& M, int N) {
  int MN = (int)(rat_num(M) * N).convert_to<long long>();
  std::vector<NRegion> result;
  std::vector<int> iota(dim), block(dim);
  std::function<void(int)> rec_block = [&](int i) {
    if (i == dim) {
      // Canonical block labelling: labels 1..m all used.
      int m = 0;
      for (int b : block) m = std::max(m, b);
      std::vector<bool> used(m + 1, false);
      for (int b : block) used[b] = true;
      for (int b = 1; b <= m; ++b)
        if (!used[b]) return;
      for (int k = 0; k < dim; ++k)
        if (block[k] > 0 && iota[k] >= MN) return;  // fractional above bound
      NRegion r;
      r.N = N;
      r.iota = iota;
      r.block = block;
      result.push_back(std::move(r));
      return;
    }
    for (int b = 0; b <= dim; ++b) {
      block[i] = b;
      rec_block(i + 1);
    }
  };
  std::function<void(int)> rec_iota = [&](int i) {
    if (i == dim) {
      rec_block(0);
      return;
    }
    for (int v = 0; v <= MN; ++v) {
      iota[i] = v;
      rec_iota(i + 1);
    }
  };
  rec_iota(0);
  return result;
}

// --------------------------------------------------------------------- RGame

int RGame::find_state(int loc, const NRegion& r) const {
  for (size_t i = 0; i < states.size(); ++i)
    if (states[i].loc == loc && states[i].region == r) return (int)i;
  return -1;
}

void RGame::rebuild_out() {
  out.assign(states.size(), {});
  for (size_t i = 0; i < transitions.size(); ++i)
    out[transitions[i].src].push_back((int)i);
}

Int RGame::max_abs_weight() const {
  Int w = 0;
  for (const auto& t : transitions) w = std::max(w, abs(t.weight));
  for (const auto& s : states) w = std::max(w, abs(s.rate));
  return w;
}

RGame build_region_game(const WTG& g, int N) {
  RGame rg;
  rg.dim = g.dim();
  rg.M = g.clock_bound;
  rg.N = N;
  rg.clock_names = g.clocks;
  int MN = (int)(rat_num(g.clock_bound) * N).convert_to<long long>();

  std::map<std::pair<int, NRegion>, int> index;
  std::deque<int> queue;
  auto intern = [&](int loc, const NRegion& r) {
    auto key = std::make_pair(loc, r);
    auto it = index.find(key);
    if (it != index.end()) return it->second;
    RGameState s;
    s.loc = loc;
    s.name = g.locations[loc].id + " " + r.to_string(g.clocks);
    s.owner = g.locations[loc].owner;
    s.rate = g.locations[loc].rate;
    s.target = g.locations[loc].target;
    s.region = r;
    if (s.target) s.wT = g.final_weights.at(loc);
    int id = (int)rg.states.size();
    rg.states.push_back(std::move(s));
    index.emplace(key, id);
    queue.push_back(id);
    return id;
  };

  NRegion r0 = NRegion::of(Vec(g.dim(), Rat(0)), N, g.clock_bound);
  rg.initial = intern(g.initial, r0);
  while (!queue.empty()) {
    int sid = queue.front();
    queue.pop_front();
    // Snapshot: `intern` may reallocate rg.states.
    int loc = rg.states[sid].loc;
    NRegion region = rg.states[sid].region;
    if (g.locations[loc].target) continue;
    std::vector<NRegion> reach{region};
    for (auto& s : region.time_successors(MN)) reach.push_back(s);
    for (int ti : g.transitions_from(loc)) {
      const Transition& t = g.transitions[ti];
      for (const auto& via : reach) {
        if (!t.guard.satisfied(via.representative())) continue;
        NRegion dst_region = via.reset(t.resets);
        int dst = intern(t.to, dst_region);
        RGameTransition rt;
        rt.src = sid;
        rt.dst = dst;
        rt.via = via;
        rt.resets = t.resets;
        rt.weight = t.weight;
        rt.orig_transition = ti;
        rg.transitions.push_back(std::move(rt));
      }
    }
  }
  rg.rebuild_out();
  for (size_t i = 0; i < rg.states.size(); ++i) {
    if (!rg.states[i].target && rg.out[i].empty())
      throw GameError(GameErrorCode::Deadlock,
                      "deadlocked non-target state " + rg.states[i].name);
  }
  return rg;
}

RGame refine_rgame(const RGame& rg, int factor) {
  if (factor <= 1) return rg;
  RGame fine;
  fine.dim = rg.dim;
  fine.M = rg.M;
  fine.N = rg.N * factor;
  fine.clock_names = rg.clock_names;
  int MN = (int)(rat_num(fine.M) * fine.N).convert_to<long long>();

  std::vector<NRegion> fine_regions = all_regions(rg.dim, rg.M, fine.N);
  std::map<std::pair<int, NRegion>, int> index;  // (coarse state, fine region)
  std::vector<std::vector<std::pair<NRegion, int>>> parts(rg.states.size());
  for (size_t si = 0; si < rg.states.size(); ++si) {
    const auto& s = rg.states[si];
    for (const auto& fr : fine_regions) {
      if (!s.region.contains(fr.representative())) continue;
      RGameState ns = s;
      ns.region = fr;
      ns.name = s.name + " / " + fr.to_string(rg.clock_names);
      ns.base_state = (int)si;
      int id = (int)fine.states.size();
      fine.states.push_back(std::move(ns));
      index.emplace(std::make_pair((int)si, fr), id);
      parts[si].push_back({fr, id});
    }
  }
  for (size_t ti = 0; ti < rg.transitions.size(); ++ti) {
    const auto& t = rg.transitions[ti];
    for (const auto& [src_fr, src_id] : parts[t.src]) {
      std::vector<NRegion> reach{src_fr};
      for (auto& s : src_fr.time_successors(MN)) reach.push_back(s);
      for (const auto& via : reach) {
        if (!t.via.contains(via.representative())) continue;
        NRegion dst_fr = via.reset(t.resets);
        auto it = index.find(std::make_pair(t.dst, dst_fr));
        if (it == index.end()) continue;  // cannot happen for valid games
        RGameTransition nt;
        nt.src = src_id;
        nt.dst = it->second;
        nt.via = via;
        nt.resets = t.resets;
        nt.weight = t.weight;
        nt.orig_transition = t.orig_transition;
        nt.base_transition = (int)ti;
        fine.transitions.push_back(std::move(nt));
      }
    }
  }
  fine.rebuild_out();
  // The initial fine state: the one containing the coarse representative.
  fine.initial = 0;
  for (const auto& [fr, id] : parts[rg.initial]) {
    if (fr.contains(rg.states[rg.initial].region.representative()))
      fine.initial = id;
  }
  return fine;
}

// --------------------------------------------------------------- corner game

ExtRat eval_limit_in_region(const PWLFunction& f, const Vec& at,
                            const Cell& region_cell) {
  for (const auto& p : f.pieces()) {
    if (!p.cell.closure_contains(at)) continue;
    Cell inter = p.cell.intersect(region_cell);
    if (inter.vertices().empty()) continue;
    return p.val.eval(at);
  }
  // Fall back to any piece whose closure contains the point.
  for (const auto& p : f.pieces())
    if (p.cell.closure_contains(at)) return p.val.eval(at);
  throw std::domain_error("eval_limit_in_region: point outside domain");
}

int CornerGame::vertex_index(int rstate, int corner) const {
  for (size_t i = 0; i < vertices.size(); ++i)
    if (vertices[i].rstate == rstate && vertices[i].corner == corner)
      return (int)i;
  return -1;
}

CornerGame build_corner_game(const RGame& rg) {
  CornerGame cg;
  std::vector<int> first_vertex(rg.states.size());
  for (size_t si = 0; si < rg.states.size(); ++si) {
    first_vertex[si] = (int)cg.vertices.size();
    auto cs = rg.states[si].region.corners();
    Cell rc = rg.states[si].region.cell();
    for (size_t ci = 0; ci < cs.size(); ++ci) {
      CornerGame::Vertex v;
      v.rstate = (int)si;
      v.corner = (int)ci;
      v.coords = cs[ci];
      v.owner = rg.states[si].owner;
      v.target = rg.states[si].target;
      if (v.target) v.final = eval_limit_in_region(rg.states[si].wT, v.coords, rc);
      cg.vertices.push_back(std::move(v));
    }
  }
  for (size_t ti = 0; ti < rg.transitions.size(); ++ti) {
    const auto& t = rg.transitions[ti];
    auto src_corners = rg.states[t.src].region.corners();
    auto via_corners = t.via.corners();
    auto dst_corners = rg.states[t.dst].region.corners();
    for (size_t a = 0; a < src_corners.size(); ++a) {
      for (size_t b = 0; b < via_corners.size(); ++b) {
        // Non-spuriousness: the via corner must be a diagonal time shift of
        // the source corner.
        bool ok = true;
        Rat d = rg.dim > 0 ? Rat(via_corners[b][0] - src_corners[a][0]) : Rat(0);
        for (int i = 0; i < rg.dim; ++i)
          if (via_corners[b][i] - src_corners[a][i] != d) { ok = false; break; }
        if (!ok || d < 0) continue;
        Vec arrival = via_corners[b];
        for (int i = 0; i < rg.dim; ++i)
          if (t.resets[i]) arrival[i] = 0;
        int dst_corner = -1;
        for (size_t c2 = 0; c2 < dst_corners.size(); ++c2)
          if (dst_corners[c2] == arrival) { dst_corner = (int)c2; break; }
        if (dst_corner < 0) continue;  // cannot happen
        CornerGame::Edge e;
        e.src = first_vertex[t.src] + (int)a;
        e.dst = first_vertex[t.dst] + dst_corner;
        e.weight = d * Rat(rg.states[t.src].rate) + Rat(t.weight);
        e.rtrans = (int)ti;
        cg.edges.push_back(std::move(e));
      }
    }
  }
  cg.out.assign(cg.vertices.size(), {});
  for (size_t i = 0; i < cg.edges.size(); ++i)
    cg.out[cg.edges[i].src].push_back((int)i);
  return cg;
}

// ----------------------------------------------------------------------- DOT

std::string region_game_dot(const RGame& rg) {
  std::ostringstream os;
  os << "digraph region_game {\n";
  for (size_t i = 0; i < rg.states.size(); ++i) {
    const auto& s = rg.states[i];
    os << "  s" << i << " [label=\"" << s.name << "\" shape="
       << (s.target ? "doublecircle" : s.owner == Owner::Min ? "circle" : "box")
       << "];\n";
  }
  for (const auto& t : rg.transitions) {
    os << "  s" << t.src << " -> s" << t.dst << " [label=\"" << t.weight
       << " via " << t.via.to_string(rg.clock_names) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

std::string corner_game_dot(const RGame& rg, const CornerGame& cg) {
  std::ostringstream os;
  os << "digraph corner_game {\n";
  for (size_t i = 0; i < cg.vertices.size(); ++i) {
    const auto& v = cg.vertices[i];
    os << "  c" << i << " [label=\"" << rg.states[v.rstate].name << " @ (";
    for (size_t k = 0; k < v.coords.size(); ++k)
      os << (k ? "," : "") << rat_to_string(v.coords[k]);
    os << ")";
    if (v.target) os << " wT=" << v.final.to_string();
    os << "\" shape="
       << (v.target ? "doublecircle" : v.owner == Owner::Min ? "circle" : "box")
       << "];\n";
  }
  for (const auto& e : cg.edges) {
    os << "  c" << e.src << " -> c" << e.dst << " [label=\""
       << rat_to_string(e.weight) << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace wtg
