#include "wtg/timed.hpp"

#include <algorithm>

namespace wtg {

ValueMap initial_value_map(const RGame& rg) {
  ValueMap v(rg.states.size());
  for (size_t i = 0; i < rg.states.size(); ++i) {
    const auto& s = rg.states[i];
    Cell cell = s.region.cell();
    if (s.target) {
      v[i] = s.wT.restrict_to(cell);
    } else {
      v[i] = PWLFunction::constant(cell, ExtRat::plus_inf());
    }
  }
  return v;
}

PWLFunction transition_value(const RGame& rg, const RGameTransition& t,
                             const PWLFunction& vdest) {
  const auto& src = rg.states[t.src];
  bool is_min = src.owner == Owner::Min;
  Rat rate(src.rate);
  Cell domain = src.region.cell();
  Cell delay_set = t.via.cell();
  return opt_delay(is_min, rate, delay_set, t.resets, Rat(t.weight), vdest,
                   domain);
}

namespace {

void enforce_cap(const PWLFunction& f, size_t piece_cap,
                 const std::string& state_name) {
  if (f.piece_count() > piece_cap)
    throw GameError(GameErrorCode::PieceCapExceeded,
                    "piece cap exceeded at state " + state_name + ": " +
                        std::to_string(f.piece_count()) + " pieces");
}

}  // namespace

PWLFunction state_one_step(const RGame& rg, int s, const ValueMap& v,
                           size_t piece_cap) {
  const auto& st = rg.states[s];
  Cell cell = st.region.cell();
  if (st.target) return st.wT.restrict_to(cell);
  bool is_min = st.owner == Owner::Min;
  PWLFunction acc;
  bool first = true;
  for (int ti : rg.out[s]) {
    PWLFunction cand = transition_value(rg, rg.transitions[ti], v[rg.transitions[ti].dst]);
    if (first) {
      acc = std::move(cand);
      first = false;
    } else {
      acc = is_min ? pwl_min(acc, cand) : pwl_max(acc, cand);
    }
    enforce_cap(acc, piece_cap, st.name);
  }
  if (first)  // no outgoing transitions: value stays +infinity
    return PWLFunction::constant(cell, ExtRat::plus_inf());
  acc.merge_pieces();
  enforce_cap(acc, piece_cap, st.name);
  return acc;
}

ValueMap apply_F(const RGame& rg, const ValueMap& v, size_t piece_cap) {
  ValueMap next(rg.states.size());
  for (size_t s = 0; s < rg.states.size(); ++s)
    next[s] = state_one_step(rg, (int)s, v, piece_cap);
  return next;
}

IterationResult value_iteration(const RGame& rg, long horizon,
                                size_t piece_cap, bool stop_on_fixpoint) {
  IterationResult res;
  res.values = initial_value_map(rg);
  for (long k = 0; k < horizon; ++k) {
    ValueMap next = apply_F(rg, res.values, piece_cap);
    ++res.steps;
    size_t total = 0;
    for (const auto& f : next) total += f.piece_count();
    res.piece_counts.push_back(total);
    bool same = true;
    for (size_t s = 0; s < next.size() && same; ++s)
      same = pwl_equal(next[s], res.values[s]);
    res.values = std::move(next);
    if (same) {
      res.stabilized = true;
      if (stop_on_fixpoint) break;
    }
  }
  return res;
}

ValueMap solve_acyclic(const RGame& rg, size_t piece_cap) {
  int n = (int)rg.states.size();
  // Kahn topological sort on the region graph; a leftover means a cycle.
  std::vector<int> indeg(n, 0);
  for (const auto& t : rg.transitions) ++indeg[t.dst];
  std::vector<int> order, queue;
  for (int s = 0; s < n; ++s)
    if (indeg[s] == 0) queue.push_back(s);
  while (!queue.empty()) {
    int s = queue.back();
    queue.pop_back();
    order.push_back(s);
    for (int ti : rg.out[s])
      if (--indeg[rg.transitions[ti].dst] == 0)
        queue.push_back(rg.transitions[ti].dst);
  }
  if ((int)order.size() != n)
    throw GameError(GameErrorCode::NotAcyclic,
                    "solve_acyclic: the region game has a cycle");
  ValueMap v = initial_value_map(rg);
  for (auto it = order.rbegin(); it != order.rend(); ++it)
    v[*it] = state_one_step(rg, *it, v, piece_cap);
  return v;
}

ExtRat value_at(const RGame& rg, const ValueMap& v, int state, const Vec& nu) {
  auto direct = v[state].try_eval(nu);
  if (direct) return *direct;
  return eval_limit_in_region(v[state], nu, rg.states[state].region.cell());
}

}  // namespace wtg
