#include "wtg/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace wtg {

using nlohmann::json;

// --------------------------------------------------------------------- Guard

bool Guard::satisfied(const Vec& nu) const {
  for (const auto& c : constraints) {
    const Rat& v = nu[c.clock];
    switch (c.op) {
      case Cmp::Lt: if (!(v < c.constant)) return false; break;
      case Cmp::Le: if (!(v <= c.constant)) return false; break;
      case Cmp::Eq: if (!(v == c.constant)) return false; break;
      case Cmp::Ge: if (!(v >= c.constant)) return false; break;
      case Cmp::Gt: if (!(v > c.constant)) return false; break;
    }
  }
  return true;
}

Guard Guard::closed() const {
  Guard g = *this;
  for (auto& c : g.constraints) {
    if (c.op == Cmp::Lt) c.op = Cmp::Le;
    if (c.op == Cmp::Gt) c.op = Cmp::Ge;
  }
  return g;
}

Cell Guard::cell(int dim, const Rat& M) const {
  Cell c = Cell::box(dim, M);
  for (const auto& a : constraints) {
    AffineExpr up(dim), down(dim);
    up.a[a.clock] = -1;          // constant - x
    up.b = a.constant;
    down.a[a.clock] = 1;         // x - constant
    down.b = -a.constant;
    switch (a.op) {
      case Cmp::Lt: c.add(LinCon(up, true)); break;
      case Cmp::Le: c.add(LinCon(up, false)); break;
      case Cmp::Eq:
        c.add(LinCon(up, false));
        c.add(LinCon(down, false));
        break;
      case Cmp::Ge: c.add(LinCon(down, false)); break;
      case Cmp::Gt: c.add(LinCon(down, true)); break;
    }
  }
  return c;
}

// ----------------------------------------------------------------------- WTG

int WTG::clock_index(const std::string& name) const {
  for (size_t i = 0; i < clocks.size(); ++i)
    if (clocks[i] == name) return (int)i;
  throw GameError(GameErrorCode::UnknownClock, "unknown clock: " + name);
}

int WTG::location_index(const std::string& id) const {
  for (size_t i = 0; i < locations.size(); ++i)
    if (locations[i].id == id) return (int)i;
  throw GameError(GameErrorCode::UnknownLocation, "unknown location: " + id);
}

std::vector<int> WTG::transitions_from(int loc) const {
  std::vector<int> out;
  for (size_t i = 0; i < transitions.size(); ++i)
    if (transitions[i].from == loc) out.push_back((int)i);
  return out;
}

void WTG::compute_stats() {
  w_max_L = 0;
  w_max_T = 0;
  for (const auto& l : locations) w_max_L = std::max(w_max_L, abs(l.rate));
  for (const auto& t : transitions) w_max_T = std::max(w_max_T, abs(t.weight));
  w_max_e = rat_num(clock_bound) * w_max_L + w_max_T;
}

void WTG::validate() const {
  if (locations.empty())
    throw GameError(GameErrorCode::NoLocations, "no locations");
  if (clock_bound <= 0 || rat_den(clock_bound) != 1)
    throw GameError(GameErrorCode::ClockBoundRequired,
                    "clock bound required (positive integer)");
  for (const auto& l : locations) {
    if (l.target && l.owner != Owner::Min)
      throw GameError(GameErrorCode::TargetOwnedByMax,
                      "target location " + l.id + " must belong to Min");
  }
  for (const auto& t : transitions) {
    if (locations[t.from].target)
      throw GameError(GameErrorCode::TargetOutgoing,
                      "target location " + locations[t.from].id +
                          " has an outgoing transition");
    for (const auto& a : t.guard.constraints) {
      if (rat_den(a.constant) != 1)
        throw GameError(GameErrorCode::NonIntegerConstant,
                        "non-integer guard constant " + rat_to_string(a.constant));
      if (a.constant > clock_bound)
        throw GameError(GameErrorCode::UnboundedClock,
                        "guard constant " + rat_to_string(a.constant) +
                            " exceeds the clock bound");
    }
  }
  for (const auto& [loc, fw] : final_weights) {
    if (!locations[loc].target)
      throw GameError(GameErrorCode::BadFinalWeight,
                      "final weight on non-target " + locations[loc].id);
    (void)fw;
  }
}

// ------------------------------------------------------------------- parsing

namespace {

Rat parse_rat_json(const json& j, const char* what) {
  if (j.is_number_integer()) return Rat((long long)j.get<long long>());
  if (j.is_string()) {
    auto r = parse_rat(j.get<std::string>());
    if (r) return *r;
  }
  if (j.is_number_float()) {
    auto r = parse_rat(std::to_string(j.get<double>()));
    if (r) return *r;
  }
  throw GameError(GameErrorCode::Syntax,
                  std::string("cannot parse rational for ") + what);
}

Cmp parse_op(const std::string& s) {
  if (s == "<") return Cmp::Lt;
  if (s == "<=") return Cmp::Le;
  if (s == "=" || s == "==") return Cmp::Eq;
  if (s == ">=") return Cmp::Ge;
  if (s == ">") return Cmp::Gt;
  throw GameError(GameErrorCode::Syntax, "bad comparator: " + s);
}

std::string op_to_string(Cmp c) {
  switch (c) {
    case Cmp::Lt: return "<";
    case Cmp::Le: return "<=";
    case Cmp::Eq: return "=";
    case Cmp::Ge: return ">=";
    default: return ">";
  }
}

Guard parse_guard(const WTG& g, const json& j) {
  Guard guard;
  for (const auto& a : j) {
    AtomicConstraint c;
    c.clock = g.clock_index(a.at("clock").get<std::string>());
    c.op = parse_op(a.at("op").get<std::string>());
    c.constant = parse_rat_json(a.at("const"), "guard constant");
    guard.constraints.push_back(c);
  }
  return guard;
}

PWLFunction parse_final_weight(const WTG& g, const json& j) {
  const int dim = g.dim();
  Cell box = Cell::box(dim, g.clock_bound);
  if (j.is_string()) {
    std::string s = j.get<std::string>();
    if (s == "+inf") return PWLFunction::constant(box, ExtRat::plus_inf());
    if (s == "-inf") return PWLFunction::constant(box, ExtRat::minus_inf());
    return PWLFunction::constant(box, ExtRat(parse_rat_json(j, "final weight")));
  }
  if (j.is_number())
    return PWLFunction::constant(box, ExtRat(parse_rat_json(j, "final weight")));
  if (!j.is_array())
    throw GameError(GameErrorCode::BadFinalWeight, "bad final weight spec");
  PWLFunction f(dim);
  for (const auto& piece : j) {
    Cell cell = box;
    if (piece.contains("cell")) {
      Guard guard;
      for (const auto& a : piece.at("cell")) {
        AtomicConstraint c;
        c.clock = g.clock_index(a.at("clock").get<std::string>());
        c.op = parse_op(a.at("op").get<std::string>());
        c.constant = parse_rat_json(a.at("const"), "cell constant");
        guard.constraints.push_back(c);
      }
      cell = guard.cell(dim, g.clock_bound);
    }
    const auto& aff = piece.at("affine");
    AffineExpr e(dim);
    for (auto it = aff.begin(); it != aff.end(); ++it) {
      if (it.key() == "const")
        e.b = parse_rat_json(it.value(), "affine constant");
      else
        e.a[g.clock_index(it.key())] = parse_rat_json(it.value(), "affine coeff");
    }
    f.add_piece({std::move(cell), ExtAffine::finite(std::move(e))});
  }
  return f;
}

}  // namespace

WTG parse_game(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw GameError(GameErrorCode::Syntax,
                    std::string("JSON syntax error: ") + e.what());
  }
  WTG g;
  try {
    if (!j.contains("clock_bound"))
      throw GameError(GameErrorCode::ClockBoundRequired, "clock bound required");
    g.clock_bound = parse_rat_json(j.at("clock_bound"), "clock_bound");
    for (const auto& c : j.at("clocks")) g.clocks.push_back(c.get<std::string>());
    if (!j.contains("locations") || j.at("locations").empty())
      throw GameError(GameErrorCode::NoLocations, "no locations");
    for (const auto& l : j.at("locations")) {
      Location loc;
      loc.id = l.at("id").get<std::string>();
      std::string owner = l.at("owner").get<std::string>();
      if (owner != "min" && owner != "max")
        throw GameError(GameErrorCode::Syntax, "owner must be min or max");
      loc.owner = owner == "min" ? Owner::Min : Owner::Max;
      if (l.contains("rate")) {
        Rat r = parse_rat_json(l.at("rate"), "rate");
        if (rat_den(r) != 1)
          throw GameError(GameErrorCode::NonIntegerConstant, "non-integer rate");
        loc.rate = rat_num(r);
      }
      loc.target = l.value("target", false);
      g.locations.push_back(std::move(loc));
    }
    for (const auto& t : j.value("transitions", json::array())) {
      Transition tr;
      tr.from = g.location_index(t.at("from").get<std::string>());
      tr.to = g.location_index(t.at("to").get<std::string>());
      tr.guard = parse_guard(g, t.value("guard", json::array()));
      tr.resets = std::vector<bool>(g.dim(), false);
      for (const auto& r : t.value("resets", json::array()))
        tr.resets[g.clock_index(r.get<std::string>())] = true;
      if (t.contains("weight")) {
        Rat w = parse_rat_json(t.at("weight"), "weight");
        if (rat_den(w) != 1)
          throw GameError(GameErrorCode::NonIntegerConstant,
                          "non-integer transition weight");
        tr.weight = rat_num(w);
      }
      g.transitions.push_back(std::move(tr));
    }
    json finals = j.value("final_weights", json::object());
    for (auto it = finals.begin(); it != finals.end(); ++it) {
      int loc = g.location_index(it.key());
      g.final_weights.emplace(loc, parse_final_weight(g, it.value()));
    }
    // Targets without explicit final weight default to the constant 0.
    for (size_t i = 0; i < g.locations.size(); ++i) {
      if (g.locations[i].target && !g.final_weights.count((int)i))
        g.final_weights.emplace(
            (int)i, PWLFunction::constant(Cell::box(g.dim(), g.clock_bound),
                                          ExtRat(Rat(0))));
    }
    if (j.contains("initial"))
      g.initial = g.location_index(j.at("initial").get<std::string>());
  } catch (const json::exception& e) {
    throw GameError(GameErrorCode::Syntax,
                    std::string("malformed game document: ") + e.what());
  }
  g.validate();
  g.compute_stats();
  return g;
}

std::string serialize_game(const WTG& g) {
  json j;
  j["clocks"] = g.clocks;
  j["clock_bound"] = (long long)rat_num(g.clock_bound).convert_to<long long>();
  j["initial"] = g.locations[g.initial].id;
  json locs = json::array();
  for (const auto& l : g.locations) {
    json jl;
    jl["id"] = l.id;
    jl["owner"] = l.owner == Owner::Min ? "min" : "max";
    jl["rate"] = l.rate.convert_to<long long>();
    jl["target"] = l.target;
    locs.push_back(jl);
  }
  j["locations"] = locs;
  json trs = json::array();
  for (const auto& t : g.transitions) {
    json jt;
    jt["from"] = g.locations[t.from].id;
    jt["to"] = g.locations[t.to].id;
    json guard = json::array();
    for (const auto& a : t.guard.constraints) {
      guard.push_back({{"clock", g.clocks[a.clock]},
                       {"op", op_to_string(a.op)},
                       {"const", rat_to_string(a.constant)}});
    }
    jt["guard"] = guard;
    json rs = json::array();
    for (int i = 0; i < g.dim(); ++i)
      if (t.resets[i]) rs.push_back(g.clocks[i]);
    jt["resets"] = rs;
    jt["weight"] = t.weight.convert_to<long long>();
    trs.push_back(jt);
  }
  j["transitions"] = trs;
  json fw = json::object();
  for (const auto& [loc, f] : g.final_weights) {
    // Constant functions serialize compactly.
    bool constant = true;
    for (const auto& p : f.pieces())
      if (!p.val.is_finite() || !p.val.f.is_constant()) constant = false;
    if (f.pieces().size() == 1 && !f.pieces()[0].val.is_finite()) {
      fw[g.locations[loc].id] =
          f.pieces()[0].val.kind == ExtRat::PlusInf ? "+inf" : "-inf";
    } else if (constant && f.pieces().size() == 1) {
      fw[g.locations[loc].id] = rat_to_string(f.pieces()[0].val.f.b);
    } else {
      json arr = json::array();
      for (const auto& p : f.pieces()) {
        json jp;
        json cell = json::array();
        // Cells are emitted as generic inequality lists; parse_final_weight
        // only consumes per-clock atoms, so only emit those (final weights
        // parsed from input are always of that shape).
        for (const auto& con : p.cell.cons()) {
          int nz = -1, count = 0;
          for (int i = 0; i < g.dim(); ++i)
            if (con.e.a[i] != 0) { nz = i; ++count; }
          if (count != 1) continue;
          Rat c = Rat(-con.e.b / con.e.a[nz]);
          Cmp op = con.e.a[nz] > 0 ? (con.strict ? Cmp::Gt : Cmp::Ge)
                                   : (con.strict ? Cmp::Lt : Cmp::Le);
          cell.push_back({{"clock", g.clocks[nz]},
                          {"op", op_to_string(op)},
                          {"const", rat_to_string(c)}});
        }
        jp["cell"] = cell;
        json aff = json::object();
        for (int i = 0; i < g.dim(); ++i)
          if (p.val.f.a[i] != 0) aff[g.clocks[i]] = rat_to_string(p.val.f.a[i]);
        aff["const"] = rat_to_string(p.val.f.b);
        jp["affine"] = aff;
        arr.push_back(jp);
      }
      fw[g.locations[loc].id] = arr;
    }
  }
  j["final_weights"] = fw;
  return j.dump(2);
}

// ----------------------------------------------------------------- semantics

std::pair<Config, Rat> edge_successor(const WTG& g, const Config& c,
                                      const Rat& delay, int transition) {
  if (delay < 0)
    throw GameError(GameErrorCode::EdgeDisabled, "negative delay");
  const Transition& t = g.transitions[transition];
  if (t.from != c.location)
    throw GameError(GameErrorCode::EdgeDisabled, "transition not from here");
  Vec after = c.valuation;
  for (auto& v : after) v += delay;
  for (const auto& v : after)
    if (v > g.clock_bound)
      throw GameError(GameErrorCode::EdgeDisabled, "edge not enabled (bound)");
  if (!t.guard.satisfied(after))
    throw GameError(GameErrorCode::EdgeDisabled, "edge not enabled");
  Config next;
  next.location = t.to;
  next.valuation = after;
  for (int i = 0; i < g.dim(); ++i)
    if (t.resets[i]) next.valuation[i] = 0;
  Rat w = delay * Rat(g.locations[c.location].rate) + Rat(t.weight);
  return {next, w};
}

Rat play_cumulated_weight(const WTG& g, const Play& play) {
  Config cur = play.start;
  Rat total(0);
  for (const auto& m : play.moves) {
    auto [next, w] = edge_successor(g, cur, m.delay, m.transition);
    total += w;
    cur = next;
  }
  return total;
}

ExtRat play_weight(const WTG& g, const Play& play) {
  Config cur = play.start;
  Rat total(0);
  for (const auto& m : play.moves) {
    auto [next, w] = edge_successor(g, cur, m.delay, m.transition);
    total += w;
    cur = next;
  }
  if (!g.locations[cur.location].target) return ExtRat::plus_inf();
  return ExtRat(total) + g.final_weights.at(cur.location).eval(cur.valuation);
}

}  // namespace wtg
