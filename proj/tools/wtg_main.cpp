// Command-line front end: parsing, analysis, solving, report emission.
//
// Verbs: check, infinite, kernel, solve-acyclic, iterate, approx, export-dot.
// Output is one deterministic JSON report on stdout (the "timing" field is
// informational and excluded from determinism comparisons).
// Exit codes: 0 ok, 1 parse/IO, 2 validation, 3 not almost-divergent,
// 4 -infinity obstruction (symbolic), 5 piece cap exceeded.

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include "wtg/approx.hpp"
#include "wtg/report.hpp"

using nlohmann::json;
using namespace wtg;

namespace {

int code_of(GameErrorCode c) {
  switch (c) {
    case GameErrorCode::Syntax: return 1;
    case GameErrorCode::NotAlmostDivergent: return 3;
    case GameErrorCode::MinusInfObstruction: return 4;
    case GameErrorCode::PieceCapExceeded: return 5;
    default: return 2;
  }
}

Rat parse_rat_arg(const std::string& s) {
  auto v = parse_rat(s);
  if (!v) throw GameError(GameErrorCode::Syntax, "bad rational: " + s);
  return *v;
}

WTG load_game(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw GameError(GameErrorCode::Syntax, "cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_game(buf.str());
}

Vec parse_valuation(const WTG& g, const std::vector<std::string>& pairs) {
  Vec nu(g.dim(), Rat(0));
  for (const auto& p : pairs) {
    auto eq = p.find('=');
    if (eq == std::string::npos)
      throw GameError(GameErrorCode::Syntax, "bad clock assignment: " + p);
    nu[g.clock_index(p.substr(0, eq))] = parse_rat_arg(p.substr(eq + 1));
  }
  return nu;
}

// "--at l0,x=0,y=1/2" -> (location index, valuation).
std::pair<int, Vec> parse_at(const WTG& g, const std::string& spec) {
  std::vector<std::string> parts;
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) parts.push_back(tok);
  if (parts.empty())
    throw GameError(GameErrorCode::Syntax, "--at requires a location");
  int loc = g.location_index(parts[0]);
  return {loc, parse_valuation(g, {parts.begin() + 1, parts.end()})};
}

struct SliceSpec {
  int loc = -1;
  int param_clock = -1;
  Vec fixed;
};

// "loc=l0,fix x=0" (the unfixed clock is the slice parameter).
SliceSpec parse_slice(const WTG& g, const std::string& spec) {
  SliceSpec s;
  s.fixed.assign(g.dim(), Rat(0));
  std::vector<bool> is_fixed(g.dim(), false);
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (tok.rfind("loc=", 0) == 0) {
      s.loc = g.location_index(tok.substr(4));
    } else if (tok.rfind("location=", 0) == 0) {
      s.loc = g.location_index(tok.substr(9));
    } else if (tok.rfind("fix ", 0) == 0) {
      auto eq = tok.find('=');
      if (eq == std::string::npos)
        throw GameError(GameErrorCode::Syntax, "bad slice fix: " + tok);
      int c = g.clock_index(tok.substr(4, eq - 4));
      s.fixed[c] = parse_rat_arg(tok.substr(eq + 1));
      is_fixed[c] = true;
    } else {
      throw GameError(GameErrorCode::Syntax, "bad slice token: " + tok);
    }
  }
  if (s.loc < 0)
    throw GameError(GameErrorCode::Syntax, "slice needs loc=<id>");
  for (int c = 0; c < g.dim(); ++c)
    if (!is_fixed[c]) {
      if (s.param_clock >= 0)
        throw GameError(GameErrorCode::Syntax,
                        "slice must fix all clocks but one");
      s.param_clock = c;
    }
  if (s.param_clock < 0)
    throw GameError(GameErrorCode::Syntax, "slice has no free clock");
  return s;
}

Rat sup_abs_final_weight(const RGame& rg) {
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

// Kernel cross-check: a transition is in the kernel iff it lies on a simple
// region cycle whose corner plays all weigh exactly 0.
json kernel_oracle_json(const RGame& rg, const CornerGame& cg,
                        const SccInfo& scc, const Kernel& kernel,
                        bool* agrees) {
  std::vector<bool> oracle(rg.transitions.size(), false);
  for (const auto& cyc : simple_cycles(rg, scc.states)) {
    auto b = corner_play_bounds(rg, cg, cyc);
    if (!b || !(b->first == 0 && b->second == 0)) continue;
    for (int ti : cyc) oracle[ti] = true;
  }
  json mism = json::array();
  for (size_t t = 0; t < rg.transitions.size(); ++t)
    if (oracle[t] != kernel.transitions[t])
      mism.push_back(rg.states[rg.transitions[t].src].name + " -> " +
                     rg.states[rg.transitions[t].dst].name);
  *agrees = mism.empty();
  return mism;
}

int run(int argc, char** argv) {
  CLI::App app{"weighted timed game solver"};
  app.require_subcommand(1);

  std::string file, at_spec, slice_spec, slice_out, emit_dot, method = "static";
  std::string eps_str, occ_str;
  int decimals = -1, granularity = 1, forced_N = 0;
  long horizon = -1;
  size_t piece_cap = 100000;
  bool oracle = false, corner_dot = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("file", file, "game file (JSON)")->required();
    sub->add_option("--decimals", decimals,
                    "render rationals as decimals with this precision");
    sub->add_option("--granularity", granularity, "region granularity 1/N");
    sub->add_option("--piece-cap", piece_cap, "max pieces per state");
    sub->add_option("--emit-dot", emit_dot, "write DOT export to this path");
  };

  auto* c_check = app.add_subcommand("check", "almost-divergence decision");
  add_common(c_check);
  auto* c_inf = app.add_subcommand("infinite", "+inf/-inf value regions");
  add_common(c_inf);
  auto* c_kernel = app.add_subcommand("kernel", "kernel extraction per SCC");
  add_common(c_kernel);
  c_kernel->add_flag("--oracle", oracle,
                     "cross-check kernels against the simple-cycle oracle");
  auto* c_acyclic =
      app.add_subcommand("solve-acyclic", "exact values of an acyclic game");
  add_common(c_acyclic);
  c_acyclic->add_option("--at", at_spec, "report the value at loc,clock=v,...");
  c_acyclic->add_option("--slice", slice_spec, "CSV slice loc=<id>,fix x=p/q");
  c_acyclic->add_option("--slice-out", slice_out, "write slice CSV here");
  auto* c_iter = app.add_subcommand("iterate", "bounded value iteration");
  add_common(c_iter);
  c_iter->add_option("--horizon", horizon, "number of F applications")
      ->required();
  c_iter->add_option("--at", at_spec, "report the value at loc,clock=v,...");
  c_iter->add_option("--slice", slice_spec, "CSV slice loc=<id>,fix x=p/q");
  c_iter->add_option("--slice-out", slice_out, "write slice CSV here");
  auto* c_approx = app.add_subcommand("approx", "epsilon-approximation");
  add_common(c_approx);
  c_approx->add_option("--epsilon", eps_str, "threshold (rational)")
      ->required();
  c_approx->add_option("--method", method, "static | symbolic");
  c_approx->add_option("--at", at_spec, "report the value at loc,clock=v,...");
  c_approx->add_option("--slice", slice_spec, "CSV slice loc=<id>,fix x=p/q");
  c_approx->add_option("--slice-out", slice_out, "write slice CSV here");
  c_approx->add_option("--force-kernel-N", forced_N,
                       "force the kernel granularity (testing)");
  c_approx->add_option("--horizon", horizon,
                       "symbolic: override the iteration horizon");
  c_approx->add_option(
      "--occurrence-bound", occ_str,
      "report semi-unfolding shapes at this manual bound (UNSOUND unless "
      "verified to dominate the computed bound)");
  auto* c_dot = app.add_subcommand("export-dot", "region/corner game DOT");
  add_common(c_dot);
  c_dot->add_flag("--corner", corner_dot, "export the corner game instead");

  CLI11_PARSE(app, argc, argv);
  auto t0 = std::chrono::steady_clock::now();

  json report;
  json warnings = json::array();
  {
    std::ostringstream cmd;
    for (int i = 0; i < argc; ++i) cmd << (i ? " " : "") << argv[i];
    report["command"] = cmd.str();
  }
  RenderOptions ropt{decimals};
  int exit_code = 0;

  WTG g = load_game(file);

  auto emit_slice = [&](const RGame& rg, const ValueMap& v) {
    if (slice_spec.empty()) return;
    SliceSpec s = parse_slice(g, slice_spec);
    std::string csv = csv_slice(rg, v, s.loc, s.param_clock, s.fixed,
                                64 * granularity, ropt);
    report["slices"] = json::array({json{{"spec", slice_spec}, {"csv", csv}}});
    if (!slice_out.empty()) {
      std::ofstream out(slice_out);
      out << csv;
    }
  };
  auto emit_at = [&](const RGame& rg, const ValueMap& v) {
    if (at_spec.empty()) return;
    auto [loc, nu] = parse_at(g, at_spec);
    report["at"] = at_spec;
    report["value"] = ext_rat_json(value_at_location(rg, v, loc, nu), ropt);
  };

  if (*c_check || *c_inf || *c_kernel) {
    RGame rg = build_region_game(g, granularity);
    CornerGame cg = build_corner_game(rg);
    DivergenceReport div = check_almost_divergent(rg, cg);
    report["check"] = divergence_json(rg, div);
    if (!div.almost_divergent) {
      if (*c_inf || *c_kernel)
        throw GameError(GameErrorCode::NotAlmostDivergent,
                        "game is not almost-divergent");
      exit_code = 3;
    } else {
      InfinityReport inf = compute_infinity(rg, cg, div);
      json ij = infinity_json(rg, inf);
      report["check"]["plus_inf"] = ij["plus_inf"];
      report["check"]["minus_inf"] = ij["minus_inf"];
      if (*c_inf) report["infinite"] = ij;
      if (inf.buchi_rounds > 4)
        warnings.push_back("Buchi fixpoint needed more than four rounds (" +
                           std::to_string(inf.buchi_rounds) + ")");
      if (*c_kernel) {
        json ks = json::array();
        for (const auto& scc : div.sccs.sccs) {
          if (!scc.has_cycle) continue;
          Kernel k = compute_kernel(scc, scc.cls, rg, cg);
          json kj = kernel_json(rg, k);
          kj["scc_class"] = scc_class_name(scc.cls);
          if (oracle) {
            bool agrees = false;
            kj["oracle_mismatches"] =
                kernel_oracle_json(rg, cg, scc, k, &agrees);
            kj["oracle_agrees"] = agrees;
          }
          ks.push_back(std::move(kj));
        }
        report["kernels"] = std::move(ks);
      }
    }
    if (!emit_dot.empty()) {
      std::ofstream out(emit_dot);
      out << region_game_dot(rg);
    }
  } else if (*c_acyclic) {
    RGame rg = build_region_game(g, granularity);
    ValueMap v = solve_acyclic(rg, piece_cap);
    report["values"] = value_map_json(rg, v, ropt);
    emit_at(rg, v);
    emit_slice(rg, v);
  } else if (*c_iter) {
    RGame rg = build_region_game(g, granularity);
    auto it = value_iteration(rg, horizon, piece_cap, false);
    report["steps"] = it.steps;
    report["stabilized"] = it.stabilized;
    report["piece_counts"] = it.piece_counts;
    report["values"] = value_map_json(rg, it.values, ropt);
    emit_at(rg, it.values);
    emit_slice(rg, it.values);
  } else if (*c_approx) {
    Rat eps = parse_rat_arg(eps_str);
    if (!(eps > 0))
      throw GameError(GameErrorCode::Syntax, "--epsilon must be positive");
    ApproxOptions opts;
    opts.forced_kernel_N = forced_N;
    opts.piece_cap = piece_cap;
    if (method == "static") {
      ApproxResult res = approximate_game(g, eps, opts);
      report["method"] = "static";
      report["check"] = divergence_json(res.rg, res.divergence);
      report["infinite"] = infinity_json(res.rg, res.infinity);
      json ks = json::array();
      for (const auto& k : res.kernels)
        ks.push_back(json{{"N", k.N},
                          {"kappa", render_rat(k.kappa, ropt)},
                          {"epsilon", render_rat(k.epsilon, ropt)},
                          {"forced", k.forced}});
      report["certificate"] = {
          {"kernels", std::move(ks)},
          {"gamma_occ",
           occurrence_bound(res.rg, sup_abs_final_weight(res.rg)).str()},
          {"scc_chain", res.scc_chain},
          {"epsilon_per_scc", render_rat(res.eps_per_scc, ropt)}};
      if (res.infinity.buchi_rounds > 4)
        warnings.push_back("Buchi fixpoint needed more than four rounds (" +
                           std::to_string(res.infinity.buchi_rounds) + ")");
      if (!occ_str.empty()) {
        warnings.push_back(
            "manual occurrence bound " + occ_str +
            ": UNSOUND unless verified to dominate the computed bound " +
            occurrence_bound(res.rg, sup_abs_final_weight(res.rg)).str());
        Int bound(occ_str);
        CornerGame cg = build_corner_game(res.rg);
        json shapes = json::array();
        for (const auto& scc : res.divergence.sccs.sccs) {
          if (!scc.has_cycle) continue;
          Kernel k = compute_kernel(scc, scc.cls, res.rg, cg);
          auto su = build_semi_unfolding(res.rg, scc, k, scc.states[0], bound);
          int stops = 0, kernels = 0;
          for (const auto& nd : su.nodes) {
            if (nd.kind == SemiUnfolding::Node::StopLeaf) ++stops;
            if (nd.kind == SemiUnfolding::Node::KernelNode) ++kernels;
          }
          shapes.push_back(json{{"entry", res.rg.states[scc.states[0]].name},
                                {"nodes", su.nodes.size()},
                                {"depth", su.depth},
                                {"kernel_nodes", kernels},
                                {"stop_leaves", stops}});
        }
        report["semi_unfoldings"] = std::move(shapes);
      }
      report["values"] = value_map_json(res.rg, res.values, ropt);
      emit_at(res.rg, res.values);
      emit_slice(res.rg, res.values);
    } else if (method == "symbolic") {
      std::optional<long> over;
      if (horizon >= 0) over = horizon;
      SymbolicResult res = approximate_symbolic(g, eps, over, opts);
      report["method"] = "symbolic";
      report["certificate"] = certificate_json(res.certificate, ropt);
      report["steps"] = res.steps;
      report["stabilized"] = res.stabilized;
      report["certificate_met"] = res.certificate_met;
      if (!res.certificate_met)
        warnings.push_back(
            "horizon below the certificate: result may be less precise than "
            "epsilon");
      report["values"] = value_map_json(res.rg, res.values, ropt);
      emit_at(res.rg, res.values);
      emit_slice(res.rg, res.values);
    } else {
      throw GameError(GameErrorCode::Syntax, "unknown method: " + method);
    }
  } else if (*c_dot) {
    RGame rg = build_region_game(g, granularity);
    std::string dot =
        corner_dot ? corner_game_dot(rg, build_corner_game(rg))
                   : region_game_dot(rg);
    if (!emit_dot.empty()) {
      std::ofstream out(emit_dot);
      out << dot;
    } else {
      report["dot"] = dot;
    }
  }

  report["warnings"] = std::move(warnings);
  auto t1 = std::chrono::steady_clock::now();
  report["timing"] = {
      {"total_ms",
       std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0)
           .count()}};
  std::cout << report.dump(2) << std::endl;
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const GameError& e) {
    json err{{"error", e.what()}, {"code", code_of(e.code)}};
    std::cout << err.dump(2) << std::endl;
    return code_of(e.code);
  } catch (const std::exception& e) {
    json err{{"error", e.what()}, {"code", 1}};
    std::cout << err.dump(2) << std::endl;
    return 1;
  }
}
