#include "wtg/report.hpp"

#include <sstream>

namespace wtg {

using nlohmann::json;

std::string render_rat(const Rat& r, const RenderOptions& opt) {
  return opt.decimals < 0 ? rat_to_string(r) : rat_to_decimal(r, opt.decimals);
}

json ext_rat_json(const ExtRat& v, const RenderOptions& opt) {
  if (v.is_plus_inf()) return "+inf";
  if (v.is_minus_inf()) return "-inf";
  return render_rat(v.value(), opt);
}

json affine_json(const AffineExpr& e, const std::vector<std::string>& clocks,
                 const RenderOptions& opt) {
  json coeffs = json::object();
  for (int i = 0; i < e.dim(); ++i)
    if (e.a[i] != 0) coeffs[clocks[i]] = render_rat(e.a[i], opt);
  return json{{"coeffs", coeffs}, {"const", render_rat(e.b, opt)},
              {"text", e.to_string(clocks)}};
}

json cell_json(const Cell& c, const std::vector<std::string>& clocks,
               const RenderOptions& opt) {
  json cons = json::array();
  for (const auto& lc : c.cons()) {
    json j = affine_json(lc.e, clocks, opt);
    j["op"] = lc.strict ? ">" : ">=";
    cons.push_back(std::move(j));
  }
  return cons;
}

json pwl_json(const PWLFunction& f, const std::vector<std::string>& clocks,
              const RenderOptions& opt) {
  json pieces = json::array();
  for (const auto& p : f.pieces()) {
    json j;
    j["cell"] = cell_json(p.cell, clocks, opt);
    if (p.val.is_finite())
      j["affine"] = affine_json(p.val.f, clocks, opt);
    else
      j["affine"] = p.val.kind == ExtRat::PlusInf ? "+inf" : "-inf";
    pieces.push_back(std::move(j));
  }
  return pieces;
}

json value_map_json(const RGame& rg, const ValueMap& v,
                    const RenderOptions& opt) {
  json out = json::array();
  for (size_t s = 0; s < rg.states.size(); ++s) {
    json j;
    j["state"] = rg.states[s].name;
    j["region"] = rg.states[s].region.to_string(rg.clock_names);
    j["target"] = rg.states[s].target;
    j["value"] = pwl_json(v[s], rg.clock_names, opt);
    out.push_back(std::move(j));
  }
  return out;
}

json divergence_json(const RGame& rg, const DivergenceReport& rep) {
  json sccs = json::array();
  for (const auto& scc : rep.sccs.sccs) {
    json j;
    j["class"] = scc.has_cycle ? scc_class_name(scc.cls) : "acyclic";
    j["has_cycle"] = scc.has_cycle;
    json states = json::array();
    for (int s : scc.states) states.push_back(rg.states[s].name);
    j["states"] = std::move(states);
    sccs.push_back(std::move(j));
  }
  json out;
  out["almost_divergent"] = rep.almost_divergent;
  out["divergent"] = rep.divergent;
  out["sccs"] = std::move(sccs);
  if (rep.mixed_witness) {
    json w = json::array();
    for (int s : rep.sccs.sccs[*rep.mixed_witness].states)
      w.push_back(rg.states[s].name);
    out["mixed_witness"] = std::move(w);
  }
  return out;
}

json infinity_json(const RGame& rg, const InfinityReport& rep) {
  json plus = json::array(), minus = json::array();
  for (size_t s = 0; s < rg.states.size(); ++s) {
    if (rep.plus_inf[s]) plus.push_back(rg.states[s].name);
    if (rep.minus_inf[s]) minus.push_back(rg.states[s].name);
  }
  return json{{"plus_inf", std::move(plus)},
              {"minus_inf", std::move(minus)},
              {"buchi_rounds", rep.buchi_rounds}};
}

json kernel_json(const RGame& rg, const Kernel& k) {
  json states = json::array(), trans = json::array();
  for (size_t s = 0; s < rg.states.size(); ++s)
    if (k.states[s]) states.push_back(rg.states[s].name);
  for (size_t t = 0; t < rg.transitions.size(); ++t)
    if (k.transitions[t]) {
      const auto& tr = rg.transitions[t];
      trans.push_back(rg.states[tr.src].name + " -> " +
                      rg.states[tr.dst].name);
    }
  return json{{"states", std::move(states)},
              {"transitions", std::move(trans)}};
}

json certificate_json(const HorizonCertificate& cert,
                      const RenderOptions& opt) {
  json out;
  out["epsilon"] = render_rat(cert.eps, opt);
  out["gamma_occ"] = cert.gamma_occ.str();
  json pk = json::array();
  for (size_t i = 0; i < cert.kernel_P.size(); ++i)
    pk.push_back(json{{"N", cert.kernel_N[i].str()},
                      {"P_K", cert.kernel_P[i].str()}});
  out["kernels"] = std::move(pk);
  json ps = json::array();
  for (const auto& p : cert.scc_P) ps.push_back(p.str());
  out["scc_P"] = std::move(ps);
  out["total_P"] = cert.total_P.str();
  return out;
}

ExtRat value_at_location(const RGame& rg, const ValueMap& v, int loc,
                         const Vec& nu) {
  for (size_t s = 0; s < rg.states.size(); ++s) {
    if (rg.states[s].loc != loc) continue;
    if (rg.states[s].region.contains(nu)) return value_at(rg, v, (int)s, nu);
  }
  for (size_t s = 0; s < rg.states.size(); ++s) {
    if (rg.states[s].loc != loc) continue;
    if (rg.states[s].region.cell().closure_contains(nu))
      return value_at(rg, v, (int)s, nu);
  }
  throw std::domain_error("no region state covers the requested valuation");
}

std::string csv_slice(const RGame& rg, const ValueMap& v, int loc,
                      int param_clock, const Vec& fixed, int steps,
                      const RenderOptions& opt) {
  std::ostringstream os;
  os << "param,value\n";
  RenderOptions dec = opt;
  if (dec.decimals < 0) dec.decimals = 6;
  for (int i = 0; i <= steps; ++i) {
    Rat x = rg.M * Rat(Int(i)) / Rat(Int(steps));
    Vec nu = fixed;
    nu[param_clock] = x;
    ExtRat val;
    try {
      val = value_at_location(rg, v, loc, nu);
    } catch (const std::domain_error&) {
      continue;
    }
    os << render_rat(x, dec) << ",";
    if (val.is_finite())
      os << render_rat(val.value(), dec);
    else
      os << (val.is_plus_inf() ? "+inf" : "-inf");
    os << "\n";
  }
  return os.str();
}

}  // namespace wtg
