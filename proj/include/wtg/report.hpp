#pragma once

// JSON rendering of analysis verdicts, value maps, and certificates for the
// CLI run report.  Deterministic: identical inputs yield identical JSON
// (timing fields are added separately by the CLI and excluded from
// comparisons).

#include <json.hpp>

#include "wtg/analysis.hpp"
#include "wtg/approx.hpp"
#include "wtg/timed.hpp"

namespace wtg {

// Rendering options: decimals < 0 emits exact "p/q" strings, otherwise
// decimal strings rounded to that many places.
struct RenderOptions {
  int decimals = -1;
};

std::string render_rat(const Rat& r, const RenderOptions& opt = {});
nlohmann::json ext_rat_json(const ExtRat& v, const RenderOptions& opt = {});
nlohmann::json affine_json(const AffineExpr& e,
                           const std::vector<std::string>& clocks,
                           const RenderOptions& opt = {});
nlohmann::json cell_json(const Cell& c, const std::vector<std::string>& clocks,
                         const RenderOptions& opt = {});
nlohmann::json pwl_json(const PWLFunction& f,
                        const std::vector<std::string>& clocks,
                        const RenderOptions& opt = {});
nlohmann::json value_map_json(const RGame& rg, const ValueMap& v,
                              const RenderOptions& opt = {});
nlohmann::json divergence_json(const RGame& rg, const DivergenceReport& rep);
nlohmann::json infinity_json(const RGame& rg, const InfinityReport& rep);
nlohmann::json kernel_json(const RGame& rg, const Kernel& k);
nlohmann::json certificate_json(const HorizonCertificate& cert,
                                const RenderOptions& opt = {});

// Value at (location, valuation): picks the region state containing `nu`
// (or, on borders, a state whose region closure contains it and takes the
// one-sided limit).
ExtRat value_at_location(const RGame& rg, const ValueMap& v, int loc,
                         const Vec& nu);

// CSV slice of a value function: fix all clocks except `param_clock` to the
// given values, sample the parameter over [0, M] at the given steps count.
std::string csv_slice(const RGame& rg, const ValueMap& v, int loc,
                      int param_clock, const Vec& fixed, int steps,
                      const RenderOptions& opt = {});

}  // namespace wtg
