// JSON serialization for the report types, one document per report, keys in
// declaration order.  Doubles round-trip (shortest-exact form); absent
// optional values (NaN markers) are omitted rather than emitted as null.
#pragma once

#include <cmath>
#include <string>

#include "json.hpp"
#include "srlab/builders.hpp"
#include "srlab/competitor.hpp"
#include "srlab/optimizer.hpp"
#include "srlab/stokes.hpp"
#include "srlab/structure.hpp"
#include "srlab/sweep.hpp"

namespace srlab {

using ordered_json = nlohmann::ordered_json;

inline ordered_json to_json(const StructureDef& s) {
  ordered_json j;
  j["kind"] = to_string(s.kind());
  if (s.is_polynomial()) {
    j["a"] = s.a();
    j["b"] = s.b();
    j["c"] = s.c();
    j["q"] = s.q();
  }
  return j;
}

inline ordered_json to_json(const CriterionReport& r) {
  ordered_json j;
  j["constructible"] = r.constructible;
  j["margin"] = r.margin;
  j["branch"] = r.branch;
  return j;
}

inline ordered_json to_json(const CompetitorParams& cp) {
  ordered_json j;
  j["eps"] = cp.eps;
  j["rho"] = cp.rho;
  j["delta"] = cp.delta;
  j["safety"] = cp.safety;
  return j;
}

inline ordered_json to_json(const VerificationReport& r) {
  ordered_json j;
  j["rho"] = r.rho;
  j["delta"] = r.delta;
  j["eps"] = r.eps;
  j["L_gamma"] = r.L_gamma;
  j["L_omega"] = r.L_omega;
  j["gain_net"] = r.gain_net;
  j["constraint_residual"] = r.constraint_residual;
  j["endpoints_ok"] = r.endpoints_ok;
  if (!std::isnan(r.control_distance))
    j["control_distance"] = r.control_distance;
  return j;
}

inline ordered_json to_json(const WeightedAreaReport& r) {
  ordered_json j;
  ordered_json comps = ordered_json::array();
  for (const AreaComponent& c : r.components) {
    ordered_json jc;
    jc["winding"] = c.winding;
    jc["area_weighted"] = c.area_weighted;
    jc["sample_point"] = {c.sample_point.x1, c.sample_point.x2};
    comps.push_back(jc);
  }
  j["components"] = comps;
  j["total"] = r.total;
  j["line_integral"] = r.line_integral;
  return j;
}

inline ordered_json to_json(const OptimizationResult& r,
                            bool with_curve = false) {
  ordered_json j;
  j["length"] = r.length;
  if (!std::isnan(r.length_richardson))
    j["length_richardson"] = r.length_richardson;
  j["constraint_residual"] = r.constraint_residual;
  j["constraint_residual_exact"] = r.constraint_residual_exact;
  j["grad_norm"] = r.grad_norm;
  j["multiplier"] = r.multiplier;
  j["tol_c"] = r.tol_c;
  j["tol_g"] = r.tol_g;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["control_distance_to_gamma"] = r.control_distance_to_gamma;
  if (with_curve) {
    ordered_json pts = ordered_json::array();
    for (const Vec2& p : r.curve.points) pts.push_back({p.x1, p.x2});
    j["curve"] = pts;
  }
  return j;
}

inline ordered_json to_json(const MultistartResult& r,
                            bool with_curve = false) {
  ordered_json j;
  j["best"] = r.best_name;
  ordered_json runs = ordered_json::object();
  for (const LabeledRun& run : r.runs)
    runs[run.name] = to_json(run.result, with_curve && run.name == r.best_name);
  j["runs"] = runs;
  return j;
}

inline ordered_json to_json(const SweepRow& r) {
  ordered_json j;
  j["a"] = r.a;
  j["b"] = r.b;
  j["c"] = r.c;
  j["eps"] = r.eps;
  j["constructible"] = r.constructible;
  j["margin"] = r.margin;
  auto opt = [&j](const char* key, double v) {
    if (!std::isnan(v)) j[key] = v;
  };
  opt("rho", r.rho);
  opt("delta", r.delta);
  opt("L_gamma", r.L_gamma);
  opt("L_omega", r.L_omega);
  opt("gain_net", r.gain_net);
  opt("residual", r.residual);
  opt("optimizer_length", r.optimizer_length);
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

inline ordered_json to_json(const std::vector<SweepRow>& rows) {
  ordered_json j = ordered_json::array();
  for (const SweepRow& r : rows) j.push_back(to_json(r));
  return j;
}

}  // namespace srlab
