// Constructors for the curves of the length-minimality study: the candidate
// minimizer gamma, the straight cut kappa, the rectangle loop sigma, and the
// assembled competitor omega = kappa * gamma|[rho,eps] * sigma, plus a
// finite-difference regularity probe.
//
// All junction coordinates are produced by the single helper gamma_point, so
// concatenations meet bitwise and downstream difference computations cancel
// shared chords exactly.
#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"
#include "srlab/structure.hpp"

namespace srlab {

struct CompetitorParams {
  double eps = 1.0;
  double rho = 0.0;
  double delta = 0.0;
  double safety = 0.5;
};

inline void validate(const CompetitorParams& cp) {
  if (!(cp.eps > 0.0) || !std::isfinite(cp.eps))
    throw domain_error("eps must be positive");
  if (!(cp.rho > 0.0) || !(cp.rho < cp.eps))
    throw domain_error("rho must lie in (0, eps)");
  if (!(cp.delta > 0.0) || !(cp.delta < cp.eps))
    throw domain_error("delta must lie in (0, eps)");
  if (!(cp.safety > 0.0) || !(cp.safety < 1.0))
    throw domain_error("safety must lie in (0, 1)");
}

namespace detail {

inline int sign_pow(int sign, int n) { return (sign < 0 && n % 2) ? -1 : 1; }

inline void require_valid_signs(int sign1, int sign2, const StructureDef& s) {
  if ((sign1 != 1 && sign1 != -1) || (sign2 != 1 && sign2 != -1))
    throw domain_error("signs must be +1 or -1");
  // The curve stays on the zero locus only when sign1^a equals sign2^b.
  if (sign_pow(sign1, s.a()) != sign_pow(sign2, s.b()))
    throw domain_error("sign combination leaves the zero locus of P");
}

}  // namespace detail

// The point of gamma at parameter t >= 0: (sign1 t^q, sign2 t) when b >= a
// and (sign1 t, sign2 t^q) when a > b.  Every junction in this header is
// produced by this function, never recomputed by other expressions.
inline Vec2 gamma_point(double t, int sign1, int sign2,
                        const StructureDef& s) {
  const double tq = std::pow(t, s.q());
  if (s.b() >= s.a()) return {sign1 * tq, sign2 * t};
  return {sign1 * t, sign2 * tq};
}

// Candidate minimizer gamma on [0, eps], sampled on the graded mesh
// t_k = eps (k/n)^2 (the curvature of t -> t^q blows up at 0 for q < 2).
inline PlaneCurve make_gamma(double eps, int sign1, int sign2,
                             const StructureDef& s, std::size_t n = 4096) {
  detail::require_polynomial(s, "make_gamma");
  detail::require_valid_signs(sign1, sign2, s);
  if (!(eps > 0.0)) throw domain_error("eps must be positive");
  if (n < 2) throw domain_error("make_gamma needs n >= 2");
  PlaneCurve c;
  c.params.resize(n + 1);
  c.points.resize(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double r = static_cast<double>(k) / static_cast<double>(n);
    const double t = eps * r * r;
    c.params[k] = t;
    c.points[k] = gamma_point(t, sign1, sign2, s);
  }
  return c;
}

// Straight cut from the origin to gamma(rho); the final node is the shared
// closed-form junction bitwise.
inline PlaneCurve make_kappa(const CompetitorParams& cp, const StructureDef& s,
                             std::size_t n = 64) {
  detail::require_polynomial(s, "make_kappa");
  if (!(cp.rho > 0.0)) throw domain_error("rho must be positive");
  if (n < 1) throw domain_error("make_kappa needs n >= 1");
  const Vec2 end = gamma_point(cp.rho, +1, +1, s);
  PlaneCurve c;
  c.params.resize(n + 1);
  c.points.resize(n + 1);
  for (std::size_t j = 0; j <= n; ++j) {
    const double w = static_cast<double>(j) / static_cast<double>(n);
    c.params[j] = cp.rho * w;
    c.points[j] = {end.x1 * w, end.x2 * w};
  }
  c.points[n] = end;
  return c;
}

// Closed rectangle loop at gamma's endpoint.  For b > a the rectangle is
// (eps^q, eps) + [0, eps^q delta] x [-eps delta, 0], traced clockwise
// starting in direction (+1, 0); for a > b the mirrored rectangle
// (eps, eps^q) + [-eps delta, 0] x [0, eps^q delta] is traced
// counter-clockwise starting in direction (0, +1).  Either way the loop's
// winding is opposite to the cut region's and its length is
// 2 delta (eps + eps^q).
inline PlaneCurve make_sigma(const CompetitorParams& cp, const StructureDef& s,
                             std::size_t n_side = 64) {
  detail::require_polynomial(s, "make_sigma");
  if (!(cp.delta > 0.0)) throw domain_error("delta must be positive");
  if (n_side < 1) throw domain_error("make_sigma needs n_side >= 1");
  const Vec2 A = gamma_point(cp.eps, +1, +1, s);
  Vec2 corners[5];
  if (s.b() >= s.a()) {
    const double w = A.x1 * cp.delta;  // eps^q delta
    const double h = A.x2 * cp.delta;  // eps  delta
    corners[0] = A;
    corners[1] = {A.x1 + w, A.x2};
    corners[2] = {A.x1 + w, A.x2 - h};
    corners[3] = {A.x1, A.x2 - h};
    corners[4] = A;
  } else {
    const double w = A.x1 * cp.delta;  // eps  delta
    const double h = A.x2 * cp.delta;  // eps^q delta
    corners[0] = A;
    corners[1] = {A.x1, A.x2 + h};
    corners[2] = {A.x1 - w, A.x2 + h};
    corners[3] = {A.x1 - w, A.x2};
    corners[4] = A;
  }
  PlaneCurve c;
  c.params.push_back(0.0);
  c.points.push_back(corners[0]);
  CompensatedSum arc;
  for (int side = 0; side < 4; ++side) {
    const Vec2& p = corners[side];
    const Vec2& q = corners[side + 1];
    const double len = norm(q - p);
    for (std::size_t j = 1; j <= n_side; ++j) {
      const double w = static_cast<double>(j) / static_cast<double>(n_side);
      Vec2 pt = {p.x1 + w * (q.x1 - p.x1), p.x2 + w * (q.x2 - p.x2)};
      if (j == n_side) pt = q;
      arc.add(len / static_cast<double>(n_side));
      c.params.push_back(arc.value());
      c.points.push_back(pt);
    }
  }
  return c;
}

// gamma restricted to [rho, eps]: the exact junction gamma(rho) followed by
// the tail of base gamma nodes with t > rho.  Passing the same `gamma` to
// several consumers keeps every shared chord bitwise identical.
inline PlaneCurve slice_gamma_tail(const PlaneCurve& gamma, double rho,
                                   const StructureDef& s) {
  PlaneCurve part;
  part.params.push_back(rho);
  part.points.push_back(gamma_point(rho, +1, +1, s));
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma.params[i] > rho) {
      part.params.push_back(gamma.params[i]);
      part.points.push_back(gamma.points[i]);
    }
  }
  if (part.size() < 2)
    throw construction_error("no gamma nodes beyond rho = " + fmt17(rho));
  return part;
}

// The competitor omega = kappa * gamma|[rho,eps] * sigma.
inline PlaneCurve make_omega(const CompetitorParams& cp, const StructureDef& s,
                             std::size_t n = 4096) {
  detail::require_polynomial(s, "make_omega");
  validate(cp);
  const PlaneCurve gamma = make_gamma(cp.eps, +1, +1, s, n);
  return concat(concat(make_kappa(cp, s), slice_gamma_tail(gamma, cp.rho, s)),
                make_sigma(cp, s));
}

// Same, reusing an already built gamma (whose nodes the middle piece shares).
inline PlaneCurve make_omega_on(const PlaneCurve& gamma,
                                const CompetitorParams& cp,
                                const StructureDef& s) {
  detail::require_polynomial(s, "make_omega");
  validate(cp);
  return concat(concat(make_kappa(cp, s), slice_gamma_tail(gamma, cp.rho, s)),
                make_sigma(cp, s));
}

// -- regularity probe -------------------------------------------------------

namespace detail {

// Point on the polyline at arc length s (linear in arc length per chord).
inline Vec2 point_at_arclength(const PlaneCurve& c,
                               const std::vector<double>& cum, double s) {
  const auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t i =
      it == cum.begin() ? 0 : static_cast<std::size_t>(it - cum.begin()) - 1;
  i = std::min(i, cum.size() - 2);
  const double ds = cum[i + 1] - cum[i];
  const double w = ds > 0.0 ? (s - cum[i]) / ds : 0.0;
  return {c.points[i].x1 + w * (c.points[i + 1].x1 - c.points[i].x1),
          c.points[i].x2 + w * (c.points[i + 1].x2 - c.points[i].x2)};
}

}  // namespace detail

// Centered finite-difference estimates of the k-th derivative magnitude of
// the arc-length parameterization near the start of the curve, on a
// geometric grid of arc-length scales.  Diagnostic: the estimates expose the
// C^{floor(q)} but not C^{floor(q)+1} behaviour of the cusp at 0.
inline std::vector<std::pair<double, double>> regularity_probe(
    const PlaneCurve& curve, int k) {
  validate(curve);
  if (k < 1) throw domain_error("derivative order must be >= 1");
  if (curve.size() < 4 * static_cast<std::size_t>(k + 1))
    throw resolution_error("curve mesh too coarse for derivative order " +
                           std::to_string(k));
  const std::vector<double> cum = cumulative_chord_length(curve);
  const double S = cum.back();
  std::vector<std::pair<double, double>> probes;
  for (int j = 4; j <= 16; ++j) {
    const double scale = S * std::ldexp(1.0, -j);  // S * 2^-j
    const double h = scale / (2.0 * k);
    // Stencil nodes must stay separated by a few mesh cells near the probe
    // location, else the piecewise-linear interpolation dominates.
    const double lo = scale - 0.5 * k * h;
    const auto it = std::upper_bound(cum.begin(), cum.end(), lo);
    const std::size_t seg = it == cum.begin()
                                ? 0
                                : static_cast<std::size_t>(it - cum.begin()) -
                                      1;
    const double mesh = cum[std::min(seg + 1, cum.size() - 1)] - cum[seg];
    if (h < 3.0 * mesh || lo <= 0.0) continue;
    CompensatedSum f1, f2;
    for (int i = 0; i <= k; ++i) {
      const double coeff = (i % 2 ? -1.0 : 1.0) * binomial(k, i);
      const double si = scale + (0.5 * k - i) * h;
      const Vec2 p = detail::point_at_arclength(curve, cum, si);
      f1.add(coeff * p.x1);
      f2.add(coeff * p.x2);
    }
    const double hk = powi(h, k);
    probes.emplace_back(scale, std::hypot(f1.value(), f2.value()) / hk);
  }
  if (probes.size() < 4)
    throw resolution_error(
        "curve mesh supports fewer than four probe scales for order " +
        std::to_string(k));
  return probes;
}

}  // namespace srlab
