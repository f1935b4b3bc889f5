// Horizontal lifts and sub-Riemannian length of sampled plane curves.
//
// A plane curve w determines a unique horizontal space curve through
//   x3(t) = x3(0) + integral of w2' psi(w)/phi(w) dt,
// and its length is the integral of sqrt(w1'^2 + (w2'/phi)^2) dt.  On a
// straight mesh chord the polynomial-family density is a polynomial of
// degree c*max(a,b) in the chord parameter, so one 8-point Gauss-Legendre
// panel integrates it exactly whenever that degree stays within the rule's
// exactness (15); higher degrees and non-polynomial densities fall back to
// adaptive panels.
#pragma once

#include <cmath>
#include <vector>

#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"
#include "srlab/structure.hpp"

namespace srlab {

struct HorizontalLift {
  PlaneCurve base;
  std::vector<double> x3;  // aligned with base.params
  double x3_start = 0.0;

  double endpoint() const { return x3.back(); }
};

namespace detail {

constexpr double kPhiFloor = 1e-9;

inline double lift_density(double x1, double x2, const StructureDef& s) {
  if (s.is_polynomial()) {  // phi == 1
    return powi(eval_P(x1, x2, s), s.c());
  }
  const FieldValues f = eval_fields({x1, x2, 0.0}, s);
  if (std::fabs(f.phi) < kPhiFloor)
    throw degenerate_structure_error(
        "phi vanishes along the curve (|phi| < 1e-9) at x1 = " + fmt17(x1));
  return f.psi / f.phi;
}

// Degree of the lift density restricted to an affine chord, or -1 when it
// is not a polynomial there (phi non-constant).
inline int lift_poly_degree(const StructureDef& s) {
  switch (s.kind()) {
    case StructureKind::polynomial:
      return s.c() * std::max(s.a(), s.b());
    case StructureKind::heisenberg:
      return 1;
    case StructureKind::martinet:
      return 2;
    case StructureKind::liu_sussmann:
      return -1;
  }
  return -1;
}

// An interior zero of phi makes the lift density non-integrable across the
// chord.  phi is affine along straight chords for every built-in structure,
// so an interior zero always shows up as a sign change (or a zero) at the
// endpoints.  Adaptive refinement alone cannot be trusted to notice: the two
// branches of psi/phi nearly cancel around the pole and the panel estimates
// settle on a finite principal-value artifact.
inline void require_phi_nonvanishing(const Vec2& a, const Vec2& b,
                                     const StructureDef& s) {
  const double pa = eval_fields({a.x1, a.x2, 0.0}, s).phi;
  const double pb = eval_fields({b.x1, b.x2, 0.0}, s).phi;
  if (pa * pb <= 0.0 || std::min(std::fabs(pa), std::fabs(pb)) < kPhiFloor)
    throw degenerate_structure_error(
        "phi vanishes on the chord from x1 = " + fmt17(a.x1) +
        " to x1 = " + fmt17(b.x1));
}

// Unit-parameter integral of density(p0 + u (p1 - p0)) over one mesh
// interval, adaptive GL8 (the fallback for non-polynomial densities).
template <typename Density>
double segment_unit_integral(const Vec2& p0, const Vec2& p1, Density&& f) {
  const auto g = [&](double u) {
    return f(p0.x1 + u * (p1.x1 - p0.x1), p0.x2 + u * (p1.x2 - p0.x2));
  };
  const double whole = gl8_panel(g, 0.0, 1.0);
  const double tol = 1e-12 * std::fabs(whole);
  return integrate_adaptive(g, 0.0, 1.0, tol);
}

}  // namespace detail

// x3-increment contributed by the straight segment p0 -> p1.  The segment is
// evaluated in a canonical orientation and negated on reversed traversal, so
// a chord and its reversal contribute exactly opposite values; closed curves
// retracing shared chords cancel bitwise.
inline double segment_lift_increment(const Vec2& p0, const Vec2& p1,
                                     const StructureDef& s) {
  const double dx2 = p1.x2 - p0.x2;
  if (dx2 == 0.0) return 0.0;
  const bool flip = (p1.x2 < p0.x2) || (p1.x2 == p0.x2 && p1.x1 < p0.x1);
  const Vec2& a = flip ? p1 : p0;
  const Vec2& b = flip ? p0 : p1;
  const int deg = detail::lift_poly_degree(s);
  double unit;
  if (deg >= 0 && deg <= 15) {
    // One panel is exact; adaptivity would only chase the rounding noise of
    // the near-cancelling evaluations of P close to its zero set.
    unit = gl8_panel(
        [&](double u) {
          return detail::lift_density(a.x1 + u * (b.x1 - a.x1),
                                      a.x2 + u * (b.x2 - a.x2), s);
        },
        0.0, 1.0);
  } else {
    if (!s.is_polynomial()) detail::require_phi_nonvanishing(a, b, s);
    unit = detail::segment_unit_integral(a, b, [&](double x, double y) {
      return detail::lift_density(x, y, s);
    });
  }
  const double inc = (b.x2 - a.x2) * unit;
  return flip ? -inc : inc;
}

inline HorizontalLift horizontal_lift(const PlaneCurve& c, double x3_start,
                                      const StructureDef& s) {
  validate(c);
  HorizontalLift out;
  out.base = c;
  out.x3_start = x3_start;
  out.x3.resize(c.size());
  out.x3[0] = x3_start;
  CompensatedSum acc;
  acc.add(x3_start);
  for (std::size_t i = 1; i < c.size(); ++i) {
    acc.add(segment_lift_increment(c.points[i - 1], c.points[i], s));
    out.x3[i] = acc.value();
  }
  return out;
}

// Total x3-increment of the curve (the constraint integral when starting at
// zero), without materializing the per-node lift.
inline double lift_increment(const PlaneCurve& c, const StructureDef& s) {
  validate(c);
  CompensatedSum acc;
  for (std::size_t i = 1; i < c.size(); ++i)
    acc.add(segment_lift_increment(c.points[i - 1], c.points[i], s));
  return acc.value();
}

// Sub-Riemannian length.  For phi == 1 this is the Euclidean polyline length
// (bitwise: the piecewise-linear speed is constant per segment), so the two
// notions agree exactly where the theory says they coincide.
inline double sr_length(const PlaneCurve& c, const StructureDef& s) {
  validate(c);
  if (s.kind() != StructureKind::liu_sussmann) return polyline_length(c);
  CompensatedSum acc;
  for (std::size_t i = 1; i < c.size(); ++i) {
    const Vec2& p0 = c.points[i - 1];
    const Vec2& p1 = c.points[i];
    detail::require_phi_nonvanishing(p0, p1, s);
    const double dx1 = p1.x1 - p0.x1, dx2 = p1.x2 - p0.x2;
    acc.add(detail::segment_unit_integral(p0, p1, [&](double x, double y) {
      const FieldValues f = eval_fields({x, y, 0.0}, s);
      if (std::fabs(f.phi) < detail::kPhiFloor)
        throw degenerate_structure_error(
            "phi vanishes along the curve (|phi| < 1e-9) at x1 = " + fmt17(x));
      return std::hypot(dx1, dx2 / f.phi);
    }));
  }
  return acc.value();
}

}  // namespace srlab
