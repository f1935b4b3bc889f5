// Plane-curve carrier and curve builders: invariants, concatenation and
// reversal algebra, CSV round trips, arc-length resampling, the model curves
// gamma/kappa/sigma/omega, and the horizontal lift against independent
// quadrature.
#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "srlab/builders.hpp"
#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/lift.hpp"
#include "srlab/structure.hpp"

namespace {

using namespace srlab;

PlaneCurve curve_of(std::initializer_list<double> params,
                    std::initializer_list<Vec2> points) {
  PlaneCurve c;
  c.params = params;
  c.points = points;
  return c;
}

TEST(Curves, ValidateRejectsBrokenCarriers) {
  EXPECT_THROW(validate(PlaneCurve{}), domain_error);
  EXPECT_THROW(validate(curve_of({0.0}, {{0.0, 0.0}})), domain_error);
  // Non-increasing parameters.
  EXPECT_THROW(
      validate(curve_of({0.0, 0.0}, {{0.0, 0.0}, {1.0, 0.0}})),
      domain_error);
  // Misaligned lengths.
  PlaneCurve c = curve_of({0.0, 1.0}, {{0.0, 0.0}, {1.0, 0.0}});
  c.params.push_back(2.0);
  EXPECT_THROW(validate(c), domain_error);
  // Non-finite sample.
  EXPECT_THROW(
      validate(curve_of({0.0, 1.0}, {{0.0, 0.0}, {std::nan(""), 0.0}})),
      domain_error);
}

TEST(Curves, LengthOfElementaryPolylines) {
  // 3-4-5 triangle hypotenuse.
  EXPECT_DOUBLE_EQ(
      polyline_length(curve_of({0.0, 1.0}, {{0.0, 0.0}, {3.0, 4.0}})), 5.0);
  // Unit square boundary.
  const PlaneCurve sq = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.0, 0.0}});
  EXPECT_DOUBLE_EQ(polyline_length(sq), 4.0);
  EXPECT_TRUE(is_closed(sq));
  EXPECT_FALSE(is_closed(curve_of({0.0, 1.0}, {{0.0, 0.0}, {1.0, 0.0}})));
}

TEST(Curves, ConcatSharesTheJunctionNodeAndShiftsParameters) {
  const PlaneCurve a = curve_of({0.0, 2.0}, {{0.0, 0.0}, {1.0, 0.0}});
  const PlaneCurve b = curve_of({5.0, 6.0}, {{1.0, 0.0}, {1.0, 1.0}});
  const PlaneCurve ab = concat(a, b);
  ASSERT_EQ(ab.size(), 3u);
  EXPECT_DOUBLE_EQ(ab.params[0], 0.0);
  EXPECT_DOUBLE_EQ(ab.params[1], 2.0);
  EXPECT_DOUBLE_EQ(ab.params[2], 3.0);  // 6 shifted by 2 - 5
  EXPECT_DOUBLE_EQ(polyline_length(ab), 2.0);

  const PlaneCurve far = curve_of({0.0, 1.0}, {{1.0, 1e-12}, {2.0, 0.0}});
  EXPECT_THROW(concat(a, far), construction_error);
}

TEST(Curves, ReverseIsAnInvolutionOnTheSameInterval) {
  const PlaneCurve c = curve_of({0.25, 0.5, 2.0},
                                {{0.0, 0.0}, {1.0, 2.0}, {3.0, -1.0}});
  const PlaneCurve r = reverse(c);
  ASSERT_EQ(r.size(), 3u);
  EXPECT_DOUBLE_EQ(r.params.front(), 0.25);
  EXPECT_DOUBLE_EQ(r.params.back(), 2.0);
  EXPECT_DOUBLE_EQ(r.points[0].x1, 3.0);
  EXPECT_DOUBLE_EQ(r.points[2].x2, 0.0);
  EXPECT_DOUBLE_EQ(polyline_length(r), polyline_length(c));
  const PlaneCurve rr = reverse(r);
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(rr.params[i], c.params[i]);
    EXPECT_EQ(rr.points[i].x1, c.points[i].x1);
    EXPECT_EQ(rr.points[i].x2, c.points[i].x2);
  }
}

TEST(Curves, CsvRoundTripIsBitExact) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve c = make_gamma(1.0, +1, +1, s, 64);
  std::stringstream ss;
  write_curve_csv(ss, c);
  EXPECT_EQ(ss.str().substr(0, 8), "t,x1,x2\n");
  const PlaneCurve back = read_curve_csv(ss);
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.params[i], c.params[i]);
    EXPECT_EQ(back.points[i].x1, c.points[i].x1);
    EXPECT_EQ(back.points[i].x2, c.points[i].x2);
  }

  // With the lift column.
  const HorizontalLift lift = horizontal_lift(c, 0.5, s);
  std::stringstream ss3;
  write_curve_csv(ss3, c, &lift.x3);
  std::vector<double> x3_back;
  const PlaneCurve back3 = read_curve_csv(ss3, &x3_back);
  ASSERT_EQ(x3_back.size(), lift.x3.size());
  EXPECT_EQ(x3_back.front(), 0.5);
  EXPECT_EQ(x3_back.back(), lift.x3.back());

  std::stringstream empty;
  EXPECT_THROW(read_curve_csv(empty), domain_error);
}

TEST(Curves, ArclengthResamplingIsUniformAndEndpointExact) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve c = make_gamma(1.0, +1, +1, s, 2048);
  const std::size_t m = 200;
  const PlaneCurve r = resample_by_arclength(c, m);
  ASSERT_EQ(r.size(), m + 1);
  EXPECT_EQ(r.points.front().x1, c.points.front().x1);
  EXPECT_EQ(r.points.back().x1, c.points.back().x1);
  EXPECT_EQ(r.points.back().x2, c.points.back().x2);
  // Nodes sit at exact multiples of L/m of arclength along the source
  // polyline, so no straight chord can exceed its allotment L/m; it falls
  // short of it by about (turning angle)^2/24, which is largest near t = 0
  // where the curvature of (t^{3/2}, t) diverges like t^{-1/2} (about
  // 4.4e-4 relative for this mesh).  Resampling cannot lengthen a polyline.
  const double L = polyline_length(c);
  EXPECT_LE(polyline_length(r), L * (1.0 + 1e-15));
  double lo = 1e300, hi = 0.0;
  for (std::size_t i = 1; i < r.size(); ++i) {
    const double d = norm(r.points[i] - r.points[i - 1]);
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  EXPECT_LE(hi, L / m * (1.0 + 1e-12));
  EXPECT_GT(lo, L / m * (1.0 - 1e-3));
}

TEST(Curves, GammaPointBranchesAndSigns) {
  const StructureDef s23 = StructureDef::polynomial(2, 3, 2);  // b > a: q=1.5
  const Vec2 p = gamma_point(0.25, +1, +1, s23);
  EXPECT_DOUBLE_EQ(p.x1, 0.125);  // t^q = 0.25^1.5
  EXPECT_DOUBLE_EQ(p.x2, 0.25);
  // The point lies on {P = 0}: x1^2 = x2^3.
  EXPECT_NEAR(eval_P(p.x1, p.x2, s23), 0.0, 1e-16);

  const StructureDef s32 = StructureDef::polynomial(3, 2, 2);  // a > b
  const Vec2 q = gamma_point(0.25, +1, +1, s32);
  EXPECT_DOUBLE_EQ(q.x1, 0.25);
  EXPECT_DOUBLE_EQ(q.x2, 0.125);

  // (-1)^a must equal (+1)^b on the locus: a=2 even works, a=3 odd cannot.
  EXPECT_NO_THROW(make_gamma(1.0, -1, +1, s23, 8));
  EXPECT_THROW(make_gamma(1.0, -1, +1, s32, 8), domain_error);
  EXPECT_THROW(make_gamma(1.0, 0, +1, s23, 8), domain_error);
  EXPECT_THROW(make_gamma(-1.0, +1, +1, s23, 8), domain_error);
  EXPECT_THROW(make_gamma(1.0, +1, +1, s23, 1), domain_error);
}

TEST(Curves, GammaMeshIsGradedAndOnTheLocus) {
  const StructureDef s = StructureDef::polynomial(3, 4, 2);
  const double eps = 0.75;
  const PlaneCurve g = make_gamma(eps, +1, +1, s, 256);
  ASSERT_EQ(g.size(), 257u);
  EXPECT_EQ(g.params.front(), 0.0);
  EXPECT_EQ(g.params.back(), eps);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double r = static_cast<double>(k) / 256.0;
    EXPECT_DOUBLE_EQ(g.params[k], eps * r * r);
    EXPECT_NEAR(eval_P(g.points[k].x1, g.points[k].x2, s), 0.0, 1e-15);
  }
}

TEST(Curves, KappaIsTheStraightChordWithSharedEndpoint) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  CompetitorParams cp;
  cp.eps = 1.0;
  cp.rho = 0.04;
  cp.delta = 1e-4;
  const PlaneCurve k = make_kappa(cp, s, 32);
  ASSERT_EQ(k.size(), 33u);
  EXPECT_EQ(k.points.front().x1, 0.0);
  const Vec2 end = gamma_point(cp.rho, +1, +1, s);
  EXPECT_EQ(k.points.back().x1, end.x1);
  EXPECT_EQ(k.points.back().x2, end.x2);
  EXPECT_NEAR(polyline_length(k), std::hypot(end.x1, end.x2), 1e-15);
}

TEST(Curves, SigmaIsAClosedRectangleOfKnownPerimeter) {
  CompetitorParams cp;
  cp.eps = 0.8;
  cp.rho = 0.1;
  cp.delta = 0.01;
  for (const StructureDef& s : {StructureDef::polynomial(2, 3, 2),
                                StructureDef::polynomial(3, 2, 2)}) {
    const PlaneCurve sig = make_sigma(cp, s, 16);
    EXPECT_TRUE(is_closed(sig, 0.0));  // start node reused bitwise
    const Vec2 A = gamma_point(cp.eps, +1, +1, s);
    EXPECT_EQ(sig.points.front().x1, A.x1);
    EXPECT_EQ(sig.points.front().x2, A.x2);
    const double perimeter = 2.0 * cp.delta * (std::fabs(A.x1) + std::fabs(A.x2));
    EXPECT_NEAR(polyline_length(sig), perimeter, 1e-14);
  }
}

TEST(Curves, OmegaSharesGammaTailNodesBitwise) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  CompetitorParams cp;
  cp.eps = 1.0;
  cp.rho = 0.05;
  cp.delta = 1e-5;
  const PlaneCurve gamma = make_gamma(cp.eps, +1, +1, s, 512);
  const PlaneCurve omega = make_omega_on(gamma, cp, s);
  // Every gamma node with t > rho appears in omega verbatim.
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma.params[i] <= cp.rho) continue;
    bool found = false;
    for (std::size_t j = 0; j < omega.size(); ++j) {
      if (omega.points[j].x1 == gamma.points[i].x1 &&
          omega.points[j].x2 == gamma.points[i].x2) {
        found = true;
        break;
      }
    }
    EXPECT_TRUE(found) << "gamma node " << i << " missing from omega";
    hits += found;
  }
  // The quadratically graded mesh has t_k = (k/512)^2, so t_k > 0.05 means
  // k >= 115: exactly 398 of the 513 nodes lie beyond the cut.
  EXPECT_EQ(hits, 398u);
  // Endpoints: origin to gamma(eps).
  EXPECT_EQ(omega.points.front().x1, 0.0);
  const Vec2 A = gamma_point(cp.eps, +1, +1, s);
  EXPECT_EQ(omega.points.back().x1, A.x1);
  EXPECT_EQ(omega.points.back().x2, A.x2);
}

TEST(Curves, RegularityProbeSeparatesSmoothFromCusp) {
  // Second-derivative estimates of the arc-length parameterization stay
  // bounded along a circle but blow up toward the cusp of gamma for q = 1.5.
  PlaneCurve circle;
  const int n = 4096;
  for (int i = 0; i <= n; ++i) {
    const double th = 3.14159265358979323846 * i / n;
    circle.params.push_back(th);
    circle.points.push_back({std::cos(th), std::sin(th)});
  }
  const auto smooth = regularity_probe(circle, 2);
  for (const auto& [scale, deriv] : smooth) EXPECT_LT(deriv, 2.0);

  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const auto cusp = regularity_probe(make_gamma(1.0, +1, +1, s, 32768), 2);
  // |gamma''| ~ s^(q-2) = s^(-1/2): the estimate at the smallest usable
  // scale (last probe) dominates the one at the largest (first probe).
  EXPECT_GT(cusp.back().second, 4.0 * cusp.front().second);

  EXPECT_THROW(regularity_probe(circle, 0), domain_error);
  EXPECT_THROW(regularity_probe(make_gamma(1.0, +1, +1, s, 8), 3),
               resolution_error);
}

// -- horizontal lift ----------------------------------------------------------

TEST(Lift, SegmentIncrementMatchesIndependentQuadrature) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const Vec2 p0{0.1, 0.2}, p1{0.7, 0.9};
  // x3' = psi(x) x2': parameterize the chord by u in [0,1].
  const long double ref = oracles::integrate(
      [&](long double u) -> long double {
        const long double x1 = 0.1L + u * 0.6L;
        const long double x2 = 0.2L + u * 0.7L;
        const long double P = x1 * x1 - x2 * x2 * x2;
        return P * P * 0.7L;
      },
      0.0L, 1.0L, 1e-19L);
  EXPECT_NEAR(segment_lift_increment(p0, p1, s), static_cast<double>(ref),
              1e-15);
}

TEST(Lift, ReversedSegmentCancelsBitwise) {
  const StructureDef s = StructureDef::polynomial(3, 4, 2);
  const Vec2 p0{0.37, 0.11}, p1{0.82, 0.64};
  const double fwd = segment_lift_increment(p0, p1, s);
  const double bwd = segment_lift_increment(p1, p0, s);
  EXPECT_EQ(fwd, -bwd);
  EXPECT_NE(fwd, 0.0);
  // Horizontal segments contribute nothing (density integrates against dx2).
  EXPECT_EQ(segment_lift_increment({0.1, 0.5}, {0.9, 0.5}, s), 0.0);
}

TEST(Lift, HorizontalLiftAccumulatesAndStartsWhereAsked) {
  const StructureDef s = StructureDef::heisenberg();
  // Straight segment (0,0) -> (1,1): x3 = int x1 dx2 = int_0^1 u du = 1/2.
  const PlaneCurve seg = curve_of({0.0, 1.0}, {{0.0, 0.0}, {1.0, 1.0}});
  const HorizontalLift l = horizontal_lift(seg, 2.0, s);
  EXPECT_DOUBLE_EQ(l.x3.front(), 2.0);
  EXPECT_NEAR(l.endpoint(), 2.5, 1e-15);
  EXPECT_NEAR(lift_increment(seg, s), 0.5, 1e-15);
}

TEST(Lift, ClosedLoopLiftEqualsWeightedAreaBySimpson) {
  // Rectangle [0.2, 0.5] x [0.1, 0.4], counter-clockwise: the lift equals
  // the integral of Q = dpsi/dx1 over the rectangle (Green).
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  PlaneCurve rect = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.2, 0.1}, {0.5, 0.1}, {0.5, 0.4}, {0.2, 0.4}, {0.2, 0.1}});
  const long double ref = oracles::integrate2d(
      [&](long double x, long double y) -> long double {
        const long double P = x * x - y * y * y;
        return 2.0L * 2.0L * x * P;  // c a x1^(a-1) P^(c-1)
      },
      0.2L, 0.5L, 0.1L, 0.4L, 1e-17L);
  EXPECT_NEAR(lift_increment(rect, s), static_cast<double>(ref), 1e-15);

  // Liu-Sussmann falls back to adaptive quadrature of psi/phi.
  const StructureDef ls = StructureDef::liu_sussmann();
  const long double ref_ls = oracles::integrate2d(
      [&](long double x, long double y) -> long double {
        (void)y;
        // d/dx ( x^2 / (1-x) ) = (2x - x^2) / (1-x)^2.
        const long double om = 1.0L - x;
        return (2.0L * x - x * x) / (om * om);
      },
      0.2L, 0.5L, 0.1L, 0.4L, 1e-17L);
  EXPECT_NEAR(lift_increment(rect, ls), static_cast<double>(ref_ls), 1e-12);

  // phi vanishes at x1 = 1: the density psi/phi is non-integrable across
  // the chord, and symmetric refinement around the pole would otherwise
  // settle on a principal-value artifact, so the lift must refuse.
  PlaneCurve across = curve_of({0.0, 1.0}, {{0.9, 0.0}, {1.1, 0.5}});
  EXPECT_THROW(lift_increment(across, ls), degenerate_structure_error);
  EXPECT_THROW(sr_length(across, ls), degenerate_structure_error);
}

TEST(Lift, SrLengthEqualsEuclideanLengthWherePhiIsOne) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve g = make_gamma(1.0, +1, +1, s, 1024);
  EXPECT_EQ(sr_length(g, s), polyline_length(g));
  // Liu-Sussmann reweights horizontal motion by 1/phi.
  const StructureDef ls = StructureDef::liu_sussmann();
  const PlaneCurve seg = curve_of({0.0, 1.0}, {{0.0, 0.3}, {0.5, 0.3}});
  // u1 = dx1/dt, speed = |u1| with X1 = d/dx1: the segment is horizontal
  // motion along X1 only, so its sr length is the Euclidean one.
  EXPECT_NEAR(sr_length(seg, ls), 0.5, 1e-12);
}

}  // namespace
