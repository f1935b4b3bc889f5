// Weighted-area machinery: closed forms for the cut and corner displacements
// against exact rationals and independent Simpson quadrature, winding
// numbers, and the component decomposition on loops whose areas are known.
#include <cmath>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "srlab/builders.hpp"
#include "srlab/competitor.hpp"
#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/lift.hpp"
#include "srlab/stokes.hpp"
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

// -- cut displacement ----------------------------------------------------------

TEST(Delta3Cut, ExactRationalMoments) {
  // int_0^1 (s^2 - s^3)^2 ds = 1/5 - 2/6 + 1/7 = 1/105.
  const StructureDef s232 = StructureDef::polynomial(2, 3, 2);
  EXPECT_NEAR(delta3_cut(1.0, s232), 1.0 / 105.0, 1e-13 / 105.0);
  // Symmetric in (a, b): swapping exponents keeps the moment, only the
  // rho-power changes; at rho = 1 the two agree exactly.
  const StructureDef s322 = StructureDef::polynomial(3, 2, 2);
  EXPECT_DOUBLE_EQ(delta3_cut(1.0, s322), delta3_cut(1.0, s232));
  // c = 3 goes through quadrature: int_0^1 s^6 (1-s)^3 ds = 6! 3! / 10!
  // = 1/840 (Beta(7, 4)), and the scale is rho^(c b + 1) = rho^10.
  const StructureDef s233 = StructureDef::polynomial(2, 3, 3);
  const double rho = 0.6;
  const double expected = std::pow(0.6, 10) / 840.0;
  EXPECT_NEAR(delta3_cut(rho, s233), expected, 1e-13 * expected);
}

TEST(Delta3Cut, AgreesWithIndependentQuadrature) {
  const double rho = 0.37;
  for (const auto& [a, b, c] :
       {std::array<int, 3>{2, 3, 2}, {3, 4, 2}, {4, 3, 2}, {2, 5, 3}}) {
    const StructureDef s = StructureDef::polynomial(a, b, c);
    const long double moment = oracles::integrate(
        [&](long double t) {
          long double ta = 1.0L, tb = 1.0L;
          for (int i = 0; i < a; ++i) ta *= t;
          for (int i = 0; i < b; ++i) tb *= t;
          long double d = std::fabs(ta - tb), p = 1.0L;
          for (int i = 0; i < c; ++i) p *= d;
          return p;
        },
        0.0L, 1.0L, 1e-19L);
    const long double power =
        (b >= a) ? std::pow((long double)rho, (long double)(c * b + 1))
                 : std::pow((long double)rho,
                            c * a + (long double)std::max(a, b) /
                                        std::min(a, b));
    const double expected = static_cast<double>(moment * power);
    EXPECT_NEAR(delta3_cut(rho, s), expected, 2e-13 * expected)
        << "(a,b,c) = (" << a << "," << b << "," << c << ")";
  }
  // Degenerate and invalid inputs.
  EXPECT_DOUBLE_EQ(delta3_cut(0.4, StructureDef::polynomial(3, 3, 2)), 0.0);
  EXPECT_THROW(delta3_cut(-0.1, StructureDef::polynomial(2, 3, 2)),
               domain_error);
  EXPECT_THROW(delta3_cut(0.5, StructureDef::heisenberg()),
               unsupported_structure_error);
}

// -- corner displacement --------------------------------------------------------

// Independent reading of the corner rectangle: integrate Q = dpsi/dx1 over
// the rectangle attached at gamma(eps) in real coordinates.
double corner_by_simpson(double delta, double eps, const StructureDef& s) {
  const int a = s.a(), b = s.b(), c = s.c();
  const Vec2 A = gamma_point(eps, +1, +1, s);
  const auto Q = [&](long double x, long double y) {
    long double xa1 = 1.0L, yb = 1.0L;
    for (int i = 0; i < a - 1; ++i) xa1 *= x;
    for (int i = 0; i < b; ++i) yb *= y;
    long double Pc1 = 1.0L;
    const long double P = xa1 * x - yb;
    for (int i = 0; i < c - 1; ++i) Pc1 *= P;
    return c * a * xa1 * Pc1;
  };
  long double val;
  if (b >= a) {
    val = oracles::integrate2d(Q, A.x1, A.x1 * (1.0L + (long double)delta),
                               A.x2 * (1.0L - (long double)delta), A.x2,
                               1e-18L);
  } else {
    val = oracles::integrate2d(Q, A.x1 * (1.0L - (long double)delta), A.x1,
                               A.x2, A.x2 * (1.0L + (long double)delta),
                               1e-18L);
  }
  return std::fabs(static_cast<double>(val));
}

TEST(Delta3Cor, ClosedFormMatchesSimpsonOnBothBranches) {
  for (const auto& [a, b] : {std::array<int, 2>{2, 3}, {3, 4}, {3, 2}, {5, 3}}) {
    const StructureDef s = StructureDef::polynomial(a, b, 2);
    for (double eps : {1.0, 0.7}) {
      for (double delta : {0.1, 0.01}) {
        const double expected = corner_by_simpson(delta, eps, s);
        EXPECT_NEAR(delta3_cor(delta, eps, s), expected, 1e-11 * expected)
            << "(a,b) = (" << a << "," << b << "), eps = " << eps
            << ", delta = " << delta;
      }
    }
  }
}

TEST(Delta3Cor, QuadraturePathForHigherC) {
  const StructureDef s = StructureDef::polynomial(2, 3, 3);
  for (double delta : {0.1, 0.02}) {
    const double expected = corner_by_simpson(delta, 1.0, s);
    EXPECT_NEAR(delta3_cor(delta, 1.0, s), expected, 1e-9 * expected);
  }
  EXPECT_DOUBLE_EQ(delta3_cor(0.0, 1.0, s), 0.0);
  EXPECT_THROW(delta3_cor(0.1, 0.0, s), domain_error);
  EXPECT_THROW(delta3_cor(-1e-3, 1.0, s), domain_error);
}

TEST(Delta3Cor, DerivativeMatchesFiniteDifferences) {
  const StructureDef s = StructureDef::polynomial(3, 4, 2);
  for (double delta : {0.2, 0.03}) {
    const double fd = oracles::diff(
        [&](double d) { return delta3_cor(d, 0.9, s); }, delta, 1e-5);
    const double an = delta3_cor_ddelta(delta, 0.9, s);
    EXPECT_NEAR(an, fd, 1e-8 * std::fabs(an));
  }
  EXPECT_THROW(delta3_cor_ddelta(0.1, 1.0, StructureDef::polynomial(2, 3, 3)),
               unsupported_structure_error);
}

TEST(Delta3Cor, CubicLawFactorization) {
  // delta3_cor = a (a+b) eps^pow delta^3 (1 + f_ab(delta)) with the exact
  // finite polynomial f_ab, f_ab(0) = 0.
  for (const auto& [a, b] : {std::array<int, 2>{2, 3}, {4, 3}}) {
    const StructureDef s = StructureDef::polynomial(a, b, 2);
    EXPECT_DOUBLE_EQ(f_ab(0.0, s), 0.0);
    const double eps = 0.8;
    const double pow_eps = (b >= a) ? std::pow(eps, 2.0 * b + 1.0)
                                    : std::pow(eps, 2.0 * a + s.q());
    for (double delta : {0.3, 0.05, 1e-3}) {
      const double lead = a * (a + b) * pow_eps * delta * delta * delta;
      const double ratio = delta3_cor(delta, eps, s) / lead - 1.0;
      EXPECT_NEAR(ratio, f_ab(delta, s), 1e-12 * (1.0 + std::fabs(ratio)));
    }
    // The correction vanishes linearly: halving delta halves it, up to the
    // quadratic tail.
    EXPECT_NEAR(f_ab(1e-4, s) / f_ab(2e-4, s), 0.5, 1e-3);
  }
}

// -- winding numbers -------------------------------------------------------------

TEST(Winding, SquareOrientationsAndOutside) {
  const PlaneCurve ccw = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}, {0.0, 0.0}});
  EXPECT_EQ(winding_number(ccw, {0.5, 0.5}), 1);
  EXPECT_EQ(winding_number(ccw, {2.0, 0.5}), 0);
  EXPECT_EQ(winding_number(ccw, {-0.3, 1.2}), 0);
  EXPECT_EQ(winding_number(reverse(ccw), {0.5, 0.5}), -1);

  // Traverse twice: winding 2.
  PlaneCurve twice = ccw;
  for (std::size_t i = 1; i < ccw.size(); ++i) {
    twice.params.push_back(4.0 + ccw.params[i]);
    twice.points.push_back(ccw.points[i]);
  }
  EXPECT_EQ(winding_number(twice, {0.5, 0.5}), 2);

  EXPECT_THROW(winding_number(ccw, {0.5, 0.0}), ill_posed_query_error);
  const PlaneCurve open_arc =
      curve_of({0.0, 1.0}, {{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_THROW(winding_number(open_arc, {0.5, 0.5}), domain_error);
}

// -- weighted area decomposition ---------------------------------------------------

TEST(WeightedArea, SimpleLoopMatchesSimpsonAndLineIntegral) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve rect = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.2, 0.1}, {0.5, 0.1}, {0.5, 0.4}, {0.2, 0.4}, {0.2, 0.1}});
  const WeightedAreaReport r = weighted_area_decomposition(rect, s, 128);
  ASSERT_EQ(r.components.size(), 1u);
  EXPECT_EQ(r.components[0].winding, 1);
  const long double ref = oracles::integrate2d(
      [&](long double x, long double y) -> long double {
        const long double P = x * x - y * y * y;
        return 4.0L * x * P;
      },
      0.2L, 0.5L, 0.1L, 0.4L, 1e-17L);
  EXPECT_NEAR(r.components[0].area_weighted, static_cast<double>(ref), 1e-13);
  EXPECT_NEAR(r.total, r.line_integral, 1e-13);
  // The sample point lies inside the component it reports.
  EXPECT_EQ(winding_number(rect, r.components[0].sample_point), 1);
}

TEST(WeightedArea, BowtieSplitsIntoOppositeLobes) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve bowtie = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 0.0}});
  const WeightedAreaReport r = weighted_area_decomposition(bowtie, s, 128);
  ASSERT_EQ(r.components.size(), 2u);
  // Sorted by sample x1: left lobe (counter-clockwise, +1) first.
  EXPECT_EQ(r.components[0].winding, 1);
  EXPECT_EQ(r.components[1].winding, -1);
  const auto Q = [](long double x, long double y) -> long double {
    const long double P = x * x - y * y * y;
    return 4.0L * x * P;
  };
  // Left triangle: x in [0, 1/2], y between y = x and y = 1 - x.
  const long double left = oracles::integrate(
      [&](long double x) {
        return oracles::integrate([&](long double y) { return Q(x, y); }, x,
                                  1.0L - x, 1e-18L);
      },
      0.0L, 0.5L, 1e-17L);
  // Right triangle: x in [1/2, 1], y between y = 1 - x and y = x.
  const long double right = oracles::integrate(
      [&](long double x) {
        return oracles::integrate([&](long double y) { return Q(x, y); },
                                  1.0L - x, x, 1e-18L);
      },
      0.5L, 1.0L, 1e-17L);
  EXPECT_NEAR(r.components[0].area_weighted, static_cast<double>(left),
              1e-12);
  EXPECT_NEAR(r.components[1].area_weighted, static_cast<double>(-right),
              1e-12);
  EXPECT_NEAR(r.total, r.line_integral, 1e-12);
  for (const AreaComponent& c : r.components)
    EXPECT_EQ(winding_number(bowtie, c.sample_point), c.winding);
}

TEST(WeightedArea, DoubleTraversalDoublesTheWeight) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  PlaneCurve once = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.2, 0.1}, {0.5, 0.1}, {0.5, 0.4}, {0.2, 0.4}, {0.2, 0.1}});
  PlaneCurve twice = once;
  for (std::size_t i = 1; i < once.size(); ++i) {
    twice.params.push_back(4.0 + once.params[i]);
    twice.points.push_back(once.points[i]);
  }
  const WeightedAreaReport r1 = weighted_area_decomposition(once, s, 64);
  const WeightedAreaReport r2 = weighted_area_decomposition(twice, s, 64);
  ASSERT_EQ(r2.components.size(), 1u);
  EXPECT_EQ(r2.components[0].winding, 2);
  EXPECT_NEAR(r2.components[0].area_weighted,
              2.0 * r1.components[0].area_weighted, 1e-13);
  EXPECT_NEAR(r2.line_integral, 2.0 * r1.line_integral, 1e-14);
}

TEST(WeightedArea, CompetitorLoopHasTwoOppositeComponents) {
  // The comparison loop of the assembled competitor encloses exactly the
  // cut sliver (one sign) and the corner rectangle (the other), even when
  // the rectangle is far below one raster cell.
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const CompetitorParams cp = solve_params(1.0, s);
  const CompetitorAssembly asmb = assemble_competitor(cp, s, 4096);
  const WeightedAreaReport r =
      weighted_area_decomposition(asmb.loop, s, 256);
  ASSERT_EQ(r.components.size(), 2u);
  EXPECT_EQ(r.components[0].winding * r.components[1].winding, -1);
  const double mag = std::max(std::fabs(r.components[0].area_weighted),
                              std::fabs(r.components[1].area_weighted));
  EXPECT_LT(std::fabs(r.total), 1e-8 * mag);
  EXPECT_LT(std::fabs(r.total - r.line_integral), 1e-8 * mag);
  // Cut and corner displacements are the two component magnitudes.
  EXPECT_NEAR(mag, delta3_cut(cp.rho, s), 1e-6 * mag);
}

TEST(WeightedArea, RejectsOpenCurvesAndBadGrids) {
  const StructureDef s = StructureDef::polynomial(2, 3, 2);
  const PlaneCurve open_arc =
      curve_of({0.0, 1.0}, {{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_THROW(weighted_area_decomposition(open_arc, s), domain_error);
  const PlaneCurve rect = curve_of(
      {0.0, 1.0, 2.0, 3.0, 4.0},
      {{0.2, 0.1}, {0.5, 0.1}, {0.5, 0.4}, {0.2, 0.4}, {0.2, 0.1}});
  EXPECT_THROW(weighted_area_decomposition(rect, s, 8), domain_error);
  EXPECT_THROW(weighted_area_decomposition(rect, s, 99999), domain_error);
  EXPECT_THROW(
      weighted_area_decomposition(rect, StructureDef::martinet(), 64),
      unsupported_structure_error);
}

}  // namespace
