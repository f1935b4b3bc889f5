// Third-coordinate displacement as a weighted plane area.
//
// For the polynomial structure the lift increment of a closed plane curve
// equals the integral of Q = d(psi)/dx1 over the enclosed region, weighted
// by winding number.  This header provides
//   * winding_number        - signed angle sum around a query point,
//   * delta3_cut            - closed form for the cut displacement,
//   * delta3_cor            - closed form for the corner-loop displacement,
//   * f_ab                  - relative correction beyond the delta^3 law,
//   * weighted_area_decomposition - per-component weighted areas of an
//     arbitrary closed polyline, computed from exact cell-level geometry.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/lift.hpp"
#include "srlab/numeric.hpp"
#include "srlab/structure.hpp"

namespace srlab {

// One connected component of nonzero winding in the complement of a closed
// plane curve.  area_weighted is the winding number times the integral of
// Q = d(psi)/dx1 over the component.
struct AreaComponent {
  int winding = 0;
  double area_weighted = 0.0;
  Vec2 sample_point{0.0, 0.0};
};

struct WeightedAreaReport {
  std::vector<AreaComponent> components;  // sorted by sample_point
  double total = 0.0;          // sum of area_weighted in that order
  double line_integral = 0.0;  // independent integral of psi dx2 along the curve
};

// ---------------------------------------------------------------------------
// Closed forms for the competitor's cut and corner displacements.
// ---------------------------------------------------------------------------

namespace detail {

// int_0^1 (s^a - s^b)^2 ds as an exact rational; symmetric in (a, b).
inline double cut_moment(int a, int b) {
  const long long p = 2 * a + 1, q = a + b + 1, r = 2 * b + 1;
  const long long num = q * r - 2 * p * r + p * q;
  const long long den = p * q * r;
  return static_cast<double>(num) / static_cast<double>(den);
}

// Integer coefficients C[m] of the finite polynomial
//   (b+1) * delta3_cor(delta; eps = 1) = sum_{m >= 3} C[m] delta^m   (c = 2).
// Expanding the rectangle integral binomially, the degree-2 coefficient
// cancels identically and C[3] = (b+1) a (a+b); every entry is an exact
// integer (bounded by (b+1) 2^(2a) < 2^53 for a, b <= 24).
inline std::vector<double> corner_series(const StructureDef& s) {
  const int a = s.a(), b = s.b();
  const int top = std::max(2 * a + 1, a + b + 1);
  std::vector<double> c(static_cast<std::size_t>(top) + 1, 0.0);
  if (b >= a) {
    for (int k = 1; k <= 2 * a; ++k)
      c[k + 1] += (b + 1) * binomial(2 * a, k);
    for (int i = 1; i <= a; ++i)
      for (int j = 1; j <= b + 1; ++j)
        c[i + j] -=
            2.0 * ((j % 2) ? 1.0 : -1.0) * binomial(a, i) * binomial(b + 1, j);
  } else {
    for (int i = 1; i <= a; ++i)
      for (int j = 1; j <= b + 1; ++j)
        c[i + j] +=
            2.0 * ((i % 2) ? 1.0 : -1.0) * binomial(a, i) * binomial(b + 1, j);
    for (int k = 1; k <= 2 * a; ++k)
      c[k + 1] -= ((k % 2) ? 1.0 : -1.0) * (b + 1) * binomial(2 * a, k);
  }
  return c;
}

inline double psi_val(double x1, double x2, const StructureDef& s) {
  return powi(eval_P(x1, x2, s), s.c());
}

// Line integral of psi along an affine path: psi restricted to a line is a
// polynomial of degree c*max(a,b), so one GL8 panel is exact up to degree
// 15; adaptivity beyond that.  (Close to the zero set of P the evaluations
// cancel catastrophically, so refinement must not chase their noise.)
template <class F>
double psi_line_quad(F&& f, double a, double b, int degree) {
  if (a == b) return 0.0;
  if (degree <= 15) return gl8_panel(f, a, b);
  return integrate_adaptive_rel(f, a, b, 1e-13);
}

}  // namespace detail

// Magnitude of the lift increment of the straight cut 0 -> gamma(rho):
//   rho^(c b + 1) * int_0^1 (s^a - s^b)^c ds   for b >= a,
//   rho^(c a + q) * int_0^1 (s^b - s^a)^c ds   for a > b.
// Exact rational moment when c = 2, adaptive quadrature otherwise; zero for
// a = b, where the candidate curve is straight and nothing is cut off.
inline double delta3_cut(double rho, const StructureDef& s) {
  detail::require_polynomial(s, "delta3_cut");
  if (!(rho >= 0.0)) throw domain_error("delta3_cut: rho must be >= 0");
  const int a = s.a(), b = s.b(), c = s.c();
  if (a == b) return 0.0;
  double moment;
  if (c == 2) {
    moment = detail::cut_moment(a, b);
  } else {
    moment = integrate_adaptive_rel(
        [&](double t) { return powi(std::abs(powi(t, a) - powi(t, b)), c); },
        0.0, 1.0, 1e-13);
  }
  const double power = (b >= a) ? powi(rho, c * b + 1)
                                : std::pow(rho, c * a + s.q());
  return moment * power;
}

// Magnitude of the Q-integral over the corner rectangle attached at
// gamma(eps) with side fractions delta: eps^(c b + 1) (b >= a) or
// eps^(c a + q) (a > b) times a polynomial in delta that starts at
// a (a+b) delta^3.  Exact integer-coefficient polynomial when c = 2,
// 2-d adaptive quadrature otherwise.
inline double delta3_cor(double delta, double eps, const StructureDef& s) {
  detail::require_polynomial(s, "delta3_cor");
  if (!(delta >= 0.0) || !(eps > 0.0))
    throw domain_error("delta3_cor: need delta >= 0 and eps > 0");
  if (delta == 0.0) return 0.0;
  const int a = s.a(), b = s.b(), c = s.c();
  const double scale = (b >= a) ? powi(eps, c * b + 1)
                                : std::pow(eps, c * a + s.q());
  if (c == 2) {
    const std::vector<double> C = detail::corner_series(s);
    double horner = 0.0;
    for (int m = static_cast<int>(C.size()) - 1; m >= 3; --m)
      horner = horner * delta + C[m];
    return scale * powi(delta, 3) * horner / (b + 1);
  }
  // Rectangle in the scaled variables (x1, x2) = (eps^q u, eps v) for
  // b >= a, mirrored for a > b; |P| keeps one sign on the box.
  const double tol =
      1e-12 * std::max(a * (a + b) * powi(delta, 3), 1e-30);
  double val;
  if (b >= a) {
    val = integrate2d_adaptive(
        [&](double u, double v) {
          return c * a * powi(u, a - 1) *
                 powi(powi(u, a) - powi(v, b), c - 1);
        },
        1.0, 1.0 + delta, 1.0 - delta, 1.0, tol);
  } else {
    val = integrate2d_adaptive(
        [&](double u, double v) {
          return c * a * powi(u, a - 1) *
                 powi(powi(v, b) - powi(u, a), c - 1);
        },
        1.0 - delta, 1.0, 1.0, 1.0 + delta, tol);
  }
  return scale * std::abs(val);
}

// d/d(delta) of delta3_cor, from the same exact polynomial (c = 2 only).
inline double delta3_cor_ddelta(double delta, double eps,
                                const StructureDef& s) {
  detail::require_polynomial(s, "delta3_cor_ddelta");
  if (s.c() != 2)
    throw unsupported_structure_error("delta3_cor_ddelta requires c = 2");
  if (!(delta >= 0.0) || !(eps > 0.0))
    throw domain_error("delta3_cor_ddelta: need delta >= 0 and eps > 0");
  const int a = s.a(), b = s.b();
  const double scale = (b >= a) ? powi(eps, 2 * b + 1)
                                : std::pow(eps, 2.0 * a + s.q());
  const std::vector<double> C = detail::corner_series(s);
  double horner = 0.0;
  for (int m = static_cast<int>(C.size()) - 1; m >= 3; --m)
    horner = horner * delta + m * C[m];
  return scale * sqr(delta) * horner / (b + 1);
}

// Relative correction beyond the cubic law:
//   delta3_cor(delta, eps) = a (a+b) eps^pow delta^3 (1 + f_ab(delta)).
// A finite polynomial with f_ab(0) = 0; requires c = 2.
inline double f_ab(double delta, const StructureDef& s) {
  detail::require_polynomial(s, "f_ab");
  if (s.c() != 2) throw unsupported_structure_error("f_ab requires c = 2");
  if (!(delta >= 0.0)) throw domain_error("f_ab: delta must be >= 0");
  const std::vector<double> C = detail::corner_series(s);
  double horner = 0.0;
  for (int m = static_cast<int>(C.size()) - 1; m >= 4; --m)
    horner = horner * delta + C[m];
  return horner * delta / C[3];
}

// ---------------------------------------------------------------------------
// Winding number by summed signed angles.
// ---------------------------------------------------------------------------

// pre: curve closed to 1e-12; p farther than 1e-9 from every segment.
inline int winding_number(const PlaneCurve& curve, const Vec2& p) {
  validate(curve);
  if (!is_closed(curve, 1e-12))
    throw domain_error("winding_number requires a closed curve");
  CompensatedSum angle;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    const Vec2& s0 = curve.points[i - 1];
    const Vec2& s1 = curve.points[i];
    const double ux = s0.x1 - p.x1, uy = s0.x2 - p.x2;
    const double vx = s1.x1 - p.x1, vy = s1.x2 - p.x2;
    // Distance from p to the segment.
    const double ex = s1.x1 - s0.x1, ey = s1.x2 - s0.x2;
    const double len2 = ex * ex + ey * ey;
    double t = (len2 > 0.0) ? (-(ux * ex + uy * ey) / len2) : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dxp = ux + t * ex, dyp = uy + t * ey;
    if (std::hypot(dxp, dyp) <= 1e-9)
      throw ill_posed_query_error(
          "winding_number: query point lies on the curve");
    angle.add(std::atan2(ux * vy - uy * vx, ux * vx + uy * vy));
  }
  const double turns = angle.value() / (2.0 * 3.14159265358979323846);
  const double rounded = std::nearbyint(turns);
  if (std::abs(turns - rounded) > 1e-6)
    throw ill_posed_query_error("winding_number: angle sum is not integral");
  return static_cast<int>(rounded);
}

// ---------------------------------------------------------------------------
// Weighted area decomposition.
// ---------------------------------------------------------------------------

namespace detail {

// Upward-ray winding queries against an x-bucketed segment index:
// a segment crossing the vertical ray above the point contributes -1 when
// it runs rightward and +1 when it runs leftward (counter-clockwise loops
// around the point then total +1).
struct RayIndex {
  double x0 = 0.0, inv_span = 0.0;
  int nb = 0;
  std::vector<std::vector<int>> buckets;
  const std::vector<Vec2>* pts = nullptr;

  void build(const std::vector<Vec2>& points, double xlo, double xhi,
             int nbuckets) {
    pts = &points;
    x0 = xlo;
    nb = nbuckets;
    inv_span = nb / (xhi - xlo);
    buckets.assign(static_cast<std::size_t>(nb), {});
    for (std::size_t i = 1; i < points.size(); ++i) {
      const double a = std::min(points[i - 1].x1, points[i].x1);
      const double b = std::max(points[i - 1].x1, points[i].x1);
      int j0 = std::clamp(static_cast<int>((a - x0) * inv_span), 0, nb - 1);
      int j1 = std::clamp(static_cast<int>((b - x0) * inv_span), 0, nb - 1);
      for (int j = j0; j <= j1; ++j)
        buckets[static_cast<std::size_t>(j)].push_back(
            static_cast<int>(i));
    }
  }

  int winding_above(const Vec2& p) const {
    int w = 0;
    const int j =
        std::clamp(static_cast<int>((p.x1 - x0) * inv_span), 0, nb - 1);
    for (int si : buckets[static_cast<std::size_t>(j)]) {
      const Vec2& a = (*pts)[static_cast<std::size_t>(si) - 1];
      const Vec2& b = (*pts)[static_cast<std::size_t>(si)];
      int dir;
      if (a.x1 <= p.x1 && p.x1 < b.x1) {
        dir = -1;  // rightward
      } else if (b.x1 <= p.x1 && p.x1 < a.x1) {
        dir = +1;  // leftward
      } else {
        continue;
      }
      const double ycross =
          a.x2 + (p.x1 - a.x1) * (b.x2 - a.x2) / (b.x1 - a.x1);
      if (ycross > p.x2) w += dir;
    }
    return w;
  }
};

// Liang-Barsky clip of segment p + t (q - p), t in [0, 1], against a closed
// rectangle.  Returns false when the segment misses it entirely.
inline bool clip_segment(const Vec2& p, const Vec2& q, double xl, double xr,
                         double yb, double yt, double& t0, double& t1) {
  t0 = 0.0;
  t1 = 1.0;
  const double dx = q.x1 - p.x1, dy = q.x2 - p.x2;
  const double pv[4] = {-dx, dx, -dy, dy};
  const double qv[4] = {p.x1 - xl, xr - p.x1, p.x2 - yb, yt - p.x2};
  for (int k = 0; k < 4; ++k) {
    if (pv[k] == 0.0) {
      if (qv[k] < 0.0) return false;
      continue;
    }
    const double r = qv[k] / pv[k];
    if (pv[k] < 0.0) {
      if (r > t1) return false;
      if (r > t0) t0 = r;
    } else {
      if (r < t0) return false;
      if (r < t1) t1 = r;
    }
  }
  return t0 <= t1;
}

// Minimal union-find over consecutive integer ids.
struct UnionFind {
  std::vector<int> parent;
  void init(int n) {
    parent.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] =
          parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] =
        std::min(a, b);
  }
};

// Interval of a straddle-cell region on one of its cell edges, used to glue
// regions across cell boundaries.
struct EdgeIv {
  double lo = 0.0, hi = 0.0;
  int wind = 0;
  int node = -1;
};

struct CellBundle {
  std::vector<EdgeIv> left, right, bottom, top;
};

struct CompNode {
  int wind = 0;
  double integral = 0.0;  // unweighted integral of Q over the piece
  Vec2 sample{0.0, 0.0};
};

// Full decomposition at one raster resolution.  When with_integrals is
// false only the component structure is built (used for the stability
// check at half resolution).
inline std::vector<AreaComponent> decompose_at(const PlaneCurve& curve,
                                               const StructureDef& s,
                                               int R, bool with_integrals) {
  const std::vector<Vec2>& pts = curve.points;
  const std::size_t nseg = pts.size() - 1;
  const int psi_deg = s.c() * std::max(s.a(), s.b());

  // Inflated bounding box.
  double xmin = pts[0].x1, xmax = pts[0].x1;
  double ymin = pts[0].x2, ymax = pts[0].x2;
  for (const Vec2& p : pts) {
    xmin = std::min(xmin, p.x1);
    xmax = std::max(xmax, p.x1);
    ymin = std::min(ymin, p.x2);
    ymax = std::max(ymax, p.x2);
  }
  const double coord_mag =
      std::max({1.0, std::abs(xmin), std::abs(xmax), std::abs(ymin),
                std::abs(ymax)});
  const double padx = 0.02 * (xmax - xmin) + 1e-12 * coord_mag;
  const double pady = 0.02 * (ymax - ymin) + 1e-12 * coord_mag;
  const double X0 = xmin - padx, X1 = xmax + padx;
  const double Y0 = ymin - pady, Y1 = ymax + pady;
  const double dx = (X1 - X0) / R, dy = (Y1 - Y0) / R;

  const auto cell_of = [&](int i, int j) { return i * R + j; };

  // --- straddle cells and their segment lists -----------------------------
  std::vector<std::uint8_t> straddle(static_cast<std::size_t>(R) * R, 0);
  std::map<int, std::vector<int>> cell_segs;
  for (std::size_t si = 1; si <= nseg; ++si) {
    const Vec2& p = pts[si - 1];
    const Vec2& q = pts[si];
    if (p.x1 == q.x1 && p.x2 == q.x2) continue;
    int j0 = std::clamp(
        static_cast<int>(std::floor((std::min(p.x1, q.x1) - X0) / dx)), 0,
        R - 1);
    int j1 = std::clamp(
        static_cast<int>(std::floor((std::max(p.x1, q.x1) - X0) / dx)), 0,
        R - 1);
    int i0 = std::clamp(
        static_cast<int>(std::floor((std::min(p.x2, q.x2) - Y0) / dy)), 0,
        R - 1);
    int i1 = std::clamp(
        static_cast<int>(std::floor((std::max(p.x2, q.x2) - Y0) / dy)), 0,
        R - 1);
    for (int i = i0; i <= i1; ++i) {
      for (int j = j0; j <= j1; ++j) {
        double t0, t1;
        if (clip_segment(p, q, X0 + j * dx, X0 + (j + 1) * dx, Y0 + i * dy,
                         Y0 + (i + 1) * dy, t0, t1)) {
          const int c = cell_of(i, j);
          if (!straddle[static_cast<std::size_t>(c)]) {
            straddle[static_cast<std::size_t>(c)] = 1;
            cell_segs[c] = {};
          }
          cell_segs[c].push_back(static_cast<int>(si));
        }
      }
    }
  }

  // --- winding raster at cell centers (scanline) ---------------------------
  std::vector<int> wind_raster(static_cast<std::size_t>(R) * R, 0);
  {
    std::vector<std::vector<std::pair<double, int>>> rows(
        static_cast<std::size_t>(R));
    for (std::size_t si = 1; si <= nseg; ++si) {
      const Vec2& p = pts[si - 1];
      const Vec2& q = pts[si];
      if (p.x2 == q.x2) continue;
      const double ylo = std::min(p.x2, q.x2);
      const double yhi = std::max(p.x2, q.x2);
      const int dir = (q.x2 > p.x2) ? +1 : -1;
      int ia = static_cast<int>(std::floor((ylo - Y0) / dy - 0.5)) - 1;
      int ib = static_cast<int>(std::floor((yhi - Y0) / dy - 0.5)) + 1;
      ia = std::max(ia, 0);
      ib = std::min(ib, R - 1);
      for (int i = ia; i <= ib; ++i) {
        const double yc = Y0 + (i + 0.5) * dy;
        if (!(yc >= ylo && yc < yhi)) continue;
        const double xc =
            p.x1 + (yc - p.x2) * (q.x1 - p.x1) / (q.x2 - p.x2);
        rows[static_cast<std::size_t>(i)].push_back({xc, dir});
      }
    }
    for (int i = 0; i < R; ++i) {
      auto& cr = rows[static_cast<std::size_t>(i)];
      std::sort(cr.begin(), cr.end());
      int acc = 0;
      int k = static_cast<int>(cr.size()) - 1;
      for (int j = R - 1; j >= 0; --j) {
        const double xc = X0 + (j + 0.5) * dx;
        while (k >= 0 && cr[static_cast<std::size_t>(k)].first > xc) {
          acc += cr[static_cast<std::size_t>(k)].second;
          --k;
        }
        wind_raster[static_cast<std::size_t>(cell_of(i, j))] = acc;
      }
    }
  }

  // --- flood fill of full-cell blobs ---------------------------------------
  std::vector<int> blob_id(static_cast<std::size_t>(R) * R, -1);
  std::vector<CompNode> nodes;  // blobs first, then straddle regions
  {
    std::vector<int> stack;
    for (int i = 0; i < R; ++i) {
      for (int j = 0; j < R; ++j) {
        const int c = cell_of(i, j);
        if (straddle[static_cast<std::size_t>(c)] ||
            wind_raster[static_cast<std::size_t>(c)] == 0 ||
            blob_id[static_cast<std::size_t>(c)] != -1)
          continue;
        const int w = wind_raster[static_cast<std::size_t>(c)];
        const int id = static_cast<int>(nodes.size());
        CompNode node;
        node.wind = w;
        node.sample = Vec2{X0 + (j + 0.5) * dx, Y0 + (i + 0.5) * dy};
        CompensatedSum integral;
        stack.assign(1, c);
        blob_id[static_cast<std::size_t>(c)] = id;
        while (!stack.empty()) {
          const int cur = stack.back();
          stack.pop_back();
          const int ci = cur / R, cj = cur % R;
          if (with_integrals) {
            // Exact per-cell integral of Q: the x-antiderivative is psi.
            const double xl = X0 + cj * dx, xr = X0 + (cj + 1) * dx;
            integral.add(psi_line_quad(
                [&](double y) {
                  return psi_val(xr, y, s) - psi_val(xl, y, s);
                },
                Y0 + ci * dy, Y0 + (ci + 1) * dy, psi_deg));
          }
          const int di[4] = {1, -1, 0, 0};
          const int dj[4] = {0, 0, 1, -1};
          for (int kk = 0; kk < 4; ++kk) {
            const int ni = ci + di[kk], nj = cj + dj[kk];
            if (ni < 0 || ni >= R || nj < 0 || nj >= R) continue;
            const int nc = cell_of(ni, nj);
            if (straddle[static_cast<std::size_t>(nc)] ||
                wind_raster[static_cast<std::size_t>(nc)] != w ||
                blob_id[static_cast<std::size_t>(nc)] != -1)
              continue;
            blob_id[static_cast<std::size_t>(nc)] = id;
            stack.push_back(nc);
          }
        }
        node.integral = integral.value();
        nodes.push_back(node);
      }
    }
  }

  // --- ray index for exact winding queries ---------------------------------
  RayIndex ray;
  ray.build(pts, X0, X1, std::max(R, 64));

  // --- straddle cells: slab decomposition into trapezoid regions -----------
  struct Graph {
    double ya, yb;  // values at the slab's left/right edge
    bool cell_bottom, cell_top;
  };
  struct PendingUnion {
    int a, b;
  };
  std::map<int, CellBundle> bundles;
  std::vector<PendingUnion> unions;
  const double cut_tol = 1e-12 * dx;
  const double height_tol = 1e-13 * dy;
  const double overlap_tol_y = 1e-12 * dy;
  const double overlap_tol_x = 1e-12 * dx;

  for (const auto& [c, segs] : cell_segs) {
    const int ci = c / R, cj = c % R;
    const double xl = X0 + cj * dx, xr = X0 + (cj + 1) * dx;
    const double yb = Y0 + ci * dy, yt = Y0 + (ci + 1) * dy;

    // Clip segments; collect vertical cut abscissae and graph candidates.
    struct Cand {
      double xlo, xhi;  // clipped x-span
      double px, py, m;  // original line: y = py + (x - px) m
    };
    std::vector<Cand> cands;
    std::vector<double> cuts = {xl, xr};
    for (int si : segs) {
      const Vec2& p = pts[static_cast<std::size_t>(si) - 1];
      const Vec2& q = pts[static_cast<std::size_t>(si)];
      double t0, t1;
      if (!clip_segment(p, q, xl, xr, yb, yt, t0, t1) || t0 >= t1) continue;
      if (p.x1 == q.x1) {
        cuts.push_back(p.x1);
        continue;  // vertical: a cut line, not a graph
      }
      const double xA = p.x1 + t0 * (q.x1 - p.x1);
      const double xB = p.x1 + t1 * (q.x1 - p.x1);
      Cand cd;
      cd.xlo = std::min(xA, xB);
      cd.xhi = std::max(xA, xB);
      cd.px = p.x1;
      cd.py = p.x2;
      cd.m = (q.x2 - p.x2) / (q.x1 - p.x1);
      cuts.push_back(cd.xlo);
      cuts.push_back(cd.xhi);
      cands.push_back(cd);
    }
    // Pairwise intersections add interior cuts.
    for (std::size_t ii = 0; ii < cands.size(); ++ii) {
      for (std::size_t jj = ii + 1; jj < cands.size(); ++jj) {
        const Cand& A = cands[ii];
        const Cand& B = cands[jj];
        const double dm = A.m - B.m;
        if (std::abs(dm) <=
            1e-14 * (std::abs(A.m) + std::abs(B.m) + 1.0))
          continue;
        const double x =
            ((B.py - B.m * B.px) - (A.py - A.m * A.px)) / dm;
        if (x > std::max(A.xlo, B.xlo) && x < std::min(A.xhi, B.xhi))
          cuts.push_back(x);
      }
    }
    std::sort(cuts.begin(), cuts.end());
    std::vector<double> xs;
    for (double x : cuts) {
      x = std::clamp(x, xl, xr);
      if (xs.empty() || x - xs.back() > cut_tol) xs.push_back(x);
    }
    if (xs.size() < 2) continue;
    // Snap the last cut onto the cell edge so the rightmost slab is never
    // dropped as a sliver and its regions keep their right-edge flag.
    xs.back() = xr;

    CellBundle bundle;
    // Regions of the previous slab that touch its right edge, for gluing
    // across the interior cut.
    std::vector<EdgeIv> prev_right;

    for (std::size_t sl = 0; sl + 1 < xs.size(); ++sl) {
      const double xa = xs[sl], xb = xs[sl + 1];
      if (xb - xa <= cut_tol) continue;
      const double xm = 0.5 * (xa + xb);
      std::vector<Graph> graphs;
      graphs.push_back({yb, yb, true, false});
      graphs.push_back({yt, yt, false, true});
      for (const Cand& cd : cands) {
        if (cd.xlo <= xm && xm <= cd.xhi) {
          const double ya =
              std::clamp(cd.py + (xa - cd.px) * cd.m, yb, yt);
          const double yb2 =
              std::clamp(cd.py + (xb - cd.px) * cd.m, yb, yt);
          graphs.push_back({ya, yb2, false, false});
        }
      }
      std::stable_sort(graphs.begin(), graphs.end(),
                       [](const Graph& g1, const Graph& g2) {
                         return g1.ya + g1.yb < g2.ya + g2.yb;
                       });

      std::vector<EdgeIv> cur_right;
      int prev_node = -1;
      int prev_wind = 0;
      bool barrier = false;
      for (std::size_t k = 0; k + 1 < graphs.size(); ++k) {
        const Graph& lo = graphs[k];
        const Graph& hi = graphs[k + 1];
        const double h_mid =
            0.5 * (hi.ya + hi.yb) - 0.5 * (lo.ya + lo.yb);
        if (h_mid <= height_tol) continue;  // doubled chord: no area
        const double ymid = 0.5 * (0.5 * (lo.ya + lo.yb) +
                                   0.5 * (hi.ya + hi.yb));
        const int w = ray.winding_above(Vec2{xm, ymid});
        if (w == 0) {
          barrier = true;
          continue;
        }
        double integral = 0.0;
        if (with_integrals) {
          // Green's theorem on the trapezoid, counter-clockwise:
          // the boundary integral of psi dx2 equals the Q-integral.
          const double inv_w = 1.0 / (xb - xa);
          const double m_lo = (lo.yb - lo.ya) * inv_w;
          const double m_hi = (hi.yb - hi.ya) * inv_w;
          double sum = psi_line_quad(
              [&](double y) { return psi_val(xb, y, s); }, lo.yb, hi.yb,
              psi_deg);
          sum -= psi_line_quad(
              [&](double y) { return psi_val(xa, y, s); }, lo.ya, hi.ya,
              psi_deg);
          if (m_lo != 0.0)
            sum += m_lo * psi_line_quad(
                              [&](double x) {
                                return psi_val(
                                    x, lo.ya + (x - xa) * m_lo, s);
                              },
                              xa, xb, psi_deg);
          if (m_hi != 0.0)
            sum -= m_hi * psi_line_quad(
                              [&](double x) {
                                return psi_val(
                                    x, hi.ya + (x - xa) * m_hi, s);
                              },
                              xa, xb, psi_deg);
          integral = sum;
        }
        const int id = static_cast<int>(nodes.size());
        CompNode node;
        node.wind = w;
        node.integral = integral;
        node.sample = Vec2{xm, ymid};
        nodes.push_back(node);
        // Vertical gluing within the slab (through doubled chords only).
        if (prev_node != -1 && !barrier && prev_wind == w)
          unions.push_back({prev_node, id});
        prev_node = id;
        prev_wind = w;
        barrier = false;
        // Edge intervals for gluing to neighbors.
        if (sl == 0)
          bundle.left.push_back({lo.ya, hi.ya, w, id});
        if (sl + 2 == xs.size())
          bundle.right.push_back({lo.yb, hi.yb, w, id});
        cur_right.push_back({lo.yb, hi.yb, w, id});
        if (lo.cell_bottom) bundle.bottom.push_back({xa, xb, w, id});
        if (hi.cell_top) bundle.top.push_back({xa, xb, w, id});
        // Horizontal gluing across the interior cut.
        for (const EdgeIv& pr : prev_right) {
          if (pr.wind != w) continue;
          if (std::min(pr.hi, hi.ya) - std::max(pr.lo, lo.ya) >
              overlap_tol_y)
            unions.push_back({pr.node, id});
        }
      }
      prev_right = std::move(cur_right);
    }
    bundles[c] = std::move(bundle);
  }

  // --- gluing across cell boundaries ---------------------------------------
  UnionFind uf;
  uf.init(static_cast<int>(nodes.size()));
  for (const PendingUnion& u : unions) uf.unite(u.a, u.b);

  const auto blob_at = [&](int i, int j) -> int {
    if (i < 0 || i >= R || j < 0 || j >= R) return -1;
    return blob_id[static_cast<std::size_t>(cell_of(i, j))];
  };
  for (const auto& [c, bundle] : bundles) {
    const int ci = c / R, cj = c % R;
    // Region-region gluing with the west and south straddle neighbors.
    const auto wit = bundles.find(cell_of(ci, cj - 1));
    if (cj > 0 && wit != bundles.end()) {
      for (const EdgeIv& mine : bundle.left)
        for (const EdgeIv& theirs : wit->second.right)
          if (mine.wind == theirs.wind &&
              std::min(mine.hi, theirs.hi) - std::max(mine.lo, theirs.lo) >
                  overlap_tol_y)
            uf.unite(mine.node, theirs.node);
    }
    const auto sit = bundles.find(cell_of(ci - 1, cj));
    if (ci > 0 && sit != bundles.end()) {
      for (const EdgeIv& mine : bundle.bottom)
        for (const EdgeIv& theirs : sit->second.top)
          if (mine.wind == theirs.wind &&
              std::min(mine.hi, theirs.hi) - std::max(mine.lo, theirs.lo) >
                  overlap_tol_x)
            uf.unite(mine.node, theirs.node);
    }
    // Region-blob gluing in all four directions.
    const int nb_w = blob_at(ci, cj - 1), nb_e = blob_at(ci, cj + 1);
    const int nb_s = blob_at(ci - 1, cj), nb_n = blob_at(ci + 1, cj);
    if (nb_w >= 0)
      for (const EdgeIv& e : bundle.left)
        if (nodes[static_cast<std::size_t>(nb_w)].wind == e.wind)
          uf.unite(e.node, nb_w);
    if (nb_e >= 0)
      for (const EdgeIv& e : bundle.right)
        if (nodes[static_cast<std::size_t>(nb_e)].wind == e.wind)
          uf.unite(e.node, nb_e);
    if (nb_s >= 0)
      for (const EdgeIv& e : bundle.bottom)
        if (nodes[static_cast<std::size_t>(nb_s)].wind == e.wind)
          uf.unite(e.node, nb_s);
    if (nb_n >= 0)
      for (const EdgeIv& e : bundle.top)
        if (nodes[static_cast<std::size_t>(nb_n)].wind == e.wind)
          uf.unite(e.node, nb_n);
  }

  // --- assemble components --------------------------------------------------
  std::map<int, std::pair<AreaComponent, CompensatedSum>> comps;
  for (int id = 0; id < static_cast<int>(nodes.size()); ++id) {
    const CompNode& node = nodes[static_cast<std::size_t>(id)];
    const int root = uf.find(id);
    auto it = comps.find(root);
    if (it == comps.end()) {
      AreaComponent ac;
      ac.winding = node.wind;
      ac.sample_point = node.sample;  // smallest id = deterministic sample
      it = comps.emplace(root, std::make_pair(ac, CompensatedSum{})).first;
    }
    it->second.second.add(node.integral);
  }
  std::vector<AreaComponent> out;
  out.reserve(comps.size());
  for (auto& [root, pr] : comps) {
    pr.first.area_weighted = pr.first.winding * pr.second.value();
    out.push_back(pr.first);
  }
  std::sort(out.begin(), out.end(),
            [](const AreaComponent& a, const AreaComponent& b) {
              if (a.sample_point.x1 != b.sample_point.x1)
                return a.sample_point.x1 < b.sample_point.x1;
              return a.sample_point.x2 < b.sample_point.x2;
            });
  return out;
}

}  // namespace detail

// Decomposes the complement of a closed plane curve into its components of
// nonzero winding and integrates Q = d(psi)/dx1 over each, weighted by the
// winding number.  Full raster cells are handled by an exact per-cell
// antiderivative; cells met by the curve are split into exact trapezoids
// between segment chords (sub-cell features like the corner loop survive).
// The component count is re-derived at half resolution; a mismatch throws
// resolution_error.  Requires the polynomial structure and a curve closed
// to 1e-12.
inline WeightedAreaReport weighted_area_decomposition(const PlaneCurve& curve,
                                                      const StructureDef& s,
                                                      int grid = 1024) {
  detail::require_polynomial(s, "weighted_area_decomposition");
  validate(curve);
  if (!is_closed(curve, 1e-12))
    throw domain_error(
        "weighted_area_decomposition requires a closed curve");
  if (grid < 16 || grid > 16384)
    throw domain_error("weighted_area_decomposition: grid out of range");

  const std::vector<AreaComponent> coarse =
      detail::decompose_at(curve, s, grid / 2, false);
  std::vector<AreaComponent> fine =
      detail::decompose_at(curve, s, grid, true);
  if (coarse.size() != fine.size())
    throw resolution_error(
        "weighted_area_decomposition: component count changed between "
        "resolutions " +
        std::to_string(grid / 2) + " and " + std::to_string(grid) +
        "; raise the grid");

  WeightedAreaReport report;
  report.components = std::move(fine);
  CompensatedSum total;
  for (const AreaComponent& c : report.components) total.add(c.area_weighted);
  report.total = total.value();
  report.line_integral = lift_increment(curve, s);
  return report;
}

}  // namespace srlab
