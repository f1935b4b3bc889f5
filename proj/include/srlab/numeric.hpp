// Small numerical kernel shared by all modules: compensated summation,
// exact integer powers/binomials, Gauss-Legendre panels, and adaptive
// quadrature in one and two dimensions.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace srlab {

// Neumaier-compensated accumulator; error stays O(eps) independent of the
// number of terms, which matters when gains of order 1e-12 are extracted
// from lengths of order 1 summed over 3e4 chords.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// x^n by repeated multiplication with a fixed association order, so equal
// inputs give bit-equal outputs across call sites.
inline double powi(double x, int n) noexcept {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Binomial coefficient as an exactly representable double (exact while the
// value stays below 2^53; callers keep n small).
inline double binomial(int n, int k) noexcept {
  if (k < 0 || k > n) return 0.0;
  if (k > n - k) k = n - k;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / i;
  return std::round(r);
}

inline double sqr(double x) noexcept { return x * x; }

namespace detail {

// 8-point Gauss-Legendre abscissae/weights on [-1, 1]; exact for
// polynomials of degree <= 15.
inline constexpr std::array<double, 4> kGl8X = {
    0.18343464249564980, 0.52553240991632899, 0.79666647741362674,
    0.96028985649753623};
inline constexpr std::array<double, 4> kGl8W = {
    0.36268378337836198, 0.31370664587788729, 0.22238103445337447,
    0.10122853629037626};

}  // namespace detail

// One Gauss-Legendre panel of order 8 on [a, b].
template <class F>
double gl8_panel(F&& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dx = half * detail::kGl8X[i];
    s += detail::kGl8W[i] * (f(mid - dx) + f(mid + dx));
  }
  return s * half;
}

namespace detail {

template <class F>
double integrate_adaptive_rec(F& f, double a, double b, double whole,
                              double abs_tol, int depth, long long& budget) {
  const double mid = 0.5 * (a + b);
  const double left = gl8_panel(f, a, mid);
  const double right = gl8_panel(f, mid, b);
  const double split = left + right;
  budget -= 2;
  // Rounding-level discrepancies cannot be reduced by refinement; treating
  // them as converged keeps near-zero integrands from recursing forever.
  // The panel budget is a hard stop for discrepancies that hover at the
  // floor, where recursion would otherwise grow exponentially while the
  // value is already converged to rounding.
  const double floor =
      1e-16 * (std::abs(left) + std::abs(right) + std::abs(whole));
  if (std::abs(split - whole) <= std::max(abs_tol, floor) || depth >= 52 ||
      budget <= 0)
    return split;
  return integrate_adaptive_rec(f, a, mid, left, 0.5 * abs_tol, depth + 1,
                                budget) +
         integrate_adaptive_rec(f, mid, b, right, 0.5 * abs_tol, depth + 1,
                                budget);
}

template <class F>
double gl8_panel_2d(F& f, double x0, double x1, double y0, double y1) {
  const double xm = 0.5 * (x0 + x1), xh = 0.5 * (x1 - x0);
  const double ym = 0.5 * (y0 + y1), yh = 0.5 * (y1 - y0);
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double dx = xh * kGl8X[i];
    for (int j = 0; j < 4; ++j) {
      const double dy = yh * kGl8X[j];
      s += kGl8W[i] * kGl8W[j] *
           (f(xm - dx, ym - dy) + f(xm - dx, ym + dy) + f(xm + dx, ym - dy) +
            f(xm + dx, ym + dy));
    }
  }
  return s * xh * yh;
}

template <class F>
double integrate2d_adaptive_rec(F& f, double x0, double x1, double y0,
                                double y1, double whole, double abs_tol,
                                int depth, long long& budget) {
  const double xm = 0.5 * (x0 + x1), ym = 0.5 * (y0 + y1);
  const double q00 = gl8_panel_2d(f, x0, xm, y0, ym);
  const double q10 = gl8_panel_2d(f, xm, x1, y0, ym);
  const double q01 = gl8_panel_2d(f, x0, xm, ym, y1);
  const double q11 = gl8_panel_2d(f, xm, x1, ym, y1);
  const double split = q00 + q10 + q01 + q11;
  budget -= 4;
  const double floor = 1e-16 * (std::abs(q00) + std::abs(q10) +
                                std::abs(q01) + std::abs(q11) +
                                std::abs(whole));
  if (std::abs(split - whole) <= std::max(abs_tol, floor) || depth >= 26 ||
      budget <= 0)
    return split;
  const double t = 0.25 * abs_tol;
  return integrate2d_adaptive_rec(f, x0, xm, y0, ym, q00, t, depth + 1,
                                  budget) +
         integrate2d_adaptive_rec(f, xm, x1, y0, ym, q10, t, depth + 1,
                                  budget) +
         integrate2d_adaptive_rec(f, x0, xm, ym, y1, q01, t, depth + 1,
                                  budget) +
         integrate2d_adaptive_rec(f, xm, x1, ym, y1, q11, t, depth + 1,
                                  budget);
}

}  // namespace detail

// Adaptive bisection around GL8 panels until the local two-half vs whole
// discrepancy drops below the (subdivided) absolute budget.
template <class F>
double integrate_adaptive(F&& f, double a, double b, double abs_tol) {
  if (a == b) return 0.0;
  long long budget = 1 << 16;
  return detail::integrate_adaptive_rec(f, a, b, gl8_panel(f, a, b), abs_tol,
                                        0, budget);
}

// Same with a relative target: the budget is rel_tol of a first estimate.
template <class F>
double integrate_adaptive_rel(F&& f, double a, double b,
                              double rel_tol = 1e-12) {
  if (a == b) return 0.0;
  const double rough = gl8_panel(f, a, b);
  const double abs_tol =
      rel_tol * std::max(std::abs(rough), std::abs(b - a) * 1e-30);
  long long budget = 1 << 16;
  return detail::integrate_adaptive_rec(f, a, b, rough, abs_tol, 0, budget);
}

// Adaptive tensor quadrature over an axis-aligned rectangle.
template <class F>
double integrate2d_adaptive(F&& f, double x0, double x1, double y0, double y1,
                            double abs_tol) {
  if (x0 == x1 || y0 == y1) return 0.0;
  const double rough = detail::gl8_panel_2d(f, x0, x1, y0, y1);
  long long budget = 1 << 18;
  return detail::integrate2d_adaptive_rec(f, x0, x1, y0, y1, rough, abs_tol,
                                          0, budget);
}

// Least-squares slope of y against x (used for log-log exponent fits).
inline double fit_slope(const std::vector<double>& x,
                        const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / sxx;
}

// Fixed-format decimal with 17 significant digits: round-trips doubles
// exactly and is locale-independent (printf uses the "C" locale here).
inline std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf);
}

}  // namespace srlab
