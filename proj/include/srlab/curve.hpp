// Sampled plane curves: the universal carrier for every curve in the
// construction. Piecewise-linear interpretation between nodes; controls are
// piecewise constant.
#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"

namespace srlab {

struct Vec2 {
  double x1 = 0.0, x2 = 0.0;
};

inline Vec2 operator-(const Vec2& a, const Vec2& b) {
  return {a.x1 - b.x1, a.x2 - b.x2};
}
inline double norm(const Vec2& v) { return std::hypot(v.x1, v.x2); }

struct PlaneCurve {
  std::vector<double> params;  // strictly increasing
  std::vector<Vec2> points;    // aligned with params

  std::size_t size() const { return params.size(); }
  const Vec2& front() const { return points.front(); }
  const Vec2& back() const { return points.back(); }
};

// Node counts and junction gaps must satisfy the carrier's invariants before
// any quadrature touches the curve.
inline void validate(const PlaneCurve& c) {
  if (c.params.size() < 2 || c.params.size() != c.points.size())
    throw domain_error("curve needs at least two aligned (param, point) nodes");
  for (std::size_t i = 0; i < c.params.size(); ++i) {
    if (!std::isfinite(c.params[i]) || !std::isfinite(c.points[i].x1) ||
        !std::isfinite(c.points[i].x2))
      throw domain_error("curve contains a non-finite sample");
    if (i > 0 && !(c.params[i] > c.params[i - 1]))
      throw domain_error("curve parameters must be strictly increasing");
  }
}

constexpr double kJunctionTol = 1e-14;

inline bool is_closed(const PlaneCurve& c, double tol = 1e-12) {
  return norm(c.front() - c.back()) <= tol;
}

// Euclidean length of the polyline, compensated so 1e-12-scale differences
// between curves of length O(1) survive 3e4-term sums.
inline double polyline_length(const PlaneCurve& c) {
  CompensatedSum s;
  for (std::size_t i = 1; i < c.size(); ++i)
    s.add(norm(c.points[i] - c.points[i - 1]));
  return s.value();
}

// Concatenation a * b. Junctions must coincide (absolute gap <= 1e-14); the
// shared node is stored once and b's parameters are shifted to continue a's.
inline PlaneCurve concat(const PlaneCurve& a, const PlaneCurve& b) {
  validate(a);
  validate(b);
  const double gap = norm(a.back() - b.front());
  if (gap > kJunctionTol)
    throw construction_error("junction mismatch of " + fmt17(gap) +
                             " between concatenated curves");
  PlaneCurve out = a;
  const double shift = a.params.back() - b.params.front();
  out.params.reserve(a.size() + b.size() - 1);
  out.points.reserve(a.size() + b.size() - 1);
  for (std::size_t i = 1; i < b.size(); ++i) {
    out.params.push_back(b.params[i] + shift);
    out.points.push_back(b.points[i]);
  }
  return out;
}

// Orientation reversal -c; node values are preserved bitwise and parameters
// are mirrored onto the same interval, so reversal is an involution.
inline PlaneCurve reverse(const PlaneCurve& c) {
  validate(c);
  PlaneCurve out;
  const std::size_t n = c.size();
  out.params.resize(n);
  out.points.resize(n);
  const double lo = c.params.front(), hi = c.params.back();
  for (std::size_t i = 0; i < n; ++i) {
    out.params[i] = lo + (hi - c.params[n - 1 - i]);
    out.points[i] = c.points[n - 1 - i];
  }
  // Mirroring can collapse adjacent parameters by rounding; nudge is never
  // needed because t -> lo + (hi - t) is strictly monotone in exact
  // arithmetic and the doubles involved are distinct.
  return out;
}

// -- CSV serialization ----------------------------------------------------
// Columns t,x1,x2[,x3]; 17 significant digits so the round-trip is
// bit-exact.

inline void write_curve_csv(std::ostream& os, const PlaneCurve& c,
                            const std::vector<double>* x3 = nullptr) {
  os << (x3 ? "t,x1,x2,x3\n" : "t,x1,x2\n");
  for (std::size_t i = 0; i < c.size(); ++i) {
    os << fmt17(c.params[i]) << ',' << fmt17(c.points[i].x1) << ','
       << fmt17(c.points[i].x2);
    if (x3) os << ',' << fmt17((*x3)[i]);
    os << '\n';
  }
}

inline PlaneCurve read_curve_csv(std::istream& is,
                                 std::vector<double>* x3 = nullptr) {
  PlaneCurve c;
  std::string line;
  if (!std::getline(is, line)) throw domain_error("empty curve CSV");
  const bool has_x3 = line.find("x3") != std::string::npos;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    double vals[4] = {0, 0, 0, 0};
    int k = 0;
    while (std::getline(ls, cell, ',') && k < 4) vals[k++] = std::stod(cell);
    if (k < 3) throw domain_error("curve CSV row with fewer than 3 columns");
    c.params.push_back(vals[0]);
    c.points.push_back({vals[1], vals[2]});
    if (has_x3 && x3) x3->push_back(vals[3]);
  }
  validate(c);
  return c;
}

// -- arc length and reparameterization -------------------------------------

inline std::vector<double> cumulative_chord_length(const PlaneCurve& c) {
  std::vector<double> s(c.size(), 0.0);
  CompensatedSum acc;
  for (std::size_t i = 1; i < c.size(); ++i) {
    acc.add(norm(c.points[i] - c.points[i - 1]));
    s[i] = acc.value();
  }
  return s;
}

// Monotone cubic (Fritsch-Carlson) interpolant through (x_i, y_i); used to
// reparameterize sampled curves by arc length without overshoot.
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    m_.assign(n, 0.0);
    if (n < 2) return;
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i)
      d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
    m_[0] = d[0];
    m_[n - 1] = d[n - 2];
    for (std::size_t i = 1; i + 1 < n; ++i)
      m_[i] = (d[i - 1] * d[i] <= 0.0) ? 0.0 : 0.5 * (d[i - 1] + d[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (d[i] == 0.0) {
        m_[i] = m_[i + 1] = 0.0;
        continue;
      }
      const double al = m_[i] / d[i], be = m_[i + 1] / d[i];
      const double r = al * al + be * be;
      if (r > 9.0) {
        const double t = 3.0 / std::sqrt(r);
        m_[i] = t * al * d[i];
        m_[i + 1] = t * be * d[i];
      }
    }
  }

  double operator()(double x) const {
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i =
        it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double t = (x - x_[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * h * m_[i] +
           (-2 * t3 + 3 * t2) * y_[i + 1] + (t3 - t2) * h * m_[i + 1];
  }

 private:
  std::vector<double> x_, y_, m_;
};

// Resample a curve at m+1 equally spaced arc-length fractions; the original
// parameter is carried through the monotone cubic.
inline PlaneCurve resample_by_arclength(const PlaneCurve& c, std::size_t m) {
  validate(c);
  const std::vector<double> s = cumulative_chord_length(c);
  const double total = s.back();
  if (total <= 0.0) throw domain_error("cannot reparameterize a point curve");
  MonotoneCubic t_of_s(s, c.params);
  PlaneCurve out;
  out.params.resize(m + 1);
  out.points.resize(m + 1);
  std::size_t seg = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    const double sk = total * static_cast<double>(k) / static_cast<double>(m);
    while (seg + 2 < s.size() && s[seg + 1] < sk) ++seg;
    const double ds = s[seg + 1] - s[seg];
    const double w = ds > 0.0 ? (sk - s[seg]) / ds : 0.0;
    out.params[k] = t_of_s(sk);
    out.points[k] = {c.points[seg].x1 + w * (c.points[seg + 1].x1 - c.points[seg].x1),
                     c.points[seg].x2 + w * (c.points[seg + 1].x2 - c.points[seg].x2)};
  }
  // The cubic is monotone but adjacent resampled parameters can tie at
  // rounding level; enforce strict increase for downstream consumers.
  for (std::size_t k = 1; k <= m; ++k)
    if (out.params[k] <= out.params[k - 1])
      out.params[k] = std::nextafter(out.params[k - 1],
                                     std::numeric_limits<double>::infinity());
  return out;
}

}  // namespace srlab
