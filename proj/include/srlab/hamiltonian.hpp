// Normal-extremal machinery: the Hamiltonian H = 1/2 p1^2 + 1/2 h^2 with
// h = p2 phi + p3 psi, its canonical flow under a classical fixed-step
// fourth-order scheme, and the scale-free residual of the polynomial-family
// normality condition p1^a t^a = p2^b t^b.
#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <ostream>
#include <vector>

#include "srlab/errors.hpp"
#include "srlab/numeric.hpp"
#include "srlab/structure.hpp"

namespace srlab {

// Point-covector pair; p's components are the covector entries (p1,p2,p3)
// stored in the same triple type as x.
struct HamiltonianState {
  Vec3 x;
  Vec3 p;
};

// H(x,p) = 1/2 p1^2 + 1/2 (p2 phi + p3 psi)^2.
inline double ham_eval(const HamiltonianState& st, const StructureDef& s) {
  const FieldValues f = eval_fields(st.x, s);
  const double h = st.p.x2 * f.phi + st.p.x3 * f.psi;
  return 0.5 * st.p.x1 * st.p.x1 + 0.5 * h * h;
}

namespace detail {

// Right side of the canonical system xdot = dH/dp, pdot = -dH/dx, packed as
// (x1,x2,x3,p1,p2,p3).
inline std::array<double, 6> ham_rhs(const std::array<double, 6>& y,
                                     const StructureDef& s) {
  const FieldDerivs f = eval_field_derivs(Vec3{y[0], y[1], y[2]}, s);
  const double h = y[4] * f.phi + y[5] * f.psi;
  return {y[3],
          h * f.phi,
          h * f.psi,
          -h * (y[4] * f.dphi[0] + y[5] * f.dpsi[0]),
          -h * (y[4] * f.dphi[1] + y[5] * f.dpsi[1]),
          -h * (y[4] * f.dphi[2] + y[5] * f.dpsi[2])};
}

// One classical RK4 step.  The stage combination is divided once at the end,
// so a constant right side advances the state by exactly h * k: trajectories
// whose equations are exact in floating point (stationary states, the
// straight abnormal line of the x1^2 kind) stay exact under the integrator.
inline std::array<double, 6> rk4_step(const std::array<double, 6>& y, double h,
                                      const StructureDef& s) {
  const std::array<double, 6> k1 = ham_rhs(y, s);
  std::array<double, 6> t;
  for (int j = 0; j < 6; ++j) t[j] = y[j] + 0.5 * h * k1[j];
  const std::array<double, 6> k2 = ham_rhs(t, s);
  for (int j = 0; j < 6; ++j) t[j] = y[j] + 0.5 * h * k2[j];
  const std::array<double, 6> k3 = ham_rhs(t, s);
  for (int j = 0; j < 6; ++j) t[j] = y[j] + h * k3[j];
  const std::array<double, 6> k4 = ham_rhs(t, s);
  std::array<double, 6> out;
  for (int j = 0; j < 6; ++j)
    out[j] = y[j] + h * ((k1[j] + 2.0 * (k2[j] + k3[j]) + k4[j]) / 6.0);
  return out;
}

}  // namespace detail

// Sampled trajectory of the canonical flow; states[i] holds the state at
// t[i], including the initial state at t[0] = 0.
struct HamiltonianTrajectory {
  std::vector<double> t;
  std::vector<HamiltonianState> states;
  std::size_t size() const { return t.size(); }
};

// Integrate the canonical system over [0, T] with a fixed step.  The step
// actually used is T/n for the smallest n with T/n <= step up to rounding,
// so a step that divides T is honored bitwise; every step is recorded.
inline HamiltonianTrajectory ham_flow(const HamiltonianState& st0, double T,
                                      const StructureDef& s, double step) {
  if (!(T > 0.0) || !std::isfinite(T))
    throw domain_error("ham_flow: T must be positive and finite");
  if (!(step > 0.0) || !std::isfinite(step))
    throw domain_error("ham_flow: step must be positive and finite");
  const double raw = T / step;
  if (raw > 2e8)
    throw domain_error("ham_flow: step " + fmt17(step) + " over T = " +
                       fmt17(T) + " needs more than 2e8 steps");
  std::size_t n = static_cast<std::size_t>(std::ceil(raw - 1e-12));
  if (n == 0) n = 1;
  const double h = T / static_cast<double>(n);

  HamiltonianTrajectory out;
  out.t.reserve(n + 1);
  out.states.reserve(n + 1);
  std::array<double, 6> y = {st0.x.x1, st0.x.x2, st0.x.x3,
                             st0.p.x1, st0.p.x2, st0.p.x3};
  double t = 0.0;
  out.t.push_back(t);
  out.states.push_back(st0);
  for (std::size_t k = 0; k < n; ++k) {
    y = detail::rk4_step(y, h, s);
    for (int j = 0; j < 6; ++j)
      if (!std::isfinite(y[j]))
        throw blow_up_error("ham_flow: state became non-finite; last valid "
                            "time t = " + fmt17(t));
    t += h;
    out.t.push_back(t);
    out.states.push_back(
        HamiltonianState{{y[0], y[1], y[2]}, {y[3], y[4], y[5]}});
  }
  return out;
}

// Columns t,x1,x2,x3,p1,p2,p3,H; 17 significant digits.
inline void write_trajectory_csv(std::ostream& os,
                                 const HamiltonianTrajectory& traj,
                                 const StructureDef& s) {
  os << "t,x1,x2,x3,p1,p2,p3,H\n";
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const HamiltonianState& st = traj.states[i];
    os << fmt17(traj.t[i]) << ',' << fmt17(st.x.x1) << ',' << fmt17(st.x.x2)
       << ',' << fmt17(st.x.x3) << ',' << fmt17(st.p.x1) << ','
       << fmt17(st.p.x2) << ',' << fmt17(st.p.x3) << ','
       << fmt17(ham_eval(st, s)) << '\n';
  }
}

// Scale-free defect of the normality condition along the model curve: the
// covector of a normal lift with p3 = const would need p1^a t^a = p2^b t^b
// for all t in [0, eps].  Substituting t = eps*u reduces the check to the
// unit interval with coefficients (p1 eps)^a and (p2 eps)^b; the result is
// the max over a uniform u-grid of their weighted gap, normalized by the
// larger coefficient magnitude (the covector is projective, so only the
// direction of (p1,p2) matters).  Zero is attained exactly when a = b and
// p1 = p2; for a != b the value is strictly positive for every unit
// covector.
inline double normality_residual(double p1, double p2, double eps,
                                 const StructureDef& s,
                                 std::size_t grid = 512) {
  detail::require_polynomial(s, "normality_residual");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw domain_error("normality_residual: eps must be positive and finite");
  if (grid < 2) throw domain_error("normality_residual: grid must be >= 2");
  if (std::abs(std::hypot(p1, p2) - 1.0) > 1e-12)
    throw domain_error("normality_residual: (p1,p2) must be a unit covector");
  const double A = powi(p1 * eps, s.a());
  const double B = powi(p2 * eps, s.b());
  const double scale = std::max(std::abs(A), std::abs(B));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid; ++i) {
    const double u = double(i) / double(grid - 1);
    const double gap = std::abs(A * powi(u, s.a()) - B * powi(u, s.b()));
    if (gap > worst) worst = gap;
  }
  return worst / scale;
}

// Minimum of normality_residual over n unit covectors sampled uniformly in
// angle.  When n is divisible by 8 the four diagonal directions are pinned
// to exact (+-sqrt(1/2), +-sqrt(1/2)) pairs, so the a = b root p1 = p2 is
// realized bitwise instead of up to trig rounding.
inline double normality_scan(std::size_t n, double eps, const StructureDef& s,
                             std::size_t grid = 512) {
  if (n == 0) throw domain_error("normality_scan: need at least one covector");
  const double diag = std::sqrt(0.5);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double p1, p2;
    if (n % 8 == 0 && j % (n / 8) == 0 && (j / (n / 8)) % 2 == 1) {
      const std::size_t octant = j / (n / 8);  // 1, 3, 5, 7
      p1 = (octant == 1 || octant == 7) ? diag : -diag;
      p2 = (octant == 1 || octant == 3) ? diag : -diag;
    } else {
      const double th = 2.0 * std::numbers::pi * double(j) / double(n);
      p1 = std::cos(th);
      p2 = std::sin(th);
    }
    const double r = normality_residual(p1, p2, eps, s, grid);
    if (r < best) best = r;
  }
  return best;
}

}  // namespace srlab
