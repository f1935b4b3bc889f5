// Direct length minimization over sampled plane curves with pinned endpoints
// under the discrete lift constraint I = 0: an augmented-Lagrangian outer
// loop around gradient descent with Armijo backtracking.  The constraint is
// the trapezoidal rule on the node polygon so its analytic gradient is exact
// for the discrete problem; the returned curve is re-scored with the exact
// per-chord quadrature as an independent check.  Also provides the
// unit-tangent (control) distance between curves used by the rigidity
// diagnostics.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <future>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "srlab/builders.hpp"
#include "srlab/competitor.hpp"
#include "srlab/curve.hpp"
#include "srlab/errors.hpp"
#include "srlab/lift.hpp"
#include "srlab/numeric.hpp"
#include "srlab/stokes.hpp"
#include "srlab/structure.hpp"

namespace srlab {

// Trapezoidal lift defect I, polyline length L, and their exact per-node
// gradients.  The gradients are those of the discrete functionals, not
// discretizations of continuum gradients: descent directions computed from
// them are descent directions for the problem actually being solved.
struct ConstraintGradient {
  double I = 0.0;
  double L = 0.0;
  std::vector<Vec2> dI;
  std::vector<Vec2> dL;
};

inline ConstraintGradient constraint_and_gradient(const PlaneCurve& c,
                                                  const StructureDef& s) {
  detail::require_polynomial(s, "constraint_and_gradient");
  validate(c);
  const std::size_t n = c.size();
  ConstraintGradient out;
  out.dI.assign(n, Vec2{0.0, 0.0});
  out.dL.assign(n, Vec2{0.0, 0.0});
  // psi = P^c and its two partials at every node.
  std::vector<double> psi(n), dpsi_dx1(n), dpsi_dx2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = c.points[i].x1;
    const double x2 = c.points[i].x2;
    const double P = eval_P(x1, x2, s);
    const double Pc1 = powi(P, s.c() - 1);
    psi[i] = Pc1 * P;
    dpsi_dx1[i] = s.c() * s.a() * powi(x1, s.a() - 1) * Pc1;
    dpsi_dx2[i] = -s.c() * s.b() * powi(x2, s.b() - 1) * Pc1;
  }
  CompensatedSum I, L;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const Vec2 d = c.points[k + 1] - c.points[k];
    const double len = norm(d);
    if (len == 0.0)
      throw gradient_undefined_error("zero-length edge between nodes " +
                                     std::to_string(k) + " and " +
                                     std::to_string(k + 1));
    const double dy = d.x2;
    const double pair = 0.5 * (psi[k] + psi[k + 1]);
    I.add(pair * dy);
    L.add(len);
    const Vec2 e{d.x1 / len, d.x2 / len};
    out.dL[k].x1 -= e.x1;
    out.dL[k].x2 -= e.x2;
    out.dL[k + 1].x1 += e.x1;
    out.dL[k + 1].x2 += e.x2;
    out.dI[k].x1 += 0.5 * dpsi_dx1[k] * dy;
    out.dI[k + 1].x1 += 0.5 * dpsi_dx1[k + 1] * dy;
    out.dI[k].x2 += 0.5 * dpsi_dx2[k] * dy - pair;
    out.dI[k + 1].x2 += 0.5 * dpsi_dx2[k + 1] * dy + pair;
  }
  out.I = I.value();
  out.L = L.value();
  return out;
}

// Sup distance between the unit-tangent (control) fields of two curves after
// both are resampled to the same constant-speed grid between their matched
// endpoints.  Ranges over [0, 2]; any stretch where one curve reverses
// direction against the other contributes ~2.
inline double control_distance(const PlaneCurve& c1, const PlaneCurve& c2,
                               std::size_t grid = 4096) {
  if (grid < 2) throw domain_error("control_distance: grid must be >= 2");
  if (norm(c1.front() - c2.front()) > 1e-9 ||
      norm(c1.back() - c2.back()) > 1e-9)
    throw domain_error("control_distance: endpoint mismatch exceeds 1e-9");
  const PlaneCurve r1 = resample_by_arclength(c1, grid);
  const PlaneCurve r2 = resample_by_arclength(c2, grid);
  double worst = 0.0;
  for (std::size_t k = 0; k < grid; ++k) {
    const Vec2 d1 = r1.points[k + 1] - r1.points[k];
    const Vec2 d2 = r2.points[k + 1] - r2.points[k];
    const double l1 = norm(d1);
    const double l2 = norm(d2);
    if (l1 == 0.0 || l2 == 0.0) continue;  // point-repeat carries no control
    const double gx = d1.x1 / l1 - d2.x1 / l2;
    const double gy = d1.x2 / l1 - d2.x2 / l2;
    worst = std::max(worst, std::hypot(gx, gy));
  }
  return worst;
}

struct OptimizeOptions {
  std::size_t max_outer = 12;
  std::size_t max_inner = 4000;
  double mu0 = 10.0;        // initial penalty weight
  double mu_factor = 10.0;  // penalty growth per outer iteration
  double armijo_c = 1e-4;   // sufficient-decrease fraction
  double step0 = 0.01;      // initial trial step, adapted by backtracking
  double tol_g = 1e-6;      // sup-norm target for the KKT gradient
  double tol_c = 0.0;       // <= 0: 1e-9 * the cut displacement scale at eps
  double lambda0 = 0.0;     // initial multiplier (warm start for re-runs)
  std::size_t restore_steps = 12;  // Newton polish steps on I per outer
  std::size_t snapshot_every = 0;  // outer iterations between CSV dumps; 0 off
  std::string snapshot_prefix = "optimize_snapshot";
};

struct OptimizationResult {
  PlaneCurve curve;
  double length = 0.0;
  // Optimized length re-measured after a descent pass at doubled resolution
  // and Richardson-extrapolated (chord error is O(h^2)); NaN until filled by
  // richardson_length / optimize_multistart.
  double length_richardson = std::numeric_limits<double>::quiet_NaN();
  double constraint_residual = 0.0;        // trapezoidal I (optimized object)
  double constraint_residual_exact = 0.0;  // exact per-chord quadrature
  double grad_norm = std::numeric_limits<double>::infinity();  // KKT sup-norm
  double multiplier = 0.0;  // final Lagrange multiplier estimate
  double tol_c = 0.0;  // thresholds the convergence flag was judged against
  double tol_g = 0.0;
  std::size_t iterations = 0;  // accepted descent steps over all outers
  bool converged = false;
  double control_distance_to_gamma =
      std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline double al_merit(const ConstraintGradient& cg, double lambda,
                       double mu) {
  return cg.L + lambda * cg.I + 0.5 * mu * cg.I * cg.I;
}

}  // namespace detail

// Minimize polyline length over the interior nodes subject to the
// trapezoidal lift constraint I = 0, endpoints pinned at init's.  Augmented
// Lagrangian: penalty starts at mu0 and grows by mu_factor per outer
// iteration (at most max_outer of them); the inner solver is gradient
// descent with Armijo backtracking, so the merit value never increases
// across accepted steps.  Each outer iteration ends with a few Newton polish
// steps on the scalar constraint along its own gradient (feasibility
// restoration); convergence means |I| <= tol_c and the sup-norm of the
// Lagrangian gradient <= tol_g with the updated multiplier.  Returns the
// best feasible iterate seen (the final iterate if none was feasible).
// Deterministic: fixed schedule, no randomness.
inline OptimizationResult optimize(const PlaneCurve& init, double eps,
                                   const StructureDef& s,
                                   const OptimizeOptions& opts = {}) {
  detail::require_polynomial(s, "optimize");
  validate(init);
  if (init.size() < 16)
    throw domain_error("optimize: at least 16 nodes required");
  if (!(eps > 0.0) || !std::isfinite(eps))
    throw domain_error("optimize: eps must be positive and finite");
  const Vec2 goal = gamma_point(eps, +1, +1, s);
  if (norm(init.front() - Vec2{0.0, 0.0}) > 1e-9 ||
      norm(init.back() - goal) > 1e-9)
    throw domain_error(
        "optimize: init endpoints must match (0,0) and the model curve's "
        "endpoint at eps");

  const double cut_scale = delta3_cut(eps, s);
  const double tolc =
      opts.tol_c > 0.0 ? opts.tol_c : std::max(1e-9 * cut_scale, 1e-16);

  PlaneCurve x = init;
  ConstraintGradient cg = constraint_and_gradient(x, s);
  const std::size_t n = x.size();
  double lambda = opts.lambda0;
  double mu = opts.mu0;
  double step = opts.step0;
  std::size_t accepted = 0;
  int no_descent_streak = 0;
  bool conv = false;
  double kkt = std::numeric_limits<double>::infinity();

  PlaneCurve best_x = x;
  double best_L = std::numeric_limits<double>::infinity();
  bool have_best = false;
  auto consider_best = [&](const PlaneCurve& cand,
                           const ConstraintGradient& c2) {
    if (std::abs(c2.I) <= tolc && c2.L < best_L) {
      best_x = cand;
      best_L = c2.L;
      have_best = true;
    }
  };
  consider_best(x, cg);

  std::vector<Vec2> g(n, Vec2{0.0, 0.0});
  for (std::size_t outer = 0; outer < opts.max_outer; ++outer) {
    for (std::size_t inner = 0; inner < opts.max_inner; ++inner) {
      const double w = lambda + mu * cg.I;
      double ginf = 0.0, g2 = 0.0;
      for (std::size_t j = 1; j + 1 < n; ++j) {
        g[j] = {cg.dL[j].x1 + w * cg.dI[j].x1,
                cg.dL[j].x2 + w * cg.dI[j].x2};
        ginf = std::max({ginf, std::abs(g[j].x1), std::abs(g[j].x2)});
        g2 += g[j].x1 * g[j].x1 + g[j].x2 * g[j].x2;
      }
      if (ginf <= opts.tol_g) break;
      const double phi0 = detail::al_merit(cg, lambda, mu);
      bool took_step = false;
      for (int bt = 0; bt < 60 && step >= 1e-18; ++bt) {
        PlaneCurve trial = x;
        for (std::size_t j = 1; j + 1 < n; ++j) {
          trial.points[j].x1 -= step * g[j].x1;
          trial.points[j].x2 -= step * g[j].x2;
        }
        bool usable = true;
        ConstraintGradient t;
        try {
          t = constraint_and_gradient(trial, s);
        } catch (const gradient_undefined_error&) {
          usable = false;  // collapsed edge: treat the trial as rejected
        }
        if (usable && detail::al_merit(t, lambda, mu) <=
                          phi0 - opts.armijo_c * step * g2) {
          x.points.swap(trial.points);
          cg = std::move(t);
          consider_best(x, cg);
          step = std::min(step * 2.0, 1.0);
          took_step = true;
          break;
        }
        step *= 0.5;
      }
      if (!took_step) {
        if (++no_descent_streak >= 50)
          throw divergence_error(
              "optimize: no descent step found in 50 consecutive attempts");
        break;  // hand control back to the outer update
      }
      no_descent_streak = 0;
      ++accepted;
    }

    lambda += mu * cg.I;

    // Feasibility restoration: damped Newton on the scalar I along its own
    // gradient direction.  Quadratic near the constraint manifold, and the
    // induced length change is second order in |I|; the damping guards the
    // near-degenerate case where the curve hugs the zero locus and ||dI||
    // is tiny, making the full step overshoot.
    for (std::size_t r = 0;
         r < opts.restore_steps && std::abs(cg.I) > 0.25 * tolc; ++r) {
      double d2 = 0.0;
      for (std::size_t j = 1; j + 1 < n; ++j)
        d2 += cg.dI[j].x1 * cg.dI[j].x1 + cg.dI[j].x2 * cg.dI[j].x2;
      if (!(d2 > 0.0)) break;
      double scale = cg.I / d2;
      bool improved = false;
      for (int damp = 0; damp < 30 && !improved; ++damp, scale *= 0.5) {
        PlaneCurve trial = x;
        for (std::size_t j = 1; j + 1 < n; ++j) {
          trial.points[j].x1 -= scale * cg.dI[j].x1;
          trial.points[j].x2 -= scale * cg.dI[j].x2;
        }
        try {
          ConstraintGradient t = constraint_and_gradient(trial, s);
          if (std::abs(t.I) < std::abs(cg.I)) {
            x.points.swap(trial.points);
            cg = std::move(t);
            consider_best(x, cg);
            improved = true;
          }
        } catch (const gradient_undefined_error&) {
          // collapsed edge at this damping level: halve and retry
        }
      }
      if (!improved) break;
    }

    kkt = 0.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      kkt = std::max({kkt, std::abs(cg.dL[j].x1 + lambda * cg.dI[j].x1),
                      std::abs(cg.dL[j].x2 + lambda * cg.dI[j].x2)});
    }
    if (opts.snapshot_every != 0 && (outer + 1) % opts.snapshot_every == 0) {
      std::ofstream os(opts.snapshot_prefix + "_outer" +
                       std::to_string(outer + 1) + ".csv");
      write_curve_csv(os, x);
    }
    if (std::abs(cg.I) <= tolc && kkt <= opts.tol_g) {
      conv = true;
      break;
    }
    mu *= opts.mu_factor;
  }

  OptimizationResult res;
  res.curve = have_best ? best_x : x;
  const ConstraintGradient fin = constraint_and_gradient(res.curve, s);
  res.length = fin.L;
  res.constraint_residual = fin.I;
  res.constraint_residual_exact = lift_increment(res.curve, s);
  res.grad_norm = kkt;
  res.multiplier = lambda;
  res.tol_c = tolc;
  res.tol_g = opts.tol_g;
  res.iterations = accepted;
  res.converged = conv && std::abs(fin.I) <= tolc;
  res.control_distance_to_gamma =
      control_distance(res.curve, make_gamma(eps, +1, +1, s, 4096));
  return res;
}

// -- multistart ------------------------------------------------------------

// The model curve itself on its graded mesh, as a descent start.
inline PlaneCurve make_gamma_init(double eps, const StructureDef& s,
                                  std::size_t nodes = 400) {
  if (nodes < 16) throw domain_error("make_gamma_init: nodes must be >= 16");
  return make_gamma(eps, +1, +1, s, nodes - 1);
}

// The analytic competitor as a descent start: cut + shared tail resampled to
// constant speed, with the four correction-rectangle nodes appended
// verbatim.  Resampling the rectangle away would silently re-open the lift
// defect it exists to cancel, so its circuit is spliced in explicitly.
inline PlaneCurve make_omega_init(double eps, const StructureDef& s,
                                  std::size_t nodes = 400,
                                  double safety = 0.5) {
  if (nodes < 32) throw domain_error("make_omega_init: nodes must be >= 32");
  const CompetitorParams cp = solve_params(eps, s, safety);
  const PlaneCurve base = make_gamma(eps, +1, +1, s, 4096);
  const PlaneCurve body =
      concat(make_kappa(cp, s), slice_gamma_tail(base, cp.rho, s));
  PlaneCurve rs = resample_by_arclength(body, nodes - 5);
  rs.points.back() = body.points.back();  // keep the corner exact
  const PlaneCurve sigma = make_sigma(cp, s, 1);
  PlaneCurve out;
  out.points = rs.points;
  for (std::size_t i = 1; i < sigma.size(); ++i)
    out.points.push_back(sigma.points[i]);
  out.params.resize(out.points.size());
  for (std::size_t i = 0; i < out.params.size(); ++i)
    out.params[i] = static_cast<double>(i);
  validate(out);
  return out;
}

struct LabeledRun {
  std::string name;
  OptimizationResult result;
};

struct MultistartResult {
  std::string best_name;
  OptimizationResult best;
  std::vector<LabeledRun> runs;
};

// Every edge split at its midpoint: identical geometry and length, twice
// the resolution.  The refinement start for the Richardson check must be
// the same polyline -- an arclength resample would erase sub-grid features
// (the correction rectangle) and hand the refined descent a different
// basin, which is a new search, not a resolution study.
inline PlaneCurve refine_midpoints(const PlaneCurve& c) {
  validate(c);
  PlaneCurve out;
  out.params.reserve(2 * c.size() - 1);
  out.points.reserve(2 * c.size() - 1);
  for (std::size_t i = 0; i + 1 < c.size(); ++i) {
    out.params.push_back(c.params[i]);
    out.points.push_back(c.points[i]);
    out.params.push_back(0.5 * (c.params[i] + c.params[i + 1]));
    out.points.push_back({0.5 * (c.points[i].x1 + c.points[i + 1].x1),
                          0.5 * (c.points[i].x2 + c.points[i + 1].x2)});
  }
  out.params.push_back(c.params.back());
  out.points.push_back(c.points.back());
  return out;
}

// Descent pass at doubled resolution started from the result's own curve
// (midpoint-refined), Richardson-extrapolated against the base length
// (chord error is O(h^2)).
inline double richardson_length(const OptimizationResult& base, double eps,
                                const StructureDef& s,
                                OptimizeOptions opts = {}) {
  opts.snapshot_every = 0;
  opts.lambda0 = base.multiplier;  // polish locally, don't re-learn the dual
  const OptimizationResult r2 = optimize(refine_midpoints(base.curve), eps, s, opts);
  return r2.length + (r2.length - base.length) / 3.0;
}

// Run the descent from the model-curve start and (when the competitor is
// constructible) the competitor start, in parallel, and keep the shorter
// result; fills length_richardson on the winner.
inline MultistartResult optimize_multistart(double eps, const StructureDef& s,
                                            std::size_t nodes = 400,
                                            const OptimizeOptions& opts = {},
                                            bool with_richardson = true) {
  detail::require_polynomial(s, "optimize_multistart");
  std::vector<std::pair<std::string, PlaneCurve>> starts;
  starts.emplace_back("gamma_init", make_gamma_init(eps, s, nodes));
  if (criterion(s).constructible)
    starts.emplace_back("omega_init", make_omega_init(eps, s, nodes));

  std::vector<std::future<OptimizationResult>> futs;
  futs.reserve(starts.size());
  for (auto& st : starts) {
    const PlaneCurve& c = st.second;
    futs.push_back(std::async(std::launch::async, [c, eps, &s, &opts]() {
      return optimize(c, eps, s, opts);
    }));
  }
  MultistartResult out;
  for (std::size_t i = 0; i < starts.size(); ++i)
    out.runs.push_back(LabeledRun{starts[i].first, futs[i].get()});
  std::size_t best = 0;
  for (std::size_t i = 1; i < out.runs.size(); ++i)
    if (out.runs[i].result.length < out.runs[best].result.length) best = i;
  out.best_name = out.runs[best].name;
  out.best = out.runs[best].result;
  if (with_richardson)
    out.best.length_richardson = richardson_length(out.best, eps, s, opts);
  return out;
}

}  // namespace srlab
