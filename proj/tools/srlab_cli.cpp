// srlab -- command-line front end: criterion verdicts, competitor
// construction and verification, weighted-area (Stokes) cross-checks,
// Hamiltonian flows, descent runs, and (a, b) sweeps, with CSV/JSON output
// for external plotting.
//
// Exit codes: 0 success, 2 validation error (rejected input), 3 numerical
// failure (bracket, divergence, resolution, blow-up).
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srlab/builders.hpp"
#include "srlab/competitor.hpp"
#include "srlab/curve.hpp"
#include "srlab/hamiltonian.hpp"
#include "srlab/lift.hpp"
#include "srlab/optimizer.hpp"
#include "srlab/report_io.hpp"
#include "srlab/stokes.hpp"
#include "srlab/structure.hpp"
#include "srlab/sweep.hpp"

namespace {

using namespace srlab;

// Shared flag bundle; each subcommand registers the subset it uses.
struct Args {
  int a = 2, b = 3, c = 2;
  std::string kind = "polynomial";
  double eps = 1.0;
  double rho = 0.0;    // 0: solve for it
  double delta = 0.0;  // 0: solve for it
  double safety = 0.5;
  std::size_t nodes = 4096;
  std::size_t grid = 1024;
  double T = 1.0;
  double step = 1e-3;
  bool json = false;
  std::string out;
};

StructureDef make_structure(const Args& a) {
  if (a.kind == "polynomial") return StructureDef::polynomial(a.a, a.b, a.c);
  if (a.kind == "heisenberg") return StructureDef::heisenberg();
  if (a.kind == "martinet") return StructureDef::martinet();
  if (a.kind == "liu_sussmann") return StructureDef::liu_sussmann();
  throw domain_error("unknown structure kind '" + a.kind + "'");
}

// Route output to --out or stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw domain_error("cannot open output file '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

void emit(const Args& args, const ordered_json& j,
          const std::string& human) {
  Sink sink(args.out);
  if (args.json)
    sink.os() << j.dump(2) << '\n';
  else
    sink.os() << human;
}

CompetitorParams resolve_params(const Args& args, const StructureDef& s) {
  if (args.rho > 0.0 && args.delta > 0.0) {
    CompetitorParams cp;
    cp.eps = args.eps;
    cp.rho = args.rho;
    cp.delta = args.delta;
    cp.safety = args.safety;
    validate(cp);
    return cp;
  }
  if (args.rho > 0.0 || args.delta > 0.0)
    throw domain_error("--rho and --delta must be given together");
  return solve_params(args.eps, s, args.safety);
}

int run_criterion(const Args& args) {
  const StructureDef s = StructureDef::polynomial(args.a, args.b, args.c);
  const CriterionReport r = criterion(s);
  std::ostringstream h;
  h << "a=" << args.a << " b=" << args.b << " c=" << args.c
    << "  constructible=" << (r.constructible ? "yes" : "no")
    << "  margin=" << fmt17(r.margin) << "  branch=" << r.branch << '\n';
  emit(args, to_json(r), h.str());
  return 0;
}

int run_competitor(const Args& args, const std::string& dump_prefix) {
  const StructureDef s = StructureDef::polynomial(args.a, args.b, args.c);
  const CompetitorParams cp = resolve_params(args, s);
  if (!dump_prefix.empty()) {
    const CompetitorAssembly asmb = assemble_competitor(cp, s, args.nodes);
    for (const auto& [name, curve] :
         {std::pair<const char*, const PlaneCurve&>{"gamma", asmb.gamma},
          {"omega", asmb.omega},
          {"loop", asmb.loop}}) {
      std::ofstream os(dump_prefix + "_" + name + ".csv");
      if (!os)
        throw domain_error("cannot open dump file for curve " +
                           std::string(name));
      write_curve_csv(os, curve);
    }
  }
  std::ostringstream h;
  h << "eps=" << fmt17(cp.eps) << "  rho=" << fmt17(cp.rho)
    << "  delta=" << fmt17(cp.delta) << "  safety=" << fmt17(cp.safety)
    << '\n';
  emit(args, to_json(cp), h.str());
  return 0;
}

int run_verify(const Args& args) {
  const StructureDef s = StructureDef::polynomial(args.a, args.b, args.c);
  const CompetitorParams cp = resolve_params(args, s);
  const VerificationReport r = verify_competitor(cp, s, args.nodes);
  std::ostringstream h;
  h << "rho=" << fmt17(r.rho) << "  delta=" << fmt17(r.delta)
    << "  eps=" << fmt17(r.eps) << '\n'
    << "L_gamma=" << fmt17(r.L_gamma) << "  L_omega=" << fmt17(r.L_omega)
    << "  gain_net=" << fmt17(r.gain_net) << '\n'
    << "constraint_residual=" << fmt17(r.constraint_residual)
    << "  endpoints_ok=" << (r.endpoints_ok ? "yes" : "no") << '\n';
  emit(args, to_json(r), h.str());
  return 0;
}

int run_stokes(const Args& args) {
  const StructureDef s = StructureDef::polynomial(args.a, args.b, args.c);
  const CompetitorParams cp = resolve_params(args, s);
  const CompetitorAssembly asmb = assemble_competitor(cp, s, args.nodes);
  const WeightedAreaReport r =
      weighted_area_decomposition(asmb.loop, s, args.grid);
  std::ostringstream h;
  h << "components=" << r.components.size() << '\n';
  for (const AreaComponent& c : r.components)
    h << "  winding=" << c.winding << "  area_weighted="
      << fmt17(c.area_weighted) << "  sample=(" << fmt17(c.sample_point.x1)
      << ", " << fmt17(c.sample_point.x2) << ")\n";
  h << "total=" << fmt17(r.total)
    << "  line_integral=" << fmt17(r.line_integral) << '\n'
    << "cut=" << fmt17(delta3_cut(cp.rho, s))
    << "  corner=" << fmt17(delta3_cor(cp.delta, cp.eps, s)) << '\n';
  emit(args, to_json(r), h.str());
  return 0;
}

// Exploratory single-shooting on p(0): Gauss-Newton least squares on the
// endpoint mismatch with a finite-difference Jacobian.  A convenience with
// no convergence guarantee.
Vec3 shoot(const StructureDef& s, const Vec3& x0, Vec3 p0, const Vec3& target,
           double T, double step, int iters, std::ostream& log) {
  auto endpoint = [&](const Vec3& p) {
    const HamiltonianTrajectory tr = ham_flow({x0, p}, T, s, step);
    return tr.states.back().x;
  };
  for (int it = 0; it < iters; ++it) {
    const Vec3 e0 = endpoint(p0);
    const double r[3] = {e0.x1 - target.x1, e0.x2 - target.x2,
                         e0.x3 - target.x3};
    const double miss = std::sqrt(r[0] * r[0] + r[1] * r[1] + r[2] * r[2]);
    log << "  iter " << it << ": p0=(" << fmt17(p0.x1) << ", "
        << fmt17(p0.x2) << ", " << fmt17(p0.x3) << ")  miss=" << fmt17(miss)
        << '\n';
    if (miss < 1e-12) break;
    const double h = 1e-6;
    double J[3][3];
    for (int k = 0; k < 3; ++k) {
      Vec3 pp = p0;
      (k == 0 ? pp.x1 : k == 1 ? pp.x2 : pp.x3) += h;
      const Vec3 ek = endpoint(pp);
      J[0][k] = (ek.x1 - e0.x1) / h;
      J[1][k] = (ek.x2 - e0.x2) / h;
      J[2][k] = (ek.x3 - e0.x3) / h;
    }
    // Normal equations with a small Levenberg floor.
    double A[3][4];
    for (int i = 0; i < 3; ++i) {
      for (int k = 0; k < 3; ++k) {
        A[i][k] = 0.0;
        for (int m = 0; m < 3; ++m) A[i][k] += J[m][i] * J[m][k];
      }
      A[i][i] += 1e-12;
      A[i][3] = 0.0;
      for (int m = 0; m < 3; ++m) A[i][3] -= J[m][i] * r[m];
    }
    for (int col = 0; col < 3; ++col) {
      int piv = col;
      for (int row = col + 1; row < 3; ++row)
        if (std::abs(A[row][col]) > std::abs(A[piv][col])) piv = row;
      for (int k = col; k < 4; ++k) std::swap(A[col][k], A[piv][k]);
      if (A[col][col] == 0.0) return p0;  // singular: give up quietly
      for (int row = 0; row < 3; ++row) {
        if (row == col) continue;
        const double f = A[row][col] / A[col][col];
        for (int k = col; k < 4; ++k) A[row][k] -= f * A[col][k];
      }
    }
    p0.x1 += A[0][3] / A[0][0];
    p0.x2 += A[1][3] / A[1][1];
    p0.x3 += A[2][3] / A[2][2];
  }
  return p0;
}

int run_hamiltonian(const Args& args, const std::vector<double>& x0v,
                    const std::vector<double>& p0v,
                    const std::vector<double>& targetv, int shoot_iters,
                    std::size_t scan) {
  const StructureDef s = make_structure(args);
  const Vec3 x0{x0v[0], x0v[1], x0v[2]};
  Vec3 p0{p0v[0], p0v[1], p0v[2]};

  if (scan > 0) {
    const double best = normality_scan(scan, args.eps, s, args.grid);
    std::ostringstream h;
    h << "min normality residual over " << scan
      << " unit covectors: " << fmt17(best) << '\n';
    ordered_json j;
    j["covectors"] = scan;
    j["eps"] = args.eps;
    j["grid"] = args.grid;
    j["min_normality_residual"] = best;
    emit(args, j, h.str());
    return 0;
  }

  std::ostringstream shoot_log;
  if (!targetv.empty()) {
    p0 = shoot(s, x0, p0, Vec3{targetv[0], targetv[1], targetv[2]}, args.T,
               args.step, shoot_iters, shoot_log);
  }

  const HamiltonianTrajectory tr = ham_flow({x0, p0}, args.T, s, args.step);
  const double H0 = ham_eval(tr.states.front(), s);
  double drift = 0.0;
  for (const HamiltonianState& st : tr.states)
    drift = std::max(drift, std::abs(ham_eval(st, s) - H0));
  const HamiltonianState& fin = tr.states.back();

  if (!args.out.empty()) {
    std::ofstream os(args.out);
    if (!os) throw domain_error("cannot open output file '" + args.out + "'");
    write_trajectory_csv(os, tr, s);
  }
  std::ostringstream h;
  h << shoot_log.str() << "steps=" << tr.size() - 1 << "  H0=" << fmt17(H0)
    << "  drift=" << fmt17(drift) << '\n'
    << "x(T)=(" << fmt17(fin.x.x1) << ", " << fmt17(fin.x.x2) << ", "
    << fmt17(fin.x.x3) << ")\n"
    << "p(T)=(" << fmt17(fin.p.x1) << ", " << fmt17(fin.p.x2) << ", "
    << fmt17(fin.p.x3) << ")\n";
  ordered_json j;
  j["kind"] = to_string(s.kind());
  j["steps"] = tr.size() - 1;
  j["H0"] = H0;
  j["drift"] = drift;
  j["x_final"] = {fin.x.x1, fin.x.x2, fin.x.x3};
  j["p_final"] = {fin.p.x1, fin.p.x2, fin.p.x3};
  if (!targetv.empty())
    j["p0_shot"] = {p0.x1, p0.x2, p0.x3};
  // --out is reserved for the trajectory CSV here; the summary goes to
  // stdout in either format.
  if (args.json)
    std::cout << j.dump(2) << '\n';
  else
    std::cout << h.str();
  return 0;
}

int run_optimize(const Args& args, std::size_t n_nodes,
                 const std::string& init_name, bool single,
                 std::size_t snapshot_every,
                 const std::string& snapshot_prefix,
                 const std::string& dump_curve) {
  const StructureDef s = StructureDef::polynomial(args.a, args.b, args.c);
  OptimizeOptions opts;
  opts.snapshot_every = snapshot_every;
  if (!snapshot_prefix.empty()) opts.snapshot_prefix = snapshot_prefix;

  ordered_json j;
  std::ostringstream h;
  const OptimizationResult* final_result = nullptr;
  OptimizationResult single_res;
  MultistartResult ms;
  if (single) {
    const PlaneCurve init = init_name == "omega"
                                ? make_omega_init(args.eps, s, n_nodes)
                                : make_gamma_init(args.eps, s, n_nodes);
    single_res = optimize(init, args.eps, s, opts);
    single_res.length_richardson =
        richardson_length(single_res, args.eps, s, opts);
    final_result = &single_res;
    j = to_json(single_res);
    j["init"] = init_name;
  } else {
    ms = optimize_multistart(args.eps, s, n_nodes, opts);
    final_result = &ms.best;
    j = to_json(ms);
  }
  const OptimizationResult& r = *final_result;
  const double L_gamma =
      polyline_length(make_gamma_init(args.eps, s, n_nodes));
  h << "length=" << fmt17(r.length)
    << "  L_gamma(same grid)=" << fmt17(L_gamma)
    << "  improvement=" << fmt17(L_gamma - r.length) << '\n'
    << "constraint_residual=" << fmt17(r.constraint_residual)
    << "  exact=" << fmt17(r.constraint_residual_exact) << '\n'
    << "length_richardson=" << fmt17(r.length_richardson)
    << "  iterations=" << r.iterations
    << "  converged=" << (r.converged ? "yes" : "no") << '\n'
    << "control_distance_to_gamma=" << fmt17(r.control_distance_to_gamma)
    << '\n';
  if (!dump_curve.empty()) {
    std::ofstream os(dump_curve);
    if (!os)
      throw domain_error("cannot open curve dump file '" + dump_curve + "'");
    write_curve_csv(os, r.curve);
  }
  emit(args, j, h.str());
  return 0;
}

int run_sweep(const Args& args, int a_min, int a_max, int b_min, int b_max,
              bool with_optimizer) {
  if (a_min > a_max || b_min > b_max)
    throw domain_error("sweep: empty exponent range");
  std::vector<int> av, bv;
  for (int a = a_min; a <= a_max; ++a) av.push_back(a);
  for (int b = b_min; b <= b_max; ++b) bv.push_back(b);
  const std::vector<SweepRow> rows =
      sweep(av, bv, args.c, args.eps, with_optimizer);
  Sink sink(args.out);
  if (args.json)
    sink.os() << to_json(rows).dump(2) << '\n';
  else
    write_sweep_csv(sink.os(), rows);
  return 0;
}

int run_examples(const Args& args) {
  std::ostringstream h;
  h << "heisenberg:    phi = 1      psi = x1    singular surface: none "
       "(phi*psi_x1 - psi*phi_x1 = 1)\n"
    << "martinet:      phi = 1      psi = x1^2  singular surface: {x1 = 0}\n"
    << "liu_sussmann:  phi = 1-x1   psi = x1^2  singular surfaces: {x1 = 0} "
       "and {x1 = 2}  (x1*(2 - x1) = 0)\n"
    << "polynomial:    phi = 1      psi = (x1^a - x2^b)^c  singular "
       "surfaces: {x1 = 0} (a >= 2) and {x1^a = x2^b}\n";
  ordered_json j = ordered_json::array();
  j.push_back({{"kind", "heisenberg"},
               {"phi", "1"},
               {"psi", "x1"},
               {"singular_surfaces", ordered_json::array()}});
  j.push_back({{"kind", "martinet"},
               {"phi", "1"},
               {"psi", "x1^2"},
               {"singular_surfaces", {"x1 = 0"}}});
  j.push_back({{"kind", "liu_sussmann"},
               {"phi", "1 - x1"},
               {"psi", "x1^2"},
               {"singular_surfaces", {"x1 = 0", "x1 = 2"}}});
  j.push_back({{"kind", "polynomial"},
               {"phi", "1"},
               {"psi", "(x1^a - x2^b)^c"},
               {"singular_surfaces", {"x1 = 0 (a >= 2)", "x1^a = x2^b"}}});
  emit(args, j, h.str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Plane-curve competitors, weighted-area accounting, Hamiltonian "
      "flows, and descent oracles for a family of rank-2 structures"};
  app.require_subcommand(1);
  Args args;

  auto add_structure_flags = [&](CLI::App* cmd, bool with_kind = false) {
    cmd->add_option("--a", args.a, "first exponent of P = x1^a - x2^b")
        ->capture_default_str();
    cmd->add_option("--b", args.b, "second exponent of P")
        ->capture_default_str();
    cmd->add_option("--c", args.c, "outer exponent of psi = P^c")
        ->capture_default_str();
    if (with_kind)
      cmd->add_option("--kind", args.kind,
                      "structure kind: polynomial, heisenberg, martinet, "
                      "liu_sussmann")
          ->capture_default_str();
  };
  auto add_io_flags = [&](CLI::App* cmd) {
    cmd->add_flag("--json", args.json, "machine output instead of tables");
    cmd->add_option("--out", args.out, "write output to this file");
  };

  CLI::App* c_crit = app.add_subcommand(
      "criterion", "constructibility verdict and margin for (a, b, c)");
  add_structure_flags(c_crit);
  add_io_flags(c_crit);

  CLI::App* c_comp = app.add_subcommand(
      "competitor", "solve the competitor parameters (rho, delta) at eps");
  add_structure_flags(c_comp);
  add_io_flags(c_comp);
  c_comp->add_option("--eps", args.eps, "curve horizon")
      ->capture_default_str();
  c_comp->add_option("--safety", args.safety,
                     "fraction of the leading-order gain the corner cost may "
                     "consume")
      ->capture_default_str();
  c_comp->add_option("--nodes", args.nodes, "model-curve mesh nodes")
      ->capture_default_str();
  std::string dump_prefix;
  c_comp->add_option("--dump-curves", dump_prefix,
                     "write <prefix>_{gamma,omega,loop}.csv");

  CLI::App* c_verify = app.add_subcommand(
      "verify", "assemble the competitor and verify gain and lift residual");
  add_structure_flags(c_verify);
  add_io_flags(c_verify);
  c_verify->add_option("--eps", args.eps, "curve horizon")
      ->capture_default_str();
  c_verify->add_option("--rho", args.rho,
                       "cut depth (default: solved from eps)");
  c_verify->add_option("--delta", args.delta,
                       "corner size (default: solved from eps)");
  c_verify->add_option("--safety", args.safety, "see competitor --safety")
      ->capture_default_str();
  CLI::Option* verify_nodes = c_verify->add_option(
      "--nodes", args.nodes,
      "model-curve mesh nodes (default 32768 for verification)");

  CLI::App* c_stokes = app.add_subcommand(
      "stokes",
      "decompose the comparison loop's weighted area by winding component");
  add_structure_flags(c_stokes);
  add_io_flags(c_stokes);
  c_stokes->add_option("--eps", args.eps, "curve horizon")
      ->capture_default_str();
  c_stokes->add_option("--rho", args.rho, "cut depth (default: solved)");
  c_stokes->add_option("--delta", args.delta, "corner size (default: solved)");
  c_stokes->add_option("--safety", args.safety, "see competitor --safety")
      ->capture_default_str();
  c_stokes->add_option("--nodes", args.nodes, "model-curve mesh nodes")
      ->capture_default_str();
  c_stokes->add_option("--grid", args.grid, "decomposition grid resolution")
      ->capture_default_str();

  CLI::App* c_ham = app.add_subcommand(
      "hamiltonian",
      "integrate the normal flow; optionally scan normality residuals or "
      "shoot for a target endpoint");
  add_structure_flags(c_ham, true);
  add_io_flags(c_ham);
  std::vector<double> x0v{0.0, 0.0, 0.0}, p0v{0.0, 1.0, 1.0}, targetv;
  std::size_t scan = 0;
  int shoot_iters = 20;
  c_ham->add_option("--x0", x0v, "initial point x1,x2,x3")
      ->delimiter(',')
      ->expected(3);
  c_ham->add_option("--p0", p0v, "initial covector p1,p2,p3")
      ->delimiter(',')
      ->expected(3);
  c_ham->add_option("--T", args.T, "integration horizon")
      ->capture_default_str();
  c_ham->add_option("--step", args.step, "integrator step")
      ->capture_default_str();
  c_ham->add_option("--eps", args.eps, "curve horizon for --scan")
      ->capture_default_str();
  c_ham->add_option("--grid", args.grid, "t-grid size for --scan")
      ->default_val(std::size_t{512});
  c_ham->add_option("--scan", scan,
                    "min normality residual over this many unit covectors");
  c_ham->add_option("--target", targetv,
                    "exploratory shooting: aim x(T) at x1,x2,x3 "
                    "(least squares on p(0), no convergence guarantee)")
      ->delimiter(',')
      ->expected(3);
  c_ham->add_option("--shoot-iters", shoot_iters, "shooting iterations")
      ->capture_default_str();

  CLI::App* c_opt = app.add_subcommand(
      "optimize", "direct length descent under the lift constraint");
  add_structure_flags(c_opt);
  add_io_flags(c_opt);
  std::size_t n_nodes = 400;
  std::string init_name = "gamma";
  bool single = false;
  std::size_t snapshot_every = 0;
  std::string snapshot_prefix, dump_curve;
  c_opt->add_option("--eps", args.eps, "curve horizon")
      ->capture_default_str();
  c_opt->add_option("--n", n_nodes, "node count")->capture_default_str();
  c_opt->add_option("--init", init_name, "start for --single: gamma or omega")
      ->capture_default_str();
  c_opt->add_flag("--single", single,
                  "one descent run from --init instead of multistart");
  c_opt->add_option("--snapshot-every", snapshot_every,
                    "dump iterate CSV every k outer iterations (0 = off)");
  c_opt->add_option("--snapshot-prefix", snapshot_prefix,
                    "path prefix for snapshot CSVs");
  c_opt->add_option("--dump-curve", dump_curve,
                    "write the returned curve as CSV to this path");

  CLI::App* c_sweep = app.add_subcommand(
      "sweep", "one row per (a, b): criterion, competitor, verification");
  add_io_flags(c_sweep);
  int a_min = 2, a_max = 5, b_min = 2, b_max = 5;
  bool with_optimizer = false;
  c_sweep->add_option("--a-min", a_min, "")->capture_default_str();
  c_sweep->add_option("--a-max", a_max, "")->capture_default_str();
  c_sweep->add_option("--b-min", b_min, "")->capture_default_str();
  c_sweep->add_option("--b-max", b_max, "")->capture_default_str();
  c_sweep->add_option("--c", args.c, "outer exponent")->capture_default_str();
  c_sweep->add_option("--eps", args.eps, "curve horizon")
      ->capture_default_str();
  c_sweep->add_flag("--with-optimizer", with_optimizer,
                    "also run the descent oracle per constructible row");

  CLI::App* c_ex = app.add_subcommand(
      "examples", "the named structures and their singular surfaces");
  add_io_flags(c_ex);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_crit->parsed()) return run_criterion(args);
    if (c_comp->parsed()) return run_competitor(args, dump_prefix);
    if (c_verify->parsed()) {
      if (verify_nodes->count() == 0) args.nodes = 32768;
      return run_verify(args);
    }
    if (c_stokes->parsed()) return run_stokes(args);
    if (c_ham->parsed())
      return run_hamiltonian(args, x0v, p0v, targetv, shoot_iters, scan);
    if (c_opt->parsed())
      return run_optimize(args, n_nodes, init_name, single, snapshot_every,
                          snapshot_prefix, dump_curve);
    if (c_sweep->parsed())
      return run_sweep(args, a_min, a_max, b_min, b_max, with_optimizer);
    if (c_ex->parsed()) return run_examples(args);
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
