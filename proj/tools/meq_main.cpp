// meq: solvers and experiments for linear matrix equations.
//
//   meq solve       solve a Lyapunov / Sylvester / multiterm equation
//   meq bounds      print convergence-bound values and k* estimates
//   meq experiment  run a configured experiment (CSV + JSON outputs)
//   meq gen         generate seeded test problems as MatrixMarket files
//
// Exit codes: 0 success, 2 configuration/usage error, 3 solver failure.

#include "meq/meq.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

namespace fs = std::filesystem;
using namespace meq;

namespace {

struct SolveArgs {
  std::string equation = "lyapunov";
  std::string solver = "galerkin";
  std::string a_file, b_file, op_file, b1_file, b2_file;
  std::string constraint = "none";
  double tol = 1e-6;
  int max_iter = 200;
  std::string out_dir = "meq_out";
};

void write_solve_outputs(const std::string& out_dir, const Matrix& X,
                         const std::vector<IterationRecord>& history,
                         const nlohmann::json& summary) {
  fs::create_directories(out_dir);
  write_matrix_market((fs::path(out_dir) / "X.mtx").string(), X);
  write_history_csv((fs::path(out_dir) / "history.csv").string(), history);
  std::ofstream out((fs::path(out_dir) / "summary.json").string());
  out << summary.dump(2) << "\n";
}

int run_solve(const SolveArgs& args) {
  nlohmann::json summary;
  summary["equation"] = args.equation;
  summary["solver"] = args.solver;
  summary["tol"] = args.tol;

  if (args.equation == "lyapunov") {
    if (args.a_file.empty() || args.b1_file.empty())
      throw ConfigError("lyapunov solve needs --A and --b1");
    Matrix A = read_matrix_market(args.a_file);
    Matrix B0 = read_matrix_market(args.b1_file);
    if (args.solver == "galerkin") {
      GalerkinOptions opts;
      opts.tol = args.tol;
      opts.max_steps = args.max_iter;
      ProjectionSolution sol = galerkin_lyapunov(A, B0, opts);
      for (const auto& w : sol.warnings) std::cerr << "warning: " << w << "\n";
      summary["iterations"] = sol.iterations();
      summary["converged"] = sol.converged();
      summary["residual_rel"] = sol.final_residual_rel();
      summary["stop"] = to_string(sol.stop);
      write_solve_outputs(args.out_dir, sol.reconstruct(), sol.history, summary);
    } else if (args.solver == "minres") {
      MinresOptions opts;
      opts.tol = args.tol;
      opts.max_steps = args.max_iter;
      if (args.constraint == "negative")
        opts.constraint = ConstraintSpec::negative_cone();
      else if (args.constraint == "positive")
        opts.constraint = ConstraintSpec::positive_cone();
      else if (args.constraint != "none")
        throw ConfigError("unknown constraint '" + args.constraint + "'");
      MinresSolution sol = minres_lyapunov(A, B0, opts);
      for (const auto& w : sol.warnings) std::cerr << "warning: " << w << "\n";
      summary["iterations"] = sol.iterations();
      summary["converged"] = sol.converged();
      summary["residual_rel"] = sol.final_residual_rel();
      summary["stop"] = to_string(sol.stop);
      summary["note"] = "minres solves A X + X A^T = -B0 B0^T";
      write_solve_outputs(args.out_dir, sol.reconstruct(), sol.history, summary);
      write_minres_diagnostics_csv((fs::path(args.out_dir) / "diagnostics.csv").string(),
                                   sol);
    } else if (args.solver == "cg") {
      MultitermOperator op = MultitermOperator::lyapunov(A);
      Matrix F = B0 * B0.transpose();
      CgOptions opts;
      opts.tol = args.tol;
      opts.max_steps = args.max_iter;
      auto [X, trace] = cg_kron(op, F, opts);
      summary["iterations"] = trace.iterations();
      summary["converged"] = trace.converged();
      summary["residual_rel"] = trace.records.back().res2_rel;
      fs::create_directories(args.out_dir);
      write_matrix_market((fs::path(args.out_dir) / "X.mtx").string(), X);
      write_cg_trace_csv((fs::path(args.out_dir) / "history.csv").string(), trace);
      std::ofstream out((fs::path(args.out_dir) / "summary.json").string());
      out << summary.dump(2) << "\n";
    } else {
      throw ConfigError("unknown solver '" + args.solver + "' for lyapunov");
    }
  } else if (args.equation == "sylvester") {
    if (args.a_file.empty() || args.b_file.empty() || args.b1_file.empty() ||
        args.b2_file.empty())
      throw ConfigError("sylvester solve needs --A, --B, --b1 and --b2");
    Matrix A = read_matrix_market(args.a_file);
    Matrix B = read_matrix_market(args.b_file);
    Matrix b1 = read_matrix_market(args.b1_file);
    Matrix b2 = read_matrix_market(args.b2_file);
    if (args.solver != "galerkin")
      throw ConfigError("sylvester currently supports the galerkin solver");
    GalerkinOptions opts;
    opts.tol = args.tol;
    opts.max_steps = args.max_iter;
    ProjectionSolution sol = galerkin_sylvester(A, B, b1, b2, opts);
    for (const auto& w : sol.warnings) std::cerr << "warning: " << w << "\n";
    summary["iterations"] = sol.iterations();
    summary["converged"] = sol.converged();
    summary["residual_rel"] = sol.final_residual_rel();
    summary["stop"] = to_string(sol.stop);
    write_solve_outputs(args.out_dir, sol.reconstruct(), sol.history, summary);
  } else if (args.equation == "multiterm") {
    if (args.op_file.empty() || args.b1_file.empty() || args.b2_file.empty())
      throw ConfigError("multiterm solve needs --op, --b1 and --b2");
    MultitermOperator op = load_operator_manifest(args.op_file);
    Matrix F1 = read_matrix_market(args.b1_file);
    Matrix F2 = read_matrix_market(args.b2_file);
    if (args.solver == "galerkin") {
      GalerkinOptions opts;
      opts.tol = args.tol;
      opts.max_steps = args.max_iter;
      ProjectionSolution sol = galerkin_multiterm(op, F1, F2, opts);
      summary["iterations"] = sol.iterations();
      summary["converged"] = sol.converged();
      summary["residual_rel"] = sol.final_residual_rel();
      summary["stop"] = to_string(sol.stop);
      write_solve_outputs(args.out_dir, sol.reconstruct(), sol.history, summary);
    } else if (args.solver == "cg") {
      Matrix F = F1 * F2.transpose();
      CgOptions opts;
      opts.tol = args.tol;
      opts.max_steps = args.max_iter;
      auto [X, trace] = cg_kron(op, F, opts);
      summary["iterations"] = trace.iterations();
      summary["converged"] = trace.converged();
      summary["residual_rel"] = trace.records.back().res2_rel;
      fs::create_directories(args.out_dir);
      write_matrix_market((fs::path(args.out_dir) / "X.mtx").string(), X);
      write_cg_trace_csv((fs::path(args.out_dir) / "history.csv").string(), trace);
      std::ofstream out((fs::path(args.out_dir) / "summary.json").string());
      out << summary.dump(2) << "\n";
    } else {
      throw ConfigError("unknown solver '" + args.solver + "' for multiterm");
    }
  } else {
    throw ConfigError("unknown equation '" + args.equation + "'");
  }
  std::cout << "wrote " << args.out_dir << "/\n";
  return 0;
}

int run_bounds(double lmin, double lmax, double lmin_b, double lmax_b, double eps,
               int k_step) {
  const bool has_b = lmax_b > 0.0;
  SpectralSummary s = has_b ? SpectralSummary::pair(lmin, lmax, lmin_b, lmax_b)
                            : SpectralSummary::single(lmin, lmax);
  auto [kh, kh_id] = kappa_hat_identity_check(s);
  const int kg = k_star(s, eps, BoundMethod::galerkin);
  const int kc = k_star(s, eps, BoundMethod::cg);
  std::printf("kappa            = %.17g\n", s.kappa());
  std::printf("kappa_hat        = %.17g  (identity kappa/2 + 1/2 = %.17g)\n", kh, kh_id);
  if (has_b) {
    std::printf("kappa_hat_A      = %.17g\n", s.kappa_hat_a());
    std::printf("kappa_hat_B      = %.17g\n", s.kappa_hat_b());
  }
  std::printf("eps              = %g\n", eps);
  std::printf("k_star_cg        = %d\n", kc);
  std::printf("k_star_galerkin  = %d\n", kg);
  std::printf("\n%6s %16s %16s %16s %16s%s\n", "k", "lyap_bound", "galerkin_rel",
              "cg_energy_rel", "cg_fro_rel", has_b ? "    sylvester" : "");
  const int k_end = std::max(kg, kc);
  for (int k = 0; k <= k_end; k += std::max(1, k_step)) {
    auto [be, bf] = cg_bounds(s, k);
    std::printf("%6d %16.6e %16.6e %16.6e %16.6e", k, galerkin_lyapunov_bound(s, k),
                galerkin_relative_bound(s, k), be, bf);
    if (has_b) std::printf(" %16.6e", sylvester_bound(s, k));
    std::printf("\n");
  }
  return 0;
}

int run_gen(const std::string& kind, Index n, Index p, int ell, std::uint64_t seed,
            const std::string& spectrum, double a, double b,
            const std::string& values_csv, double q_cond, bool with_rhs,
            const std::string& out_dir) {
  SpectrumSpec spec = SpectrumSpec::loguniform(a, b);
  if (spectrum == "example42")
    spec = SpectrumSpec::example42();
  else if (spectrum == "explicit") {
    std::vector<double> vals;
    std::stringstream ss(values_csv);
    for (std::string tok; std::getline(ss, tok, ',');)
      vals.push_back(std::stod(tok));
    spec = SpectrumSpec::explicit_list(vals);
  } else if (spectrum != "loguniform") {
    throw ConfigError("unknown spectrum kind '" + spectrum + "'");
  }

  fs::create_directories(out_dir);
  if (kind == "spd") {
    write_matrix_market((fs::path(out_dir) / "A.mtx").string(), gen_spd(n, spec, seed));
  } else if (kind == "antistable") {
    write_matrix_market((fs::path(out_dir) / "A.mtx").string(),
                        gen_antistable_nonnormal(n, spec, seed, q_cond));
  } else if (kind == "multiterm") {
    MultitermOperator op = gen_multiterm_spd(n, p, ell, seed);
    save_operator_manifest(op, out_dir, "op");
  } else {
    throw ConfigError("unknown generator kind '" + kind + "'");
  }
  if (with_rhs) {
    write_vector_market((fs::path(out_dir) / "b.mtx").string(),
                        gen_unit_vector(n, seed + 1));
    if (kind == "multiterm")
      write_vector_market((fs::path(out_dir) / "b2.mtx").string(),
                          gen_unit_vector(p, seed + 2));
  }
  std::cout << "wrote " << out_dir << "/\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"meq: projection solvers and experiments for linear matrix equations"};
  app.require_subcommand(1);

  SolveArgs sargs;
  CLI::App* solve = app.add_subcommand("solve", "solve a linear matrix equation");
  solve->add_option("--equation", sargs.equation, "lyapunov | sylvester | multiterm");
  solve->add_option("--solver", sargs.solver, "galerkin | minres | cg");
  solve->add_option("--A", sargs.a_file, "left coefficient (MatrixMarket)");
  solve->add_option("--B", sargs.b_file, "right coefficient (MatrixMarket)");
  solve->add_option("--op", sargs.op_file, "multiterm operator manifest (JSON)");
  solve->add_option("--b1", sargs.b1_file, "right-hand-side factor F1 (MatrixMarket)");
  solve->add_option("--b2", sargs.b2_file, "right-hand-side factor F2 (MatrixMarket)");
  solve->add_option("--constraint", sargs.constraint,
                    "minres core constraint: none | negative | positive");
  solve->add_option("--tol", sargs.tol, "relative residual tolerance");
  solve->add_option("--max-iter", sargs.max_iter, "maximum iterations");
  solve->add_option("--out", sargs.out_dir, "output directory");

  double lmin = 1.0, lmax = 100.0, lmin_b = 0.0, lmax_b = 0.0, eps = 1e-6;
  int k_step = 5;
  CLI::App* bounds = app.add_subcommand("bounds", "print bound values and k*");
  bounds->add_option("--lambda-min", lmin, "smallest eigenvalue of A")->required();
  bounds->add_option("--lambda-max", lmax, "largest eigenvalue of A")->required();
  bounds->add_option("--lambda-min-b", lmin_b, "smallest eigenvalue of B (Sylvester)");
  bounds->add_option("--lambda-max-b", lmax_b, "largest eigenvalue of B (Sylvester)");
  bounds->add_option("--eps", eps, "target relative accuracy");
  bounds->add_option("--k-step", k_step, "table row stride");

  std::string config_file, out_override;
  CLI::App* experiment = app.add_subcommand("experiment", "run a configured experiment");
  experiment->add_option("--config", config_file, "JSON config file")->required();
  experiment->add_option("--output-dir", out_override, "override output directory");

  std::string gkind = "spd", gspectrum = "loguniform", gvalues, gout = "meq_gen";
  Index gn = 100, gp = 50;
  int gell = 6;
  std::uint64_t gseed = 1;
  double ga = 1.0, gb = 100.0, gq = 100.0;
  bool gwith_rhs = false;
  CLI::App* gen = app.add_subcommand("gen", "generate seeded test problems");
  gen->add_option("--kind", gkind, "spd | antistable | multiterm");
  gen->add_option("--n", gn, "dimension n");
  gen->add_option("--p", gp, "dimension p (multiterm)");
  gen->add_option("--ell", gell, "number of terms (multiterm)");
  gen->add_option("--seed", gseed, "random seed");
  gen->add_option("--spectrum", gspectrum, "loguniform | example42 | explicit");
  gen->add_option("--a", ga, "loguniform lower endpoint");
  gen->add_option("--b", gb, "loguniform upper endpoint");
  gen->add_option("--values", gvalues, "comma-separated explicit spectrum");
  gen->add_option("--q-cond", gq, "similarity conditioning (antistable)");
  gen->add_flag("--with-rhs", gwith_rhs, "also write seeded unit right-hand sides");
  gen->add_option("--out", gout, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (*solve) return run_solve(sargs);
    if (*bounds) return run_bounds(lmin, lmax, lmin_b, lmax_b, eps, k_step);
    if (*experiment) {
      ExperimentConfig cfg = ExperimentConfig::from_json_file(config_file);
      if (!out_override.empty()) cfg.output_dir = out_override;
      nlohmann::json summary = run_experiment(cfg);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
    if (*gen)
      return run_gen(gkind, gn, gp, gell, gseed, gspectrum, ga, gb, gvalues, gq,
                     gwith_rhs, gout);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}
