#pragma once

// Configuration-driven experiment runner. Four built-in experiments rerun the
// study's numerical examples at desk scale:
//   ex41  spd Lyapunov, log-uniform spectrum [1,100]: Galerkin vs Kronecker CG
//   ex42  spd Lyapunov, isolated smallest eigenvalue: stagnation + Ritz traces
//   ex25  synthetic spd multiterm operator (l = 6): S-norm error decay
//   ex51  antistable Lyapunov: constrained vs unconstrained minimal residual
// Each run emits per-iteration CSVs (deterministic bytes for a fixed config
// and seed; the timing column is zeroed, wall times live in the summary) and
// a JSON summary with iteration counts, final errors, bound values and k*
// predictions.

#include "meq/bounds.hpp"
#include "meq/cg.hpp"
#include "meq/galerkin.hpp"
#include "meq/generators.hpp"
#include "meq/minres.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

namespace meq {

/// Invalid or inconsistent configuration; the CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string experiment;  // ex41 | ex42 | ex25 | ex51
  Index n = 0;             // 0 = experiment default
  Index p = 0;
  int ell = 6;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int k_max = 0;  // 0 = experiment default
  double q_cond = 100.0;
  std::string output_dir = ".";

  static ExperimentConfig from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    static const std::vector<std::string> known = {
        "experiment", "n", "p", "ell", "seed", "tol", "k_max", "q_cond",
        "output_dir"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw ConfigError("unknown config key '" + it.key() + "'");
    }
    try {
      c.experiment = j.at("experiment").get<std::string>();
      c.n = j.value("n", 0);
      c.p = j.value("p", 0);
      c.ell = j.value("ell", 6);
      c.seed = j.value("seed", std::uint64_t{1});
      c.tol = j.value("tol", 1e-6);
      c.k_max = j.value("k_max", 0);
      c.q_cond = j.value("q_cond", 100.0);
      c.output_dir = j.value("output_dir", std::string("."));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("bad config: ") + e.what());
    }
    if (c.experiment != "ex41" && c.experiment != "ex42" && c.experiment != "ex25" &&
        c.experiment != "ex51")
      throw ConfigError("unknown experiment '" + c.experiment + "'");
    if (c.n < 0 || c.p < 0 || c.ell < 1 || c.tol <= 0.0 || c.k_max < 0)
      throw ConfigError("config values out of range");
    return c;
  }

  static ExperimentConfig from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return from_json(j);
  }
};

namespace detail {

inline std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  return (fs::path(cfg.output_dir) / name).string();
}

inline void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

// Stagnation measure: the number of iterations whose relative error
// improvement stays below 10%.
inline int stagnation_length(const std::vector<double>& errors) {
  int len = 0;
  for (size_t i = 1; i < errors.size(); ++i) {
    const double improvement = (errors[i - 1] - errors[i]) / errors[i - 1];
    if (improvement < 0.10) ++len;
  }
  return len;
}

inline int first_k_within(const std::vector<std::pair<double, double>>& ritz,
                          double target, double rel_tol, bool use_min) {
  for (size_t i = 0; i < ritz.size(); ++i) {
    const double theta = use_min ? ritz[i].first : ritz[i].second;
    if (std::abs(theta - target) <= rel_tol * std::abs(target))
      return static_cast<int>(i + 1);
  }
  return -1;
}

inline nlohmann::json run_ex41(const ExperimentConfig& cfg) {
  const Index n = cfg.n > 0 ? cfg.n : 1000;
  const int k_max = cfg.k_max > 0 ? cfg.k_max : 120;
  Matrix A = gen_spd(n, SpectrumSpec::loguniform(1.0, 100.0), cfg.seed);
  Vector b = gen_unit_vector(n, cfg.seed + 1);
  Matrix F = b * b.transpose();
  Matrix X_ref = solve_sylvester_dense(A, A.transpose(), F);

  SpectralSummary spec = SpectralSummary::single(1.0, 100.0);
  const int kg = k_star(spec, cfg.tol, BoundMethod::galerkin);
  const int kc = k_star(spec, cfg.tol, BoundMethod::cg);

  GalerkinOptions gopts;
  gopts.tol = cfg.tol;
  gopts.max_steps = k_max;
  gopts.stop = StopRule::error_fro;
  gopts.X_ref = &X_ref;
  gopts.track_ritz = true;
  ProjectionSolution gal = galerkin_lyapunov(A, b, gopts);
  write_history_csv(out_path(cfg, "ex41_galerkin.csv"), gal.history, true);

  MultitermOperator op = MultitermOperator::lyapunov(A);
  CgOptions copts;
  copts.tol = cfg.tol;
  copts.max_steps = k_max;
  copts.stop = CgStopRule::error_fro;
  copts.X_ref = &X_ref;
  copts.track_ritz = true;
  auto [X_cg, cg] = cg_kron(op, F, copts);
  write_cg_trace_csv(out_path(cfg, "ex41_cg.csv"), cg, true);

  // Bound columns next to the measured ones, one row per iteration index.
  {
    std::ofstream out(out_path(cfg, "ex41_bounds.csv"), std::ios::binary);
    out << "k,err_fro_abs_galerkin,bound_galerkin_abs,err_fro_rel_galerkin,"
           "bound_galerkin_rel,errA_rel_cg,bound_cg_energy,errF_rel_cg,bound_cg_fro\n";
    const size_t rows = std::max(gal.history.size(), cg.records.size());
    const double xnorm = X_ref.norm();
    for (size_t i = 0; i < rows; ++i) {
      const int k = static_cast<int>(i + 1);
      double ga = kNaN, gr = kNaN, ce = kNaN, cf = kNaN;
      if (i < gal.history.size()) {
        gr = gal.history[i].error_fro_rel;
        ga = gr * xnorm;
      }
      if (i < cg.records.size()) {
        ce = cg.records[i].errA_rel;
        cf = cg.records[i].errF_rel;
      }
      auto [be, bf] = cg_bounds(spec, k);
      out << k << ',' << csv::format_value(ga) << ','
          << csv::format_value(galerkin_lyapunov_bound(spec, k)) << ','
          << csv::format_value(gr) << ','
          << csv::format_value(galerkin_relative_bound(spec, k)) << ','
          << csv::format_value(ce) << ',' << csv::format_value(be) << ','
          << csv::format_value(cf) << ',' << csv::format_value(bf) << '\n';
    }
  }

  nlohmann::json s;
  s["experiment"] = "ex41";
  s["n"] = n;
  s["seed"] = cfg.seed;
  s["tol"] = cfg.tol;
  s["kappa"] = 100.0;
  s["kappa_hat"] = spec.kappa_hat();
  s["k_star_galerkin"] = kg;
  s["k_star_cg"] = kc;
  s["galerkin_iterations"] = gal.iterations();
  s["galerkin_converged"] = gal.converged();
  s["galerkin_final_error_fro_rel"] = gal.history.back().error_fro_rel;
  s["cg_iterations"] = cg.iterations();
  s["cg_converged"] = cg.converged();
  s["cg_final_error_fro_rel"] = cg.records.back().errF_rel;
  s["galerkin_seconds"] = gal.history.back().seconds;
  s["cg_seconds"] = cg.records.back().seconds;
  write_json(out_path(cfg, "ex41_summary.json"), s);
  return s;
}

inline nlohmann::json run_ex42(const ExperimentConfig& cfg) {
  const Index n = cfg.n > 0 ? cfg.n : 100;
  Matrix A = gen_spd(n, SpectrumSpec::example42(), cfg.seed);
  Vector b = Vector::Ones(n);
  b.normalize();
  Matrix F = b * b.transpose();
  Matrix X_ref = solve_sylvester_dense(A, A.transpose(), F);

  const int gal_steps = cfg.k_max > 0 ? std::min<int>(cfg.k_max, n) : static_cast<int>(n) - 5;
  const int cg_steps = cfg.k_max > 0 ? cfg.k_max : 4 * static_cast<int>(n);

  GalerkinOptions gopts;
  gopts.tol = cfg.tol;
  gopts.max_steps = gal_steps;
  gopts.stop = StopRule::error_snorm;
  gopts.X_ref = &X_ref;
  gopts.track_ritz = true;
  ProjectionSolution gal = galerkin_lyapunov(A, b, gopts);
  write_history_csv(out_path(cfg, "ex42_galerkin.csv"), gal.history, true);

  MultitermOperator op = MultitermOperator::lyapunov(A);
  CgOptions copts;
  copts.tol = cfg.tol;
  copts.max_steps = cg_steps;
  copts.stop = CgStopRule::error_energy;
  copts.X_ref = &X_ref;
  copts.track_ritz = true;
  auto [X_cg, cg] = cg_kron(op, F, copts);
  write_cg_trace_csv(out_path(cfg, "ex42_cg.csv"), cg, true);

  std::vector<double> gal_err, cg_err;
  std::vector<std::pair<double, double>> gal_ritz, cg_ritz;
  for (const auto& r : gal.history) {
    gal_err.push_back(r.error_snorm_rel);
    gal_ritz.emplace_back(r.theta_min, r.theta_max);
  }
  for (const auto& r : cg.records) {
    cg_err.push_back(r.errA_rel);
    cg_ritz.emplace_back(r.theta_min, r.theta_max);
  }

  const double lmax_a = static_cast<double>(n);
  nlohmann::json s;
  s["experiment"] = "ex42";
  s["n"] = n;
  s["seed"] = cfg.seed;
  s["lambda_min_A"] = 0.001;
  s["lambda_max_A"] = lmax_a;
  s["lambda_min_kron"] = 0.002;
  s["lambda_max_kron"] = 2.0 * lmax_a;
  s["galerkin_iterations"] = gal.iterations();
  s["cg_iterations"] = cg.iterations();
  s["galerkin_stagnation"] = stagnation_length(gal_err);
  s["cg_stagnation"] = stagnation_length(cg_err);
  s["galerkin_theta_max_hit_1pct"] = first_k_within(gal_ritz, lmax_a, 0.01, false);
  s["cg_theta_max_hit_1pct"] = first_k_within(cg_ritz, 2.0 * lmax_a, 0.01, false);
  s["galerkin_theta_min_hit_10pct"] = first_k_within(gal_ritz, 0.001, 0.10, true);
  s["cg_theta_min_hit_10pct"] = first_k_within(cg_ritz, 0.002, 0.10, true);
  s["galerkin_final_error_snorm_rel"] = gal.history.back().error_snorm_rel;
  s["cg_final_errA_rel"] = cg.records.back().errA_rel;
  write_json(out_path(cfg, "ex42_summary.json"), s);
  return s;
}

inline nlohmann::json run_ex25(const ExperimentConfig& cfg) {
  const Index n = cfg.n > 0 ? cfg.n : 225;
  const Index p = cfg.p > 0 ? cfg.p : 56;
  const int ell = cfg.ell;
  MultitermOperator op = gen_multiterm_spd(n, p, ell, cfg.seed);
  Vector f1 = gen_unit_vector(n, cfg.seed + 1);
  Vector f2 = gen_unit_vector(p, cfg.seed + 2);
  Matrix F = f1 * f2.transpose();

  // Dense vec-form reference x = S_l^{-1} vec(F).
  Matrix S = op.assemble_kronecker();
  Matrix X_ref = unvec(solve_linear_dense(S, vec(F)), n, p);
  S.resize(0, 0);

  GalerkinOptions gopts;
  gopts.tol = cfg.tol;
  gopts.max_steps = cfg.k_max > 0 ? cfg.k_max : static_cast<int>(std::max(n, p));
  gopts.stop = StopRule::error_snorm;
  gopts.X_ref = &X_ref;
  ProjectionSolution gal = galerkin_multiterm(op, f1, f2, gopts);
  write_history_csv(out_path(cfg, "ex25_galerkin.csv"), gal.history, true);

  bool monotone = true;
  for (size_t i = 1; i < gal.history.size(); ++i)
    if (gal.history[i].error_snorm_rel >
        gal.history[i - 1].error_snorm_rel + 1e-10)
      monotone = false;

  nlohmann::json s;
  s["experiment"] = "ex25";
  s["n"] = n;
  s["p"] = p;
  s["ell"] = ell;
  s["seed"] = cfg.seed;
  s["tol"] = cfg.tol;
  s["iterations"] = gal.iterations();
  s["converged"] = gal.converged();
  s["final_error_snorm_rel"] = gal.history.back().error_snorm_rel;
  s["error_snorm_monotone"] = monotone;
  s["seconds"] = gal.history.back().seconds;
  write_json(out_path(cfg, "ex25_summary.json"), s);
  return s;
}

inline nlohmann::json run_ex51(const ExperimentConfig& cfg) {
  const Index n = cfg.n > 0 ? cfg.n : 1000;
  Matrix A = gen_antistable_nonnormal(n, SpectrumSpec::loguniform(1.0, 100.0),
                                      cfg.seed, cfg.q_cond);
  Vector b = gen_unit_vector(n, cfg.seed + 1);

  SpectralSummary spec = SpectralSummary::single(1.0, 100.0);
  const int kg = k_star(spec, cfg.tol, BoundMethod::galerkin);
  const int k_max = cfg.k_max > 0 ? cfg.k_max : kg;

  MinresOptions mopts;
  mopts.tol = cfg.tol;
  mopts.max_steps = k_max;
  mopts.constraint = ConstraintSpec::negative_cone();
  mopts.constraint_period = 1;
  MinresSolution sol = minres_lyapunov(A, b, mopts);
  write_history_csv(out_path(cfg, "ex51_minres.csv"), sol.history, true);
  write_minres_diagnostics_csv(out_path(cfg, "ex51_diagnostics.csv"), sol);

  int onset = -1;
  for (const DefinitenessRecord& r : sol.definiteness)
    if (r.wrong_sign_count > 0) {
      onset = r.k;
      break;
    }
  double max_violation = 0.0;
  bool con_never_worse = true;
  for (size_t i = 0; i < sol.history.size(); ++i) {
    if (std::isfinite(sol.con_violation[i]))
      max_violation = std::max(max_violation, sol.con_violation[i]);
    if (std::isfinite(sol.residual_rel_con[i]) &&
        sol.residual_rel_con[i] < sol.history[i].residual_rel - 1e-10)
      con_never_worse = false;
  }

  nlohmann::json s;
  s["experiment"] = "ex51";
  s["n"] = n;
  s["seed"] = cfg.seed;
  s["tol"] = cfg.tol;
  s["q_cond"] = cfg.q_cond;
  s["k_star_galerkin"] = kg;
  s["iterations"] = sol.iterations();
  s["converged"] = sol.converged();
  s["final_residual_rel_uncon"] = sol.history.back().residual_rel;
  s["final_residual_rel_con"] = sol.residual_rel_con.back();
  s["indefiniteness_onset_k"] = onset;
  s["max_cone_violation_rel"] = max_violation;
  s["constrained_residual_never_below_unconstrained"] = con_never_worse;
  s["seconds"] = sol.history.back().seconds;
  write_json(out_path(cfg, "ex51_summary.json"), s);
  return s;
}

}  // namespace detail

/// Run the configured experiment; emits CSVs plus a summary JSON into
/// cfg.output_dir and returns the summary.
inline nlohmann::json run_experiment(const ExperimentConfig& cfg) {
  if (cfg.experiment == "ex41") return detail::run_ex41(cfg);
  if (cfg.experiment == "ex42") return detail::run_ex42(cfg);
  if (cfg.experiment == "ex25") return detail::run_ex25(cfg);
  if (cfg.experiment == "ex51") return detail::run_ex51(cfg);
  throw ConfigError("unknown experiment '" + cfg.experiment + "'");
}

}  // namespace meq
