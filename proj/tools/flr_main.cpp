// flr: functional linear regression with principal-component truncation.
// Subcommands: fit, predict, eigen, simulate, rates, lowerbound.
// Exit codes: 0 success, 2 user error, 3 numeric failure.

#include <CLI11.hpp>
#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "flr/csv.hpp"
#include "flr/errors.hpp"
#include "flr/estimator.hpp"
#include "flr/fpca.hpp"
#include "flr/grid.hpp"
#include "flr/log.hpp"
#include "flr/presmooth.hpp"
#include "flr/simlab.hpp"

namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string out_dir = ".";
};

struct RuleOptions {
  double threshold = 0.1;
  bool threshold_set = false;
  double scale_C = 0.0;
  double scale_c = 0.5;
  int fixed_m = -1;
  bool deterministic = false;
};

struct RegimeOptions {
  flr::RegimeParams params;
  void add_flags(CLI::App* cmd, bool with_constants) {
    cmd->add_option("--alpha", params.alpha, "eigenvalue decay exponent");
    cmd->add_option("--beta", params.beta, "slope coefficient decay exponent");
    cmd->add_option("--gamma", params.gamma, "predictand coefficient decay exponent");
    if (with_constants) {
      cmd->add_option("--scale-theta", params.C, "eigenvalue scale C");
      cmd->add_option("--scale-b", params.C1, "slope coefficient scale C1");
      cmd->add_option("--scale-x", params.C2, "predictand coefficient scale C2");
    }
    cmd->add_option("--c3", params.C3, "fallback slope when the norm truncation fires");
    cmd->add_option("--c4", params.C4, "norm truncation scale");
    cmd->add_option("--c5", params.C5, "norm truncation exponent");
  }
};

flr::CutoffRule build_rule(const RuleOptions& opt, const flr::RegimeParams& regime) {
  const int picked = (opt.threshold_set ? 1 : 0) + (opt.scale_C > 0.0 ? 1 : 0) +
                     (opt.fixed_m >= 0 ? 1 : 0) + (opt.deterministic ? 1 : 0);
  if (picked > 1)
    throw std::invalid_argument("choose one cut-off rule: --threshold, "
                                "--threshold-scale, --m-fixed or --deterministic");
  if (opt.scale_C > 0.0) return flr::CutoffRule::threshold_scaled(opt.scale_C, opt.scale_c);
  if (opt.fixed_m >= 0) return flr::CutoffRule::fixed(opt.fixed_m);
  if (opt.deterministic)
    return flr::CutoffRule::deterministic(regime.alpha, regime.beta, regime.gamma);
  return flr::CutoffRule::threshold(opt.threshold);
}

fs::path prepare_out_dir(const GlobalOptions& global) {
  fs::path dir(global.out_dir);
  fs::create_directories(dir);
  return dir;
}

void write_key_values(const fs::path& path,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream out(path);
  if (!out) throw flr::CsvError("cannot write " + path.string(), 0);
  for (const auto& [key, value] : kv) out << key << '=' << value << '\n';
}

std::map<std::string, std::string> read_key_values(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw flr::CsvError("cannot open " + path.string(), 0);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

int run_fit(const GlobalOptions& global, const std::string& x_path,
            const std::string& y_path, const RuleOptions& rule_opt,
            const RegimeOptions& regime_opt) {
  const auto curves = flr::csv::read_curves(x_path);
  const Eigen::VectorXd y = flr::csv::read_vector(y_path);
  if (static_cast<int>(curves.size()) != y.size())
    throw std::invalid_argument("fit: " + std::to_string(curves.size()) +
                                " curves but " + std::to_string(y.size()) +
                                " responses");

  flr::Dataset data{curves, y};
  const auto rule = build_rule(rule_opt, regime_opt.params);
  const flr::SlopeFit fit = flr::fit(data, rule, regime_opt.params);

  const fs::path dir = prepare_out_dir(global);
  Eigen::MatrixXd coeffs(fit.m, 3);
  for (int j = 1; j <= fit.m; ++j) {
    coeffs(j - 1, 0) = j;
    coeffs(j - 1, 1) = fit.eigensystem.eigenvalue(j);
    coeffs(j - 1, 2) = fit.b_coeffs[j - 1];
  }
  flr::csv::write_matrix(dir / "fit_coeffs.csv", coeffs, "j,theta_hat,b_hat");
  flr::csv::write_row(dir / "fit_bhat.csv", fit.b_hat.values());
  flr::csv::write_row(dir / "fit_btilde.csv", fit.b_tilde.values());

  Eigen::MatrixXd eigenfunctions(fit.m, fit.b_hat.grid().point_count);
  for (int j = 1; j <= fit.m; ++j)
    eigenfunctions.row(j - 1) = fit.eigensystem.functions().col(j - 1).transpose();
  flr::csv::write_matrix(dir / "fit_eigenfunctions.csv", eigenfunctions);

  write_key_values(dir / "fit_summary.txt",
                   {{"n", std::to_string(data.size())},
                    {"grid_points", std::to_string(fit.b_hat.grid().point_count)},
                    {"m_hat", std::to_string(fit.m)},
                    {"a_hat", flr::csv::format(fit.intercept)},
                    {"b_norm", flr::csv::format(fit.slope_norm)},
                    {"truncated", fit.truncated ? "1" : "0"},
                    {"rule", rule.describe()}});
  std::cout << "fit: m_hat=" << fit.m << " a_hat=" << flr::csv::format(fit.intercept)
            << " b_norm=" << flr::csv::format(fit.slope_norm)
            << (fit.truncated ? " (norm-truncated)" : "") << '\n';
  return 0;
}

int run_predict(const GlobalOptions& global, const std::string& fit_dir,
                const std::string& x_path) {
  const auto kv = read_key_values(fs::path(fit_dir) / "fit_summary.txt");
  const double a_hat = std::stod(kv.at("a_hat"));
  const Eigen::VectorXd b_values =
      flr::csv::read_vector(fs::path(fit_dir) / "fit_btilde.csv");
  const auto grid = flr::make_uniform_grid(static_cast<int>(b_values.size()));
  const flr::GridFunction b_tilde(grid, b_values);

  const auto curves = flr::csv::read_curves(x_path);
  Eigen::VectorXd predictions(static_cast<Eigen::Index>(curves.size()));
  for (std::size_t i = 0; i < curves.size(); ++i) {
    if (!flr::same_grid(curves[i].grid(), *grid))
      throw std::invalid_argument("predict: x row has " +
                                  std::to_string(curves[i].grid().point_count) +
                                  " points, fit expects " +
                                  std::to_string(grid->point_count));
    predictions[static_cast<Eigen::Index>(i)] =
        a_hat + flr::inner_product(b_tilde, curves[i]);
  }
  const fs::path dir = prepare_out_dir(global);
  flr::csv::write_matrix(dir / "predictions.csv", predictions);
  std::cout << "predict: wrote " << curves.size() << " predictions\n";
  return 0;
}

int run_eigen(const GlobalOptions& global, const std::string& x_path, int components) {
  const auto curves = flr::csv::read_curves(x_path);
  const auto cov = flr::empirical_covariance(curves);
  const int max_components =
      components > 0 ? components
                     : std::min<int>(static_cast<int>(curves.size()),
                                     cov.grid->point_count);
  const auto sys = flr::eigendecompose(cov, max_components);

  const fs::path dir = prepare_out_dir(global);
  flr::csv::write_matrix(dir / "eigenvalues.csv", sys.eigenvalues());
  flr::csv::write_matrix(dir / "eigenfunctions.csv", sys.functions().transpose());
  std::cout << "eigen: " << sys.count() << " components, theta_1="
            << flr::csv::format(sys.count() ? sys.eigenvalue(1) : 0.0) << '\n';
  return 0;
}

int run_simulate(const GlobalOptions& global, int study, const std::string& arm,
                 bool paper_defaults, flr::McConfig cfg) {
  cfg.seed = global.seed;
  cfg.threads = global.threads;
  if (paper_defaults) {
    cfg.n = 100;
    cfg.reps = 500;
    cfg.thresholds = {0.001, 0.01, 0.05, 0.1, 0.15, 0.2};
    cfg.observation_count = 0;  // study default: 200 for study 1, 500 for study 2
  }
  cfg.noisy_arm = arm != "continuous";
  const bool want_continuous = arm != "noisy";

  const flr::StudyResult result =
      study == 1 ? flr::run_study1(cfg) : flr::run_study2(cfg);

  const fs::path dir = prepare_out_dir(global);
  const std::string stem = "study" + std::to_string(study);
  if (want_continuous)
    flr::csv::write_mc_table(dir / (stem + "_continuous.csv"), result.continuous);
  if (result.noisy)
    flr::csv::write_mc_table(dir / (stem + "_noisy.csv"), *result.noisy);
  std::cout << "simulate: study " << study << ", oracle="
            << flr::csv::format(result.oracle) << ", reps=" << cfg.reps << '\n';
  return 0;
}

int run_rates(const GlobalOptions& global, const RegimeOptions& regime_opt,
              const std::vector<int>& n_list, int reps, double sigma,
              const RuleOptions& rule_opt) {
  RuleOptions rule = rule_opt;
  if (!rule.threshold_set && rule.scale_C <= 0.0 && rule.fixed_m < 0)
    rule.deterministic = true;
  for (const auto& warning : regime_opt.params.validate()) flr::log::warn(warning);

  const flr::RateResult result = flr::run_rate_experiment(
      regime_opt.params, n_list, reps, build_rule(rule, regime_opt.params),
      global.seed, sigma, global.threads);

  const fs::path dir = prepare_out_dir(global);
  Eigen::MatrixXd table(static_cast<Eigen::Index>(result.points.size()), 4);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const auto& p = result.points[i];
    table(static_cast<Eigen::Index>(i), 0) = p.n;
    table(static_cast<Eigen::Index>(i), 1) = p.m0;
    table(static_cast<Eigen::Index>(i), 2) = p.mse;
    table(static_cast<Eigen::Index>(i), 3) = p.mc_se;
  }
  flr::csv::write_matrix(dir / "rates.csv", table, "n,m,mse,mc_se");
  write_key_values(dir / "rates_summary.txt",
                   {{"fitted_exponent", flr::csv::format(result.fitted_exponent)},
                    {"theoretical_exponent",
                     flr::csv::format(result.theoretical_exponent)},
                    {"regime", result.regime}});
  std::cout << "rates: regime '" << result.regime << "', fitted exponent "
            << flr::csv::format(result.fitted_exponent) << " vs theoretical "
            << flr::csv::format(result.theoretical_exponent);
  if (result.regime == "alpha+1 = 2*gamma")
    std::cout << " (up to the log n factor)";
  std::cout << '\n';
  return 0;
}

int run_lowerbound(const GlobalOptions& global, const RegimeOptions& regime_opt,
                   double sigma, const std::vector<long long>& n_list) {
  const fs::path dir = prepare_out_dir(global);
  std::ofstream out(dir / "lowerbound.csv");
  if (!out) throw flr::CsvError("cannot write lowerbound.csv", 0);
  out << "n,nu,t_b0,t_b1,v_n,n_v_n,chi_sq_mean,scaling_check,flagged\n";
  for (long long n : n_list) {
    try {
      const auto report = flr::lower_bound_construct(regime_opt.params, n, sigma);
      out << n << ',' << report.nu << ',' << flr::csv::format(report.T_B0) << ','
          << flr::csv::format(report.T_B1) << ',' << flr::csv::format(report.V_n)
          << ',' << flr::csv::format(report.n_V_n) << ','
          << flr::csv::format(report.chi_sq_mean) << ','
          << flr::csv::format(report.scaling_check) << ",0\n";
      flr::csv::write_lower_bound_report(
          dir / ("lowerbound_n" + std::to_string(n) + ".txt"), report);
    } catch (const flr::DivergentDistance&) {
      out << n << ",0,0,0,0,0,0,0,1\n";  // flagged: chi-squared distance diverges
      flr::log::warn("lowerbound: n=" + std::to_string(n) +
                     " too small, 2 V_n >= sigma^2");
    }
  }
  std::cout << "lowerbound: wrote " << n_list.size() << " rows\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional linear regression: principal-component estimation, "
               "prediction, and Monte Carlo studies"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; command-line flags win");

  GlobalOptions global;
  app.add_option("--seed", global.seed, "master seed for all random streams");
  app.add_option("--threads", global.threads, "replicate-level parallelism")
      ->check(CLI::PositiveNumber);
  app.add_option("--out-dir", global.out_dir, "output directory");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit the slope function from CSV data");
  std::string x_path, y_path;
  fit_cmd->add_option("--x", x_path, "curves CSV, one row per curve")->required();
  fit_cmd->add_option("--y", y_path, "responses CSV, one value per curve")->required();
  RuleOptions fit_rule;
  fit_cmd->add_option("--threshold", fit_rule.threshold, "eigenvalue threshold t");
  fit_cmd->add_option("--threshold-scale", fit_rule.scale_C, "C in t = C n^-c");
  fit_cmd->add_option("--threshold-exp", fit_rule.scale_c, "c in t = C n^-c");
  fit_cmd->add_option("--m-fixed", fit_rule.fixed_m, "fixed cut-off m");
  fit_cmd->add_flag("--deterministic", fit_rule.deterministic,
                    "deterministic cut-off m0(n) from alpha/beta/gamma");
  RegimeOptions fit_regime;
  fit_regime.add_flags(fit_cmd, false);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "predict from stored fit files");
  std::string fit_dir = ".", predict_x;
  predict_cmd->add_option("--fit-dir", fit_dir, "directory with fit outputs");
  predict_cmd->add_option("--x", predict_x, "curves CSV to predict for")->required();

  // eigen
  auto* eigen_cmd = app.add_subcommand("eigen", "empirical eigenvalues/functions");
  std::string eigen_x;
  int eigen_components = 0;
  eigen_cmd->add_option("--x", eigen_x, "curves CSV")->required();
  eigen_cmd->add_option("--components", eigen_components, "components to keep");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo reproduction studies");
  int study = 1;
  std::string arm = "both";
  bool paper_defaults = false;
  flr::McConfig cfg;
  cfg.observation_count = 0;
  sim_cmd->add_option("--study", study, "study 1 or 2")->check(CLI::Range(1, 2));
  sim_cmd->add_option("--arm", arm, "continuous | noisy | both")
      ->check(CLI::IsMember({"continuous", "noisy", "both"}));
  sim_cmd->add_flag("--paper-defaults", paper_defaults,
                    "n=100, reps=500, thresholds {0.001,0.01,0.05,0.1,0.15,0.2}");
  sim_cmd->add_option("--n", cfg.n, "sample size per replicate");
  sim_cmd->add_option("--reps", cfg.reps, "Monte Carlo replicates");
  sim_cmd->add_option("--thresholds", cfg.thresholds, "threshold values")
      ->delimiter(',');
  sim_cmd->add_option("--k", cfg.observation_count,
                      "observation grid size for the noisy arm (0 = study default)");
  sim_cmd->add_option("--obs-noise", cfg.observation_noise_sd,
                      "observation noise standard deviation");
  sim_cmd->add_option("--smooth-order", cfg.smoothing_order,
                      "series smoother order (-1 = population truncation)");
  bool independent_draws = false;
  sim_cmd->add_flag("--independent-draws", independent_draws,
                    "draw fresh predictor paths for the noisy arm");

  // rates
  auto* rates_cmd = app.add_subcommand("rates", "convergence-rate experiment");
  RegimeOptions rates_regime;
  rates_regime.add_flags(rates_cmd, true);
  std::vector<int> rate_n_list{100, 200, 400, 800, 1600};
  int rate_reps = 200;
  double rate_sigma = 1.0;
  rates_cmd->add_option("--n-list", rate_n_list, "sample sizes (need >= 3)")
      ->delimiter(',');
  rates_cmd->add_option("--reps", rate_reps, "replicates per sample size");
  rates_cmd->add_option("--sigma", rate_sigma, "regression noise sd");
  RuleOptions rates_rule;
  rates_cmd->add_option("--threshold", rates_rule.threshold,
                        "use a fixed threshold instead of m0(n)");

  // lowerbound
  auto* lb_cmd = app.add_subcommand("lowerbound", "two-point lower-bound numerics");
  RegimeOptions lb_regime;
  lb_regime.params.beta = 2.0;
  lb_regime.params.gamma = 1.0;
  lb_regime.add_flags(lb_cmd, false);
  double lb_sigma = 1.0;
  std::vector<long long> lb_n_list{1000, 10000, 100000};
  lb_cmd->add_option("--sigma", lb_sigma, "error standard deviation")->required();
  lb_cmd->add_option("--n-list", lb_n_list, "sample sizes")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  fit_rule.threshold_set = fit_cmd->count("--threshold") > 0;
  rates_rule.threshold_set = rates_cmd->count("--threshold") > 0;

  try {
    if (*fit_cmd) return run_fit(global, x_path, y_path, fit_rule, fit_regime);
    if (*predict_cmd) return run_predict(global, fit_dir, predict_x);
    if (*eigen_cmd) return run_eigen(global, eigen_x, eigen_components);
    if (*sim_cmd) {
      cfg.share_draws = !independent_draws;
      return run_simulate(global, study, arm, paper_defaults, cfg);
    }
    if (*rates_cmd)
      return run_rates(global, rates_regime, rate_n_list, rate_reps, rate_sigma,
                       rates_rule);
    if (*lb_cmd) return run_lowerbound(global, lb_regime, lb_sigma, lb_n_list);
  } catch (const flr::IllConditionedComponent& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const flr::NumericFailure& e) {
    std::cerr << "numeric failure: " << e.what()
              << " (residual " << e.residual_norm() << ")\n";
    return 3;
  } catch (const flr::CsvError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
