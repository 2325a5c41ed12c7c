// Acceptance suite: end-to-end statistical checks for the whole library.
// Prints one PASS/FAIL line per criterion and exits with the failure count.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "flr/csv.hpp"
#include "flr/estimator.hpp"
#include "flr/fpca.hpp"
#include "flr/grid.hpp"
#include "flr/rng.hpp"
#include "flr/simlab.hpp"

using namespace flr;
namespace fs = std::filesystem;

namespace {

int failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
  if (!pass) ++failures;
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << name
            << " - " << detail << " (" << std::fixed << std::setprecision(1)
            << seconds << " s)" << std::defaultfloat << '\n'
            << std::flush;
}

std::string format_cells(const McTable& table, const std::vector<double>& target) {
  std::ostringstream out;
  out << std::setprecision(3);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (i) out << ' ';
    out << table.rows[i].ase << "/" << target[i];
  }
  return out.str();
}

bool cells_match(const McTable& table, const std::vector<double>& target,
                 double abs_tol, std::string& detail) {
  bool ok = true;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double tol = std::max(abs_tol, 3.0 * table.rows[i].mc_se);
    if (std::abs(table.rows[i].ase - target[i]) > tol) ok = false;
  }
  detail = "ase/target per threshold: " + format_cells(table, target);
  return ok;
}

// criteria 1 and 2: Table-1 reproduction at n = 100, 500 replicates
void table1_reproduction() {
  McConfig cfg;
  cfg.n = 100;
  cfg.reps = 500;
  cfg.seed = 1001;
  cfg.thresholds = {0.001, 0.01, 0.05, 0.1, 0.15, 0.2};
  cfg.observation_count = 0;  // study default k = 200
  cfg.noisy_arm = false;

  Timer t1;
  const auto continuous_run = run_study1(cfg);
  std::string detail;
  const bool pass1 = cells_match(continuous_run.continuous,
                                 {0.026, 0.019, 0.015, 0.014, 0.013, 0.015}, 0.006,
                                 detail);
  report(1, "study-1 continuous-arm ASE", pass1, detail, t1.seconds());

  Timer t2;
  cfg.noisy_arm = true;
  const auto both = run_study1(cfg);
  const bool pass2 = cells_match(*both.noisy,
                                 {0.035, 0.022, 0.016, 0.017, 0.015, 0.016}, 0.006,
                                 detail);
  report(2, "study-1 noisy-discrete-arm ASE", pass2, detail, t2.seconds());
}

void study2_qualitative() {
  Timer timer;
  McConfig cfg;
  cfg.n = 100;
  cfg.reps = 500;
  cfg.seed = 1003;
  cfg.thresholds = {0.001, 0.01, 0.05, 0.1, 0.15, 0.2};
  cfg.noisy_arm = false;
  const auto result = run_study2(cfg);
  const auto& rows = result.continuous.rows;

  double min_ase = rows[0].ase, max_ase = rows[0].ase;
  std::size_t argmin_ase = 0, argmin_mise = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].ase < min_ase) {
      min_ase = rows[i].ase;
      argmin_ase = i;
    }
    max_ase = std::max(max_ase, rows[i].ase);
    if (rows[i].mise < rows[argmin_mise].mise) argmin_mise = i;
  }
  const double mise_ratio = rows[0].mise / rows[3].mise;  // t = 0.001 vs t = 0.1

  const bool flat = max_ase <= 4.0 * min_ase;
  const bool spiked = mise_ratio >= 50.0;
  const bool undersmoothed =
      rows[argmin_ase].threshold <= rows[argmin_mise].threshold;

  std::ostringstream detail;
  detail << std::setprecision(3) << "prediction max/min = " << max_ase / min_ase
         << " (<= 4), MISE(0.001)/MISE(0.1) = " << mise_ratio
         << " (>= 50), optimal t: prediction " << rows[argmin_ase].threshold
         << " <= slope-estimation " << rows[argmin_mise].threshold;
  report(3, "study-2 prediction flatness vs MISE spike", flat && spiked && undersmoothed,
         detail.str(), timer.seconds());
}

void rate_regimes() {
  Timer timer;
  const std::vector<int> n_list{100, 200, 400, 800, 1600};
  std::ostringstream detail;
  bool pass = true;

  RegimeParams rough;  // third branch of the rate function
  rough.alpha = 2.0;
  rough.beta = 3.0;
  rough.gamma = 1.0;
  const auto r1 = run_rate_experiment(
      rough, n_list, 200, CutoffRule::deterministic(2.0, 3.0, 1.0), 1004);
  pass &= std::abs(r1.fitted_exponent - r1.theoretical_exponent) <= 0.15;
  detail << std::setprecision(3) << "slope " << r1.fitted_exponent << " vs "
         << r1.theoretical_exponent << " (" << r1.regime << ")";

  RegimeParams smooth;  // first branch, parametric rate
  smooth.alpha = 2.0;
  smooth.beta = 4.0;
  smooth.gamma = 2.0;
  const auto r2 = run_rate_experiment(
      smooth, n_list, 200, CutoffRule::deterministic(2.0, 4.0, 2.0), 1014);
  pass &= std::abs(r2.fitted_exponent - r2.theoretical_exponent) <= 0.15;
  detail << "; slope " << r2.fitted_exponent << " vs " << r2.theoretical_exponent
         << " (" << r2.regime << "), both within 0.15";

  report(4, "rate-regime exponents", pass, detail.str(), timer.seconds());
}

void perturbation_bounds() {
  Timer timer;
  auto grid = make_uniform_grid(201);
  auto spec = PopulationSpec::study1(grid);
  auto K_true = population_covariance(spec.theta, grid);
  auto truth = eigendecompose(K_true, 10);

  int violations = 0;
  const int reps = 200;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream xs(1005, static_cast<std::uint64_t>(rep), StreamRole::predictor);
    std::vector<GridFunction> samples;
    samples.reserve(100);
    for (int i = 0; i < 100; ++i) samples.push_back(sample_X(spec, xs));
    const auto K_hat = empirical_covariance(samples);
    const auto sys = eigendecompose(K_hat, 10);
    const auto rp = perturbation_report(K_hat, K_true, sys, truth, 5);
    if (rp.eigenvalue_gaps > rp.delta_norm + 1e-6) ++violations;
    for (double err : rp.aligned_eigenfunction_errors)
      if (err > std::sqrt(8.0) * rp.delta_norm + 1e-6) {
        ++violations;
        break;
      }
  }
  std::ostringstream detail;
  detail << violations << " violations in " << reps << " replicates (j <= 5)";
  report(5, "eigen-perturbation inequalities", violations == 0, detail.str(),
         timer.seconds());
}

void eigen_recovery() {
  Timer timer;
  auto grid = make_uniform_grid(201);
  auto spec = PopulationSpec::study1(grid);
  const double expected[] = {4.0, 1.0, 4.0 / 9.0, 0.25, 4.0 / 25.0};

  const int reps = 50;
  int hits = 0;
  for (int rep = 0; rep < reps; ++rep) {
    RngStream xs(1006, static_cast<std::uint64_t>(rep), StreamRole::predictor);
    std::vector<GridFunction> samples;
    samples.reserve(2000);
    for (int i = 0; i < 2000; ++i) samples.push_back(sample_X(spec, xs));
    const auto sys = eigendecompose(empirical_covariance(samples), 5);
    bool all_close = true;
    for (int j = 1; j <= 5; ++j)
      if (std::abs(sys.eigenvalue(j) - expected[j - 1]) > 0.10 * expected[j - 1])
        all_close = false;
    if (all_close) ++hits;
  }
  std::ostringstream detail;
  detail << hits << "/" << reps << " replicates within 10% (need >= 95%)";
  report(6, "eigenvalue recovery at n = 2000", hits >= 48, detail.str(),
         timer.seconds());
}

void lower_bound_numerics() {
  Timer timer;
  RegimeParams regime;
  regime.alpha = 2.0;
  regime.beta = 2.0;
  regime.gamma = 1.0;

  const auto r4 = lower_bound_construct(regime, 10000, 1.0);
  const auto r5 = lower_bound_construct(regime, 100000, 1.0);
  const double nvn_spread = relative_spread({r4.n_V_n, r5.n_V_n});
  const double chi_spread = relative_spread({r4.chi_sq_mean, r5.chi_sq_mean});

  std::vector<double> log_n, log_t;
  for (long long n : {1000LL, 10000LL, 100000LL}) {
    const auto r = lower_bound_construct(regime, n, 1.0);
    log_n.push_back(std::log(static_cast<double>(n)));
    log_t.push_back(std::log(r.T_B1));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    sx += log_n[i];
    sy += log_t[i];
    sxx += log_n[i] * log_n[i];
    sxy += log_n[i] * log_t[i];
  }
  const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);

  const bool pass =
      nvn_spread < 0.05 && chi_spread < 0.05 && std::abs(slope + 0.4) <= 0.1;
  std::ostringstream detail;
  detail << std::setprecision(3) << "nV_n spread " << nvn_spread
         << " (< 0.05), chi-sq-mean spread " << chi_spread
         << " (< 0.05), T(B1) slope " << slope << " vs -0.4 +- 0.1";
  report(7, "lower-bound stabilization and scaling", pass, detail.str(),
         timer.seconds());
}

void oracle_discipline() {
  Timer timer;
  auto spec = PopulationSpec::study1(make_uniform_grid(201));
  const double quadrature_oracle = inner_product(spec.slope(), spec.predictand());
  const double analytic = 1.01734306137581;  // sum_{j<=50} j^-6, frozen
  const bool pass = std::abs(quadrature_oracle - analytic) <= 1e-4;
  std::ostringstream detail;
  detail << std::setprecision(12) << "quadrature " << quadrature_oracle
         << " vs truncated series " << analytic
         << "; the reference value 1.0141 sometimes quoted for this mean is recorded as a documented discrepancy, not a target";
  report(8, "prediction-oracle discipline", pass, detail.str(), timer.seconds());
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int run_cli(const std::string& args, const fs::path& log_dir) {
  const std::string cmd = std::string(FLR_CLI_PATH) + " " + args + " > " +
                          (log_dir / "stdout.txt").string() + " 2> " +
                          (log_dir / "stderr.txt").string();
  return WEXITSTATUS(std::system(cmd.c_str()));
}

void cli_determinism() {
  Timer timer;
  const fs::path root = fs::temp_directory_path() / "flr_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  bool pass = true;
  std::ostringstream detail;

  // a small dataset for fit / predict / eigen
  {
    auto spec = PopulationSpec::study1(make_uniform_grid(41), 10);
    RngStream xs(77, 0, StreamRole::predictor);
    RngStream es(77, 0, StreamRole::regression_noise);
    auto data = sample_dataset(spec, 25, xs, es);
    Eigen::MatrixXd xmat(25, 41);
    for (int i = 0; i < 25; ++i)
      xmat.row(i) = data.X[static_cast<std::size_t>(i)].values().transpose();
    csv::write_matrix(root / "x.csv", xmat);
    csv::write_matrix(root / "y.csv", data.Y);
    csv::write_matrix(root / "xpred.csv", xmat.topRows(2));
  }

  struct Command {
    std::string name;
    std::string args;              // without --out-dir
    std::vector<std::string> outputs;
    bool thread_variant;
  };
  const std::vector<Command> commands = {
      {"fit", "--seed 3 fit --x " + (root / "x.csv").string() + " --y " +
                  (root / "y.csv").string() + " --threshold 0.05",
       {"fit_coeffs.csv", "fit_bhat.csv", "fit_btilde.csv", "fit_summary.txt"},
       false},
      {"eigen", "--seed 3 eigen --x " + (root / "x.csv").string() + " --components 4",
       {"eigenvalues.csv", "eigenfunctions.csv"},
       false},
      {"simulate",
       "--seed 3 simulate --study 1 --arm both --n 40 --reps 3 --k 80 "
       "--thresholds 0.05,0.2",
       {"study1_continuous.csv", "study1_noisy.csv"},
       true},
      {"rates", "--seed 3 rates --alpha 2 --beta 3 --gamma 1 --n-list 50,100,200 --reps 3",
       {"rates.csv", "rates_summary.txt"},
       true},
      {"lowerbound", "--seed 3 lowerbound --alpha 2 --beta 2 --gamma 1 --sigma 1 "
                     "--n-list 1000,10000",
       {"lowerbound.csv"},
       false},
  };

  for (const auto& cmd : commands) {
    const fs::path d1 = root / (cmd.name + "_1");
    const fs::path d2 = root / (cmd.name + "_2");
    fs::create_directories(d1);
    fs::create_directories(d2);
    const int rc1 = run_cli("--out-dir " + d1.string() + " " + cmd.args, d1);
    const int rc2 = run_cli("--out-dir " + d2.string() + " " + cmd.args, d2);
    bool identical = rc1 == 0 && rc2 == 0;
    for (const auto& file : cmd.outputs)
      identical = identical && !slurp(d1 / file).empty() &&
                  slurp(d1 / file) == slurp(d2 / file);
    if (cmd.thread_variant && identical) {
      const fs::path d3 = root / (cmd.name + "_3");
      fs::create_directories(d3);
      const std::string threaded = "--threads 4 --out-dir " + d3.string() + " " + cmd.args;
      identical = run_cli(threaded, d3) == 0;
      for (const auto& file : cmd.outputs)
        identical = identical && slurp(d1 / file) == slurp(d3 / file);
    }
    if (!identical) {
      pass = false;
      detail << cmd.name << " not reproducible; ";
    }
  }

  // predict from the first fit directory
  {
    const fs::path pd = root / "predict_1";
    const fs::path pd2 = root / "predict_2";
    fs::create_directories(pd);
    fs::create_directories(pd2);
    const std::string args = "predict --fit-dir " + (root / "fit_1").string() +
                             " --x " + (root / "xpred.csv").string();
    const bool ok = run_cli("--out-dir " + pd.string() + " " + args, pd) == 0 &&
                    run_cli("--out-dir " + pd2.string() + " " + args, pd2) == 0 &&
                    slurp(pd / "predictions.csv") == slurp(pd2 / "predictions.csv") &&
                    !slurp(pd / "predictions.csv").empty();
    if (!ok) {
      pass = false;
      detail << "predict not reproducible; ";
    }
  }

  if (pass) detail << "all commands byte-identical across reruns and thread counts";
  report(9, "CLI determinism", pass, detail.str(), timer.seconds());
}

}  // namespace

int main() {
  std::cout << "flr acceptance suite\n";
  table1_reproduction();
  study2_qualitative();
  rate_regimes();
  perturbation_bounds();
  eigen_recovery();
  lower_bound_numerics();
  oracle_discipline();
  cli_determinism();
  std::cout << (failures == 0 ? "all criteria passed\n"
                              : std::to_string(failures) + " criterion(s) failed\n");
  return failures;
}
