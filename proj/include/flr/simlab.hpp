#ifndef FLR_SIMLAB_HPP
#define FLR_SIMLAB_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flr/estimator.hpp"
#include "flr/grid.hpp"
#include "flr/rng.hpp"

namespace flr {

/// Generative model for simulation: Karhunen-Loeve eigenvalues theta_j,
/// slope coefficients b_j, predictand coefficients x_j (all in the cosine
/// basis, truncated at J), intercept and error standard deviation.
struct PopulationSpec {
  GridPtr grid;
  Eigen::VectorXd theta;     // length J, >= 0, strictly decreasing
  Eigen::VectorXd b_coeffs;  // length J
  Eigen::VectorXd x_coeffs;  // length J
  double intercept = 0.0;
  double noise_sd = 0.0;

  int truncation() const { return static_cast<int>(theta.size()); }
  GridFunction slope() const;       // synthesized b
  GridFunction predictand() const;  // synthesized x

  /// Validates the invariants (sizes, positivity, strict decrease).
  void check() const;

  /// First simulation study: theta_j = 4 j^-2, b_j = j^-4, x_j = j^-2,
  /// noise sd 2, intercept 0.
  static PopulationSpec study1(GridPtr grid, int J = 50);

  /// Second study: same X process, b_j = 10 j^-2, x_j = j^-1.6.
  static PopulationSpec study2(GridPtr grid, int J = 50);

  /// Power-law population theta_j = C j^-alpha, b_j = C1 j^-beta,
  /// x_j = C2 j^-gamma for rate experiments.
  static PopulationSpec from_regime(const RegimeParams& regime, GridPtr grid,
                                    double noise_sd, int J = 50);
};

/// Karhunen-Loeve coefficient draw: z_j ~ Normal(0, theta_j), j = 1..J.
Eigen::VectorXd sample_scores(const PopulationSpec& spec, RngStream& stream);

/// One curve X = sum_j z_j phi_j on the population grid.
GridFunction sample_X(const PopulationSpec& spec, RngStream& stream);

/// n curves plus responses Y_i = a + <b, X_i> + sigma eps_i.
Dataset sample_dataset(const PopulationSpec& spec, int n, RngStream& x_stream,
                       RngStream& noise_stream);

/// Monte Carlo configuration for the reproduction studies.
struct McConfig {
  int n = 100;
  int reps = 500;
  std::uint64_t seed = 0;
  std::vector<double> thresholds = {0.001, 0.01, 0.05, 0.1, 0.15, 0.2};
  int observation_count = 200;  // k, noisy-discrete arm
  double observation_noise_sd = 1.0;
  bool noisy_arm = true;
  bool share_draws = true;   // noisy arm replays the continuous arm's X draws
  int smoothing_order = -1;  // < 0: use the population truncation J
  int threads = 1;

  void check() const;
};

struct McRow {
  double threshold;
  double ase;    // average squared prediction error against the oracle
  double mc_se;  // Monte Carlo standard error of the ASE
  double mise;   // mean integrated squared error of b_hat
};

struct McTable {
  std::vector<McRow> rows;
};

struct StudyResult {
  double oracle;  // a + <b, x> by quadrature
  McTable continuous;
  std::optional<McTable> noisy;
};

/// Runs a study for an explicit population (both arms per cfg).
StudyResult run_study(const PopulationSpec& spec, const McConfig& cfg);

/// Study presets; cfg.n and cfg.thresholds apply as given.
StudyResult run_study1(const McConfig& cfg);
StudyResult run_study2(const McConfig& cfg);  // noisy arm expects cfg.observation_count = 500

/// One sample-size point of a rate experiment.
struct RatePoint {
  int n;
  int m0;
  double mse;
  double mc_se;
};

struct RateResult {
  std::vector<RatePoint> points;
  double fitted_exponent;       // least-squares slope of log MSE on log n
  double theoretical_exponent;  // from the rate function tau(n)
  std::string regime;           // which branch fired
};

/// Monte Carlo estimate of E(<b_tilde, x> - <b, x>)^2 across n_list under a
/// power-law population built from the regime, with the supplied cut-off
/// rule. Requires at least 3 sample sizes.
RateResult run_rate_experiment(const RegimeParams& regime,
                               const std::vector<int>& n_list, int reps,
                               const CutoffRule& rule, std::uint64_t seed,
                               double noise_sd = 1.0, int threads = 1);

/// Two-point lower-bound construction with theta_j = j^-alpha, x_j = j^-gamma.
struct LowerBoundReport {
  long long n;
  int nu;              // floor(n^{1/(alpha+2beta-1)})
  double T_B0;         // always 0
  double T_B1;         // sum_{nu+1}^{2nu} j^{-(beta+gamma)}
  double V_n;          // sum_{nu+1}^{2nu} j^{-alpha-2beta}
  double n_V_n;
  double chi_sq_mean;  // (1 - 2 V_n / sigma^2)^{-n/2}
  double scaling_check;  // T_B1 * n^{(beta+gamma-1)/(alpha+2beta-1)}
};

/// Throws DivergentDistance when 2 V_n >= sigma^2.
LowerBoundReport lower_bound_construct(const RegimeParams& regime, long long n,
                                       double sigma);

/// Symmetric relative spread of a set of values: (max-min)/(max+min).
/// This is the stability measure used by the lower-bound diagnostics.
double relative_spread(const std::vector<double>& values);

}  // namespace flr

#endif  // FLR_SIMLAB_HPP
