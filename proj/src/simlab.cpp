#include "flr/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "flr/errors.hpp"
#include "flr/presmooth.hpp"

namespace flr {

namespace {

/// Runs fn(0..count-1) on up to `threads` workers. Each index writes only
/// its own output slot, so results never depend on the schedule.
template <typename F>
void parallel_for(int count, int threads, F&& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

Eigen::VectorXd power_law(int J, double scale, double exponent) {
  Eigen::VectorXd v(J);
  for (int j = 1; j <= J; ++j) v[j - 1] = scale * std::pow(j, -exponent);
  return v;
}

struct ArmAccumulator {
  explicit ArmAccumulator(int thresholds, int reps)
      : err2(reps, thresholds), mise(reps, thresholds) {}
  Eigen::MatrixXd err2;  // reps x thresholds
  Eigen::MatrixXd mise;

  McTable table(const std::vector<double>& ts) const {
    McTable out;
    const int reps = static_cast<int>(err2.rows());
    for (int c = 0; c < err2.cols(); ++c) {
      McRow row;
      row.threshold = ts[static_cast<std::size_t>(c)];
      row.ase = err2.col(c).mean();
      row.mc_se = reps > 1 ? std::sqrt((err2.col(c).array() - row.ase).square().sum() /
                                       (reps - 1) / reps)
                           : 0.0;
      row.mise = mise.col(c).mean();
      out.rows.push_back(row);
    }
    return out;
  }
};

/// Threshold sweep for one simulated dataset: one covariance/eigen pass,
/// then the coefficient-space estimator per threshold.
void sweep_thresholds(const Dataset& data, const std::vector<double>& thresholds,
                      const GridFunction& x_fun, const GridFunction& b_fun,
                      double functional_oracle, int rep, ArmAccumulator& acc) {
  static const RegimeParams truncation_defaults{};
  const FitInputs inputs = prepare_fit(data);
  const Eigen::VectorXd& w = b_fun.grid().weights;
  for (std::size_t ti = 0; ti < thresholds.size(); ++ti) {
    const SlopeFit f = fit_from_inputs(inputs, CutoffRule::threshold(thresholds[ti]),
                                       truncation_defaults);
    const double err = slope_functional(f, x_fun) - functional_oracle;
    acc.err2(rep, static_cast<int>(ti)) = err * err;
    acc.mise(rep, static_cast<int>(ti)) =
        w.dot((f.b_tilde.values() - b_fun.values()).cwiseAbs2());
  }
}

}  // namespace

GridFunction PopulationSpec::slope() const {
  return synthesize(CoefVector{b_coeffs, std::nullopt}, grid);
}

GridFunction PopulationSpec::predictand() const {
  return synthesize(CoefVector{x_coeffs, std::nullopt}, grid);
}

void PopulationSpec::check() const {
  if (!grid) throw std::invalid_argument("PopulationSpec: null grid");
  const auto J = theta.size();
  if (J < 1 || b_coeffs.size() != J || x_coeffs.size() != J)
    throw std::invalid_argument("PopulationSpec: coefficient lengths must match");
  if ((theta.array() < 0.0).any())
    throw std::invalid_argument("PopulationSpec: negative eigenvalue");
  // strictly decreasing while positive; a degenerate all-zero tail is fine
  for (Eigen::Index j = 0; j + 1 < J; ++j)
    if (theta[j + 1] > 0.0 && !(theta[j] > theta[j + 1]))
      throw std::invalid_argument("PopulationSpec: eigenvalues must decrease strictly");
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd))
    throw std::invalid_argument("PopulationSpec: noise_sd must be finite and >= 0");
}

PopulationSpec PopulationSpec::study1(GridPtr grid, int J) {
  PopulationSpec spec;
  spec.grid = std::move(grid);
  spec.theta = power_law(J, 4.0, 2.0);
  spec.b_coeffs = power_law(J, 1.0, 4.0);
  spec.x_coeffs = power_law(J, 1.0, 2.0);
  spec.intercept = 0.0;
  spec.noise_sd = 2.0;
  spec.check();
  return spec;
}

PopulationSpec PopulationSpec::study2(GridPtr grid, int J) {
  PopulationSpec spec = study1(std::move(grid), J);
  spec.b_coeffs = power_law(J, 10.0, 2.0);
  spec.x_coeffs = power_law(J, 1.0, 1.6);
  spec.check();
  return spec;
}

PopulationSpec PopulationSpec::from_regime(const RegimeParams& regime, GridPtr grid,
                                           double noise_sd, int J) {
  regime.validate();
  PopulationSpec spec;
  spec.grid = std::move(grid);
  spec.theta = power_law(J, regime.C, regime.alpha);
  spec.b_coeffs = power_law(J, regime.C1, regime.beta);
  spec.x_coeffs = power_law(J, regime.C2, regime.gamma);
  spec.intercept = 0.0;
  spec.noise_sd = noise_sd;
  spec.check();
  return spec;
}

Eigen::VectorXd sample_scores(const PopulationSpec& spec, RngStream& stream) {
  const int J = spec.truncation();
  Eigen::VectorXd z(J);
  for (int j = 0; j < J; ++j) z[j] = stream.normal(std::sqrt(spec.theta[j]));
  return z;
}

GridFunction sample_X(const PopulationSpec& spec, RngStream& stream) {
  return synthesize(CoefVector{sample_scores(spec, stream), std::nullopt}, spec.grid);
}

Dataset sample_dataset(const PopulationSpec& spec, int n, RngStream& x_stream,
                       RngStream& noise_stream) {
  if (n < 2) throw std::invalid_argument("sample_dataset: need n >= 2");
  const GridFunction b_fun = spec.slope();
  Dataset data;
  data.X.reserve(static_cast<std::size_t>(n));
  data.Y.resize(n);
  for (int i = 0; i < n; ++i) {
    data.X.push_back(sample_X(spec, x_stream));
    data.Y[i] = spec.intercept + inner_product(b_fun, data.X.back()) +
                noise_stream.normal(spec.noise_sd);
  }
  return data;
}

void McConfig::check() const {
  if (n < 2) throw std::invalid_argument("McConfig: n must be >= 2");
  if (reps < 1) throw std::invalid_argument("McConfig: reps must be >= 1");
  if (thresholds.empty()) throw std::invalid_argument("McConfig: no thresholds");
  for (double t : thresholds)
    if (!(t > 0.0)) throw std::invalid_argument("McConfig: thresholds must be positive");
  if (threads < 1) throw std::invalid_argument("McConfig: threads must be >= 1");
  if (!(observation_noise_sd >= 0.0))
    throw std::invalid_argument("McConfig: observation noise sd must be >= 0");
}

StudyResult run_study(const PopulationSpec& spec, const McConfig& cfg) {
  cfg.check();
  spec.check();
  if (cfg.noisy_arm && cfg.observation_count < 2)
    throw std::invalid_argument("run_study: noisy arm needs an observation grid");

  const int J = spec.truncation();
  const GridFunction b_fun = spec.slope();
  const GridFunction x_fun = spec.predictand();
  const double functional_oracle = inner_product(b_fun, x_fun);
  const Eigen::MatrixXd basis = cosine_basis_matrix(*spec.grid, J);

  GridPtr obs_grid;
  Eigen::MatrixXd obs_basis;  // k x J
  int smooth_order = 0;
  if (cfg.noisy_arm) {
    obs_grid = make_uniform_grid(cfg.observation_count);
    obs_basis = cosine_basis_matrix(*obs_grid, J);
    smooth_order = cfg.smoothing_order < 0 ? J : cfg.smoothing_order;
    if (smooth_order >= cfg.observation_count)
      throw std::invalid_argument("run_study: smoothing order must be below k");
  }

  ArmAccumulator cont(static_cast<int>(cfg.thresholds.size()), cfg.reps);
  ArmAccumulator noisy(static_cast<int>(cfg.thresholds.size()), cfg.reps);

  parallel_for(cfg.reps, cfg.threads, [&](int rep) {
    RngStream xs(cfg.seed, static_cast<std::uint64_t>(rep), StreamRole::predictor);
    RngStream es(cfg.seed, static_cast<std::uint64_t>(rep), StreamRole::regression_noise);

    Eigen::MatrixXd scores(cfg.n, J);
    Dataset data;
    data.X.reserve(static_cast<std::size_t>(cfg.n));
    data.Y.resize(cfg.n);
    for (int i = 0; i < cfg.n; ++i) {
      scores.row(i) = sample_scores(spec, xs).transpose();
      data.X.emplace_back(spec.grid, basis * scores.row(i).transpose());
      data.Y[i] = spec.intercept + inner_product(b_fun, data.X.back()) +
                  es.normal(spec.noise_sd);
    }
    sweep_thresholds(data, cfg.thresholds, x_fun, b_fun, functional_oracle, rep, cont);

    if (!cfg.noisy_arm) return;
    RngStream os(cfg.seed, static_cast<std::uint64_t>(rep), StreamRole::observation_noise);
    if (!cfg.share_draws) {
      // independent predictor paths for the noisy arm
      RngStream xs2(cfg.seed, static_cast<std::uint64_t>(rep) ^ 0x8000000000000000ULL,
                    StreamRole::predictor);
      RngStream es2(cfg.seed, static_cast<std::uint64_t>(rep) ^ 0x8000000000000000ULL,
                    StreamRole::regression_noise);
      for (int i = 0; i < cfg.n; ++i) {
        scores.row(i) = sample_scores(spec, xs2).transpose();
        const GridFunction xi(spec.grid, basis * scores.row(i).transpose());
        data.Y[i] = spec.intercept + inner_product(b_fun, xi) + es2.normal(spec.noise_sd);
      }
    }
    Dataset noisy_data;
    noisy_data.X.reserve(static_cast<std::size_t>(cfg.n));
    noisy_data.Y = data.Y;
    for (int i = 0; i < cfg.n; ++i) {
      Eigen::VectorXd observed = obs_basis * scores.row(i).transpose();
      for (int p = 0; p < cfg.observation_count; ++p)
        observed[p] += os.normal(cfg.observation_noise_sd);
      noisy_data.X.push_back(
          series_smooth(NoisyCurve{obs_grid, std::move(observed)}, smooth_order,
                        spec.grid));
    }
    sweep_thresholds(noisy_data, cfg.thresholds, x_fun, b_fun, functional_oracle,
                     rep, noisy);
  });

  StudyResult result;
  result.oracle = spec.intercept + functional_oracle;
  result.continuous = cont.table(cfg.thresholds);
  if (cfg.noisy_arm) result.noisy = noisy.table(cfg.thresholds);
  return result;
}

StudyResult run_study1(const McConfig& cfg) {
  McConfig c = cfg;
  if (c.observation_count == 0) c.observation_count = 200;
  return run_study(PopulationSpec::study1(make_uniform_grid(201)), c);
}

StudyResult run_study2(const McConfig& cfg) {
  McConfig c = cfg;
  if (c.observation_count == 0) c.observation_count = 500;
  return run_study(PopulationSpec::study2(make_uniform_grid(201)), c);
}

RateResult run_rate_experiment(const RegimeParams& regime,
                               const std::vector<int>& n_list, int reps,
                               const CutoffRule& rule, std::uint64_t seed,
                               double noise_sd, int threads) {
  if (n_list.size() < 3)
    throw std::invalid_argument("run_rate_experiment: need at least 3 sample sizes");
  if (reps < 1) throw std::invalid_argument("run_rate_experiment: reps must be >= 1");
  regime.validate();

  const GridPtr grid = make_uniform_grid(201);
  const PopulationSpec spec = PopulationSpec::from_regime(regime, grid, noise_sd);
  const int J = spec.truncation();
  const GridFunction b_fun = spec.slope();
  const GridFunction x_fun = spec.predictand();
  const double functional_oracle = inner_product(b_fun, x_fun);
  const Eigen::MatrixXd basis = cosine_basis_matrix(*grid, J);

  RateResult result;
  for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
    const int n = n_list[ni];
    if (n < 2) throw std::invalid_argument("run_rate_experiment: n must be >= 2");
    Eigen::VectorXd err2(reps);
    std::atomic<int> first_m{-1};
    parallel_for(reps, threads, [&](int rep) {
      const std::uint64_t key =
          static_cast<std::uint64_t>(ni) * static_cast<std::uint64_t>(reps) +
          static_cast<std::uint64_t>(rep);
      RngStream xs(seed, key, StreamRole::predictor);
      RngStream es(seed, key, StreamRole::regression_noise);
      Dataset data;
      data.X.reserve(static_cast<std::size_t>(n));
      data.Y.resize(n);
      for (int i = 0; i < n; ++i) {
        data.X.emplace_back(grid, basis * sample_scores(spec, xs));
        data.Y[i] = spec.intercept + inner_product(b_fun, data.X.back()) +
                    es.normal(spec.noise_sd);
      }
      const SlopeFit f = fit_from_inputs(prepare_fit(data), rule, regime);
      if (rep == 0) first_m = f.m;
      const double err = slope_functional(f, x_fun) - functional_oracle;
      err2[rep] = err * err;
    });
    RatePoint point;
    point.n = n;
    point.m0 = first_m.load();
    point.mse = err2.mean();
    point.mc_se = reps > 1 ? std::sqrt((err2.array() - point.mse).square().sum() /
                                       (reps - 1) / reps)
                           : 0.0;
    result.points.push_back(point);
  }

  // least-squares slope of log MSE on log n
  const auto count = static_cast<double>(result.points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& p : result.points) {
    const double lx = std::log(static_cast<double>(p.n));
    const double ly = std::log(p.mse);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  result.fitted_exponent = (count * sxy - sx * sy) / (count * sxx - sx * sx);

  if (regime.alpha + 1.0 > 2.0 * regime.gamma)
    result.theoretical_exponent = -2.0 * (regime.beta + regime.gamma - 1.0) /
                                  (regime.alpha + 2.0 * regime.beta - 1.0);
  else
    result.theoretical_exponent = -1.0;  // boundary case carries the log factor
  result.regime = regime_label(regime);
  return result;
}

LowerBoundReport lower_bound_construct(const RegimeParams& regime, long long n,
                                       double sigma) {
  if (n < 2) throw std::invalid_argument("lower_bound_construct: n must be >= 2");
  if (!(sigma > 0.0)) throw std::invalid_argument("lower_bound_construct: sigma must be positive");
  regime.validate();

  const double exponent = regime.alpha + 2.0 * regime.beta - 1.0;
  // largest integer nu with nu^exponent <= n; pow alone can land one off
  int nu = std::max(1, static_cast<int>(std::pow(static_cast<double>(n), 1.0 / exponent)) - 1);
  while (std::pow(static_cast<double>(nu + 1), exponent) <=
         static_cast<double>(n) * (1.0 + 1e-12))
    ++nu;

  double T_B1 = 0.0, V_n = 0.0;
  for (int j = nu + 1; j <= 2 * nu; ++j) {
    T_B1 += std::pow(j, -(regime.beta + regime.gamma));
    V_n += std::pow(j, -(regime.alpha + 2.0 * regime.beta));
  }
  if (2.0 * V_n >= sigma * sigma)
    throw DivergentDistance("lower_bound_construct: 2 V_n >= sigma^2 at n = " +
                            std::to_string(n) + "; increase n");

  LowerBoundReport report;
  report.n = n;
  report.nu = nu;
  report.T_B0 = 0.0;
  report.T_B1 = T_B1;
  report.V_n = V_n;
  report.n_V_n = static_cast<double>(n) * V_n;
  report.chi_sq_mean =
      std::pow(1.0 - 2.0 * V_n / (sigma * sigma), -static_cast<double>(n) / 2.0);
  report.scaling_check =
      T_B1 * std::pow(static_cast<double>(n),
                      (regime.beta + regime.gamma - 1.0) / exponent);
  return report;
}

double relative_spread(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("relative_spread: no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (!(*lo + *hi > 0.0))
    throw std::invalid_argument("relative_spread: values must be positive");
  return (*hi - *lo) / (*hi + *lo);
}

}  // namespace flr
