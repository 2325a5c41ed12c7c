#include "flr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "flr/errors.hpp"

namespace flr {

namespace {

constexpr double kIllConditionedRatio = 1e-12;  // guard for dividing by theta_hat_j

void check_dataset(const Dataset& data) {
  if (data.size() < 2)
    throw std::invalid_argument("Dataset: need n >= 2 observations");
  if (static_cast<int>(data.X.size()) != data.size())
    throw std::invalid_argument("Dataset: X and Y lengths differ");
  if (!data.Y.allFinite())
    throw std::invalid_argument("Dataset: responses must be finite");
  for (std::size_t i = 1; i < data.X.size(); ++i)
    if (!same_grid(data.X[i].grid(), data.X[0].grid()))
      throw std::invalid_argument("Dataset: curves on mismatched grids");
}

}  // namespace

std::vector<std::string> RegimeParams::validate() const {
  if (!(alpha > 1.0))
    throw std::invalid_argument("RegimeParams: alpha must exceed 1");
  if (!(beta > 1.0))
    throw std::invalid_argument("RegimeParams: beta must exceed 1");
  if (!(gamma > 0.5))
    throw std::invalid_argument("RegimeParams: gamma must exceed 1/2");
  for (double c : {C, C1, C2, C4, C5})
    if (!(c > 0.0))
      throw std::invalid_argument("RegimeParams: constants C, C1, C2, C4, C5 must be positive");
  if (!(C3 >= 0.0) || !std::isfinite(C3))
    throw std::invalid_argument("RegimeParams: C3 must be finite and >= 0");

  std::vector<std::string> warnings;
  if (beta < alpha + 2.0)
    warnings.push_back("beta < alpha + 2: outside the range the upper-bound "
                       "rate theory assumes; proceeding anyway");
  return warnings;
}

CutoffRule CutoffRule::threshold(double t) {
  if (!(t > 0.0)) throw std::invalid_argument("CutoffRule: threshold must be positive");
  return CutoffRule(Threshold{t});
}

CutoffRule CutoffRule::threshold_scaled(double C, double c) {
  if (!(C > 0.0)) throw std::invalid_argument("CutoffRule: C must be positive");
  if (!(c > 0.0 && c <= 0.5))
    throw std::invalid_argument("CutoffRule: need 0 < c <= 1/2");
  return CutoffRule(ThresholdScaled{C, c});
}

CutoffRule CutoffRule::deterministic(double alpha, double beta, double gamma) {
  return CutoffRule(Deterministic{alpha, beta, gamma});
}

CutoffRule CutoffRule::fixed(int m) {
  if (m < 0) throw std::invalid_argument("CutoffRule: fixed m must be >= 0");
  return CutoffRule(Fixed{m});
}

std::string CutoffRule::describe() const {
  std::ostringstream out;
  if (const auto* v = std::get_if<Threshold>(&variant_))
    out << "threshold t=" << v->t;
  else if (const auto* v = std::get_if<ThresholdScaled>(&variant_))
    out << "threshold t=" << v->C << "*n^-" << v->c;
  else if (std::get_if<Deterministic>(&variant_))
    out << "deterministic m0(n)";
  else
    out << "fixed m=" << std::get<Fixed>(variant_).m;
  return out.str();
}

GridFunction estimate_g(const Dataset& data) {
  check_dataset(data);
  const int n = data.size();
  const double y_mean = data.Y.mean();
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(data.X[0].size());
  Eigen::VectorXd x_mean = Eigen::VectorXd::Zero(data.X[0].size());
  for (const auto& xi : data.X) x_mean += xi.values();
  x_mean /= n;
  for (int i = 0; i < n; ++i)
    acc += (data.X[static_cast<std::size_t>(i)].values() - x_mean) *
           (data.Y[i] - y_mean);
  return GridFunction(data.X[0].grid_ptr(), acc / n);
}

int deterministic_cutoff(double alpha, double beta, double gamma, int n) {
  if (n < 2) throw std::invalid_argument("deterministic_cutoff: n must be >= 2");
  double value;
  if (alpha + 1.0 < 2.0 * gamma)
    value = std::pow(n, 1.0 / (2.0 * (beta + gamma - 1.0)));
  else if (alpha + 1.0 == 2.0 * gamma)
    value = std::pow(n / std::log(static_cast<double>(n)),
                     1.0 / (alpha + 2.0 * beta - 1.0));
  else
    value = std::pow(n, 1.0 / (alpha + 2.0 * beta - 1.0));
  return std::max(1, static_cast<int>(std::floor(value + 0.5)));
}

int cutoff(const EigenSystem& sys, const CutoffRule& rule, int n) {
  const auto count_at_least = [&sys](double t) {
    int m = 0;
    while (m < sys.count() && sys.eigenvalues()[m] >= t) ++m;
    return m;  // valid count because the sequence is nonincreasing
  };

  if (const auto* v = std::get_if<CutoffRule::Threshold>(&rule.variant()))
    return count_at_least(v->t);
  if (const auto* v = std::get_if<CutoffRule::ThresholdScaled>(&rule.variant()))
    return count_at_least(v->C * std::pow(n, -v->c));
  if (const auto* v = std::get_if<CutoffRule::Deterministic>(&rule.variant()))
    return std::min(deterministic_cutoff(v->alpha, v->beta, v->gamma, n), sys.count());
  return std::min(std::get<CutoffRule::Fixed>(rule.variant()).m, sys.count());
}

FitInputs prepare_fit(const Dataset& data, int max_components) {
  check_dataset(data);
  const int n = data.size();
  const int P = data.X[0].grid().point_count;
  if (max_components < 1) max_components = std::min(n, P);

  const CovOperator cov = empirical_covariance(data.X);
  EigenSystem sys = eigendecompose(cov, max_components);
  GridFunction g_hat = estimate_g(data);
  Eigen::VectorXd g_scores = sys.scores(g_hat);

  Eigen::VectorXd x_mean = Eigen::VectorXd::Zero(P);
  for (const auto& xi : data.X) x_mean += xi.values();
  x_mean /= n;

  return FitInputs{std::move(sys), std::move(g_hat), std::move(g_scores),
                   GridFunction(data.X[0].grid_ptr(), std::move(x_mean)),
                   data.Y.mean(), n};
}

SlopeFit fit_from_inputs(const FitInputs& inputs, const CutoffRule& rule,
                         const RegimeParams& regime) {
  const EigenSystem& sys = inputs.system;
  const int m = cutoff(sys, rule, inputs.n);

  const double theta_1 = sys.count() > 0 ? sys.eigenvalue(1) : 0.0;
  const double theta_floor = kIllConditionedRatio * theta_1;
  Eigen::VectorXd b_coeffs(m);
  for (int j = 1; j <= m; ++j) {
    const double theta_j = sys.eigenvalue(j);
    if (!(theta_j > theta_floor) || theta_j <= 0.0)
      throw IllConditionedComponent(
          "fit: eigenvalue " + std::to_string(j) +
              " is numerically zero; lower the cut-off",
          j);
    b_coeffs[j - 1] = inputs.g_scores[j - 1] / theta_j;
  }

  Eigen::VectorXd b_values = Eigen::VectorXd::Zero(sys.grid().point_count);
  if (m > 0) b_values = sys.functions().leftCols(m) * b_coeffs;
  GridFunction b_hat(sys.grid_ptr(), std::move(b_values));

  const double slope_norm = quad_norm(b_hat);
  const bool truncated = slope_norm > regime.C4 * std::pow(inputs.n, regime.C5);
  GridFunction b_tilde =
      truncated ? GridFunction(sys.grid_ptr(),
                               Eigen::VectorXd::Constant(sys.grid().point_count,
                                                         regime.C3))
                : b_hat;

  const double intercept = inputs.y_mean - inner_product(b_hat, inputs.x_mean);

  return SlopeFit{sys,   m,        std::move(b_coeffs), intercept,
                  std::move(b_hat), std::move(b_tilde), slope_norm, truncated};
}

SlopeFit fit(const Dataset& data, const CutoffRule& rule, const RegimeParams& regime) {
  return fit_from_inputs(prepare_fit(data), rule, regime);
}

double slope_functional(const SlopeFit& fit, const GridFunction& x) {
  if (!same_grid(x.grid(), fit.b_hat.grid()))
    throw std::invalid_argument("slope_functional: grid mismatch");
  if (fit.truncated) return inner_product(fit.b_tilde, x);
  if (fit.m == 0) return 0.0;
  const Eigen::VectorXd x_scores =
      fit.eigensystem.functions().leftCols(fit.m).transpose() *
      x.grid().weights.cwiseProduct(x.values());
  return fit.b_coeffs.dot(x_scores);
}

double predict(const SlopeFit& fit, const GridFunction& x) {
  return fit.intercept + slope_functional(fit, x);
}

double rate_tau(const RegimeParams& regime, int n) {
  if (n < 2) throw std::invalid_argument("rate_tau: n must be >= 2");
  const double nn = static_cast<double>(n);
  if (regime.alpha + 1.0 < 2.0 * regime.gamma) return 1.0 / nn;
  if (regime.alpha + 1.0 == 2.0 * regime.gamma) return std::log(nn) / nn;
  return std::pow(nn, -2.0 * (regime.beta + regime.gamma - 1.0) /
                          (regime.alpha + 2.0 * regime.beta - 1.0));
}

std::string regime_label(const RegimeParams& regime) {
  if (regime.alpha + 1.0 < 2.0 * regime.gamma) return "alpha+1 < 2*gamma";
  if (regime.alpha + 1.0 == 2.0 * regime.gamma) return "alpha+1 = 2*gamma";
  return "alpha+1 > 2*gamma";
}

}  // namespace flr
