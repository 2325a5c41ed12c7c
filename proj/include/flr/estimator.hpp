#ifndef FLR_ESTIMATOR_HPP
#define FLR_ESTIMATOR_HPP

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "flr/fpca.hpp"
#include "flr/grid.hpp"

namespace flr {

/// Scalar-on-function regression data: n curves X_i and n responses Y_i.
struct Dataset {
  std::vector<GridFunction> X;
  Eigen::VectorXd Y;

  int size() const { return static_cast<int>(Y.size()); }
};

/// Smoothness/regularity parameters (alpha, beta, gamma) plus the constants
/// appearing in the eigenvalue envelope, the coefficient envelopes and the
/// norm-truncation rule.
struct RegimeParams {
  double alpha = 2.0;  // eigenvalue decay, theta_j ~ C j^-alpha
  double beta = 4.0;   // slope coefficient decay |b_j| <= C1 j^-beta
  double gamma = 2.0;  // predictand coefficient decay |x_j| <= C2 j^-gamma
  double C = 1.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double C3 = 0.0;  // fallback constant slope when the norm truncation fires
  double C4 = 1.0;  // truncation scale: keep b_hat iff ||b_hat|| <= C4 n^C5
  double C5 = 2.0;

  /// Hard-rejects parameters outside the admissible ranges
  /// (alpha > 1, beta > 1, gamma > 1/2, constants positive except C3 >= 0).
  /// Returns warnings for values admissible here but outside the ranges the
  /// rate theory assumes (beta < alpha + 2); exploratory runs proceed.
  std::vector<std::string> validate() const;
};

/// Frequency cut-off selection rule.
class CutoffRule {
 public:
  struct Threshold {
    double t;
  };
  struct ThresholdScaled {  // t = C n^-c with 0 < c <= 1/2
    double C;
    double c;
  };
  struct Deterministic {  // m0(n) from (alpha, beta, gamma)
    double alpha;
    double beta;
    double gamma;
  };
  struct Fixed {
    int m;
  };

  static CutoffRule threshold(double t);
  static CutoffRule threshold_scaled(double C, double c);
  static CutoffRule deterministic(double alpha, double beta, double gamma);
  static CutoffRule fixed(int m);

  using Variant = std::variant<Threshold, ThresholdScaled, Deterministic, Fixed>;
  const Variant& variant() const { return variant_; }
  std::string describe() const;

 private:
  explicit CutoffRule(Variant v) : variant_(std::move(v)) {}
  Variant variant_;
};

/// A fitted slope: cut-off, eigen-coefficients, intercept, the assembled
/// b_hat and its norm-truncated companion b_tilde.
struct SlopeFit {
  EigenSystem eigensystem;
  int m;                     // cut-off actually used
  Eigen::VectorXd b_coeffs;  // m entries; coefficient j of phi_hat_j
  double intercept;          // a_hat = Ybar - <b_hat, Xbar>
  GridFunction b_hat;
  GridFunction b_tilde;      // b_hat, or the constant C3 when truncation fired
  double slope_norm;         // quadrature norm of b_hat
  bool truncated;
};

/// Dataset-level quantities reusable across cut-off rules.
struct FitInputs {
  EigenSystem system;
  GridFunction g_hat;
  Eigen::VectorXd g_scores;  // <g_hat, phi_hat_j>, all components
  GridFunction x_mean;
  double y_mean;
  int n;
};

/// ghat(t) = (1/n) sum_i {X_i(t) - Xbar(t)} (Y_i - Ybar); requires n >= 2.
GridFunction estimate_g(const Dataset& data);

/// Number of leading components retained by `rule` given the empirical
/// spectrum and the sample size. m = 0 is legal (intercept-only prediction).
int cutoff(const EigenSystem& sys, const CutoffRule& rule, int n);

/// Deterministic cut-off m0(n): round-half-up of
///   n^{1/(2(beta+gamma-1))}          if alpha + 1 < 2 gamma,
///   (n/log n)^{1/(alpha+2beta-1)}    if alpha + 1 = 2 gamma,
///   n^{1/(alpha+2beta-1)}            if alpha + 1 > 2 gamma,
/// floored at 1.
int deterministic_cutoff(double alpha, double beta, double gamma, int n);

/// Covariance, eigendecomposition and g_hat for one dataset.
/// max_components < 1 selects min(n, P).
FitInputs prepare_fit(const Dataset& data, int max_components = -1);

/// Completes a fit for one cut-off rule from precomputed inputs.
SlopeFit fit_from_inputs(const FitInputs& inputs, const CutoffRule& rule,
                         const RegimeParams& regime);

/// Full pipeline: empirical covariance -> eigendecomposition -> cut-off ->
/// b_hat_j = g_hat_j / theta_hat_j -> b_hat, b_tilde, a_hat.
SlopeFit fit(const Dataset& data, const CutoffRule& rule, const RegimeParams& regime);

/// <b_tilde, x>: coefficient form sum_j b_hat_j <x, phi_hat_j> when the
/// truncation did not fire, quadrature form otherwise.
double slope_functional(const SlopeFit& fit, const GridFunction& x);

/// p_hat(x) = a_hat + <b_tilde, x>.
double predict(const SlopeFit& fit, const GridFunction& x);

/// Mean-square rate tau(n): n^-1, n^-1 log n, or
/// n^{-2(beta+gamma-1)/(alpha+2beta-1)} by regime branch.
double rate_tau(const RegimeParams& regime, int n);

/// Which branch of the rate function fires, as a printable label.
std::string regime_label(const RegimeParams& regime);

}  // namespace flr

#endif  // FLR_ESTIMATOR_HPP
