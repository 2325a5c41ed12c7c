#ifndef FLR_FPCA_HPP
#define FLR_FPCA_HPP

#include <Eigen/Dense>
#include <vector>

#include "flr/grid.hpp"

namespace flr {

/// Covariance operator as a kernel sampled on grid x grid.
struct CovOperator {
  GridPtr grid;
  Eigen::MatrixXd kernel;  // symmetric, entry (p,q) = K(t_p, t_q)
};

/// Eigenpairs of a covariance operator under the quadrature inner product.
/// Eigenvalues are nonincreasing and >= 0; eigenfunction columns are
/// quadrature-orthonormal.
class EigenSystem {
 public:
  EigenSystem(GridPtr grid, Eigen::VectorXd eigenvalues, Eigen::MatrixXd functions);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  int count() const { return static_cast<int>(eigenvalues_.size()); }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  double eigenvalue(int j) const { return eigenvalues_[j - 1]; }  // 1-based
  const Eigen::MatrixXd& functions() const { return functions_; }
  GridFunction eigenfunction(int j) const {  // 1-based
    return GridFunction(grid_, functions_.col(j - 1));
  }

  /// Quadrature inner products <f, phi_j> for j = 1..count().
  Eigen::VectorXd scores(const GridFunction& f) const;

  /// Flips the sign of eigenfunction j (1-based); eigenvalues untouched.
  void flip_sign(int j) { functions_.col(j - 1) *= -1.0; }

 private:
  GridPtr grid_;
  Eigen::VectorXd eigenvalues_;
  Eigen::MatrixXd functions_;  // point_count x count()
};

/// Perturbation diagnostics between an empirical and a reference system.
struct PerturbationReport {
  double delta_norm;           // Hilbert-Schmidt norm of Khat - K
  double eigenvalue_gaps;      // max_{j<=J} |theta_hat_j - theta_j|
  std::vector<double> aligned_eigenfunction_errors;  // delta_j * ||phihat_j - phi_j||
};

/// Khat(u,v) = (1/n) sum_i {X_i(u) - Xbar(u)}{X_i(v) - Xbar(v)}; divisor n.
CovOperator empirical_covariance(const std::vector<GridFunction>& samples);

/// K(u,v) = sum_{j<=J} theta_j phi_j(u) phi_j(v) in the cosine basis,
/// J = theta.size(). Throws on negative theta_j.
CovOperator population_covariance(const Eigen::VectorXd& theta, const GridPtr& grid);

/// Solves the quadrature-weighted eigenproblem: eigenpairs of
/// W^{1/2} K W^{1/2}, eigenfunctions mapped back by W^{-1/2} so they are
/// quadrature-orthonormal. Negative eigenvalues are clipped at 0; at most
/// max_components pairs are returned, sorted descending.
EigenSystem eigendecompose(const CovOperator& op, int max_components);

/// Flips eigenfunction signs so that <phihat_j, reference_j> >= 0.
/// A zero inner product leaves the sign unchanged.
EigenSystem sign_align(EigenSystem sys, const std::vector<GridFunction>& reference);

/// Perturbation report for j = 1..J_check. `truth` must carry at least
/// J_check + 1 eigenvalues (the gap sequence delta_j looks one ahead);
/// eigenfunction errors are computed after sign alignment against truth.
PerturbationReport perturbation_report(const CovOperator& empirical,
                                       const CovOperator& reference,
                                       const EigenSystem& sys_hat,
                                       const EigenSystem& truth, int J_check);

}  // namespace flr

#endif  // FLR_FPCA_HPP
