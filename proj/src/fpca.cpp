#include "flr/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "flr/errors.hpp"
#include "flr/log.hpp"

namespace flr {

EigenSystem::EigenSystem(GridPtr grid, Eigen::VectorXd eigenvalues,
                         Eigen::MatrixXd functions)
    : grid_(std::move(grid)),
      eigenvalues_(std::move(eigenvalues)),
      functions_(std::move(functions)) {
  if (functions_.rows() != grid_->point_count ||
      functions_.cols() != eigenvalues_.size())
    throw std::invalid_argument("EigenSystem: inconsistent dimensions");
}

Eigen::VectorXd EigenSystem::scores(const GridFunction& f) const {
  if (!same_grid(f.grid(), *grid_))
    throw std::invalid_argument("EigenSystem::scores: grid mismatch");
  return functions_.transpose() * grid_->weights.cwiseProduct(f.values());
}

CovOperator empirical_covariance(const std::vector<GridFunction>& samples) {
  if (samples.empty())
    throw std::invalid_argument("empirical_covariance: no samples");
  const Grid& grid = samples.front().grid();
  const int P = grid.point_count;
  const int n = static_cast<int>(samples.size());

  Eigen::MatrixXd data(P, n);
  for (int i = 0; i < n; ++i) {
    if (!same_grid(samples[static_cast<std::size_t>(i)].grid(), grid))
      throw std::invalid_argument("empirical_covariance: grid mismatch at sample " +
                                  std::to_string(i));
    data.col(i) = samples[static_cast<std::size_t>(i)].values();
  }
  const Eigen::VectorXd mean = data.rowwise().mean();
  data.colwise() -= mean;

  CovOperator op;
  op.grid = samples.front().grid_ptr();
  op.kernel = Eigen::MatrixXd::Zero(P, P);
  op.kernel.selfadjointView<Eigen::Lower>().rankUpdate(data, 1.0 / n);
  op.kernel = op.kernel.selfadjointView<Eigen::Lower>();
  return op;
}

CovOperator population_covariance(const Eigen::VectorXd& theta, const GridPtr& grid) {
  if ((theta.array() < 0.0).any())
    throw std::invalid_argument("population_covariance: negative eigenvalue");
  const int J = static_cast<int>(theta.size());
  CovOperator op;
  op.grid = grid;
  if (J == 0) {
    op.kernel = Eigen::MatrixXd::Zero(grid->point_count, grid->point_count);
    return op;
  }
  const Eigen::MatrixXd basis = cosine_basis_matrix(*grid, J);
  op.kernel = basis * theta.asDiagonal() * basis.transpose();
  op.kernel = 0.5 * (op.kernel + op.kernel.transpose().eval());
  return op;
}

EigenSystem eigendecompose(const CovOperator& op, int max_components) {
  const int P = op.grid->point_count;
  if (op.kernel.rows() != P || op.kernel.cols() != P)
    throw std::invalid_argument("eigendecompose: kernel does not match grid");
  if (max_components < 1)
    throw std::invalid_argument("eigendecompose: max_components must be >= 1");

  const Eigen::VectorXd sqrt_w = op.grid->weights.cwiseSqrt();
  Eigen::MatrixXd weighted =
      sqrt_w.asDiagonal() * op.kernel * sqrt_w.asDiagonal();
  weighted = 0.5 * (weighted + weighted.transpose().eval());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weighted);
  if (solver.info() != Eigen::Success) {
    const double residual =
        (weighted * solver.eigenvectors() -
         solver.eigenvectors() * solver.eigenvalues().asDiagonal())
            .norm();
    throw NumericFailure("eigendecompose: eigen iteration failed", residual);
  }

  const int r = std::min(max_components, P);
  Eigen::VectorXd values(r);
  Eigen::MatrixXd functions(P, r);
  const Eigen::VectorXd inv_sqrt_w = sqrt_w.cwiseInverse();
  for (int j = 0; j < r; ++j) {
    values[j] = std::max(solver.eigenvalues()[P - 1 - j], 0.0);  // descending, clipped
    functions.col(j) = inv_sqrt_w.cwiseProduct(solver.eigenvectors().col(P - 1 - j));
  }

  // The estimators assume distinct eigenvalues; flag near-ties among the
  // meaningfully positive part of the spectrum (the clipped zero tail of a
  // rank-deficient kernel is not a tie worth reporting).
  const double tie_tol = 1e-10 * (r > 0 ? values[0] : 0.0);
  for (int j = 0; j + 1 < r; ++j) {
    if (values[j + 1] > tie_tol && values[j] - values[j + 1] < tie_tol) {
      log::warn("eigendecompose: near-tied eigenvalues at positions " +
                std::to_string(j + 1) + "," + std::to_string(j + 2));
      break;
    }
  }
  return EigenSystem(op.grid, std::move(values), std::move(functions));
}

EigenSystem sign_align(EigenSystem sys, const std::vector<GridFunction>& reference) {
  const int r = std::min<int>(sys.count(), static_cast<int>(reference.size()));
  for (int j = 1; j <= r; ++j) {
    if (inner_product(sys.eigenfunction(j), reference[static_cast<std::size_t>(j - 1)]) < 0.0)
      sys.flip_sign(j);
  }
  return sys;
}

PerturbationReport perturbation_report(const CovOperator& empirical,
                                       const CovOperator& reference,
                                       const EigenSystem& sys_hat,
                                       const EigenSystem& truth, int J_check) {
  if (!same_grid(*empirical.grid, *reference.grid))
    throw std::invalid_argument("perturbation_report: grid mismatch");
  if (J_check < 1 || J_check > sys_hat.count() || J_check + 1 > truth.count())
    throw std::invalid_argument("perturbation_report: J_check exceeds available components");

  const Eigen::VectorXd& w = empirical.grid->weights;
  const Eigen::MatrixXd delta = empirical.kernel - reference.kernel;
  // ||Delta||^2 = sum_{p,q} w_p w_q Delta_pq^2, the discrete Hilbert-Schmidt norm
  const double delta_norm =
      std::sqrt((w.asDiagonal() * delta.cwiseAbs2() * w.asDiagonal()).sum());

  PerturbationReport report;
  report.delta_norm = delta_norm;

  double max_gap = 0.0;
  for (int j = 1; j <= J_check; ++j)
    max_gap = std::max(max_gap,
                       std::abs(sys_hat.eigenvalue(j) - truth.eigenvalue(j)));
  report.eigenvalue_gaps = max_gap;

  std::vector<GridFunction> ref_functions;
  ref_functions.reserve(static_cast<std::size_t>(J_check));
  for (int j = 1; j <= J_check; ++j) ref_functions.push_back(truth.eigenfunction(j));
  const EigenSystem aligned = sign_align(sys_hat, ref_functions);

  report.aligned_eigenfunction_errors.reserve(static_cast<std::size_t>(J_check));
  double min_spacing = std::numeric_limits<double>::infinity();
  for (int j = 1; j <= J_check; ++j) {
    min_spacing = std::min(min_spacing, truth.eigenvalue(j) - truth.eigenvalue(j + 1));
    const Eigen::VectorXd diff =
        aligned.functions().col(j - 1) - truth.functions().col(j - 1);
    const double err = std::sqrt(w.dot(diff.cwiseAbs2()));
    report.aligned_eigenfunction_errors.push_back(min_spacing * err);
  }
  return report;
}

}  // namespace flr
