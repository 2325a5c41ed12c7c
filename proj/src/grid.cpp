#include "flr/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flr {

GridPtr make_uniform_grid(int point_count) {
  if (point_count < 2)
    throw std::invalid_argument("make_uniform_grid: point_count must be >= 2, got " +
                                std::to_string(point_count));
  auto grid = std::make_shared<Grid>();
  grid->point_count = point_count;
  const int n_intervals = point_count - 1;
  grid->points = Eigen::VectorXd::LinSpaced(point_count, 0.0, 1.0);
  grid->weights = Eigen::VectorXd::Constant(point_count, 1.0 / n_intervals);
  grid->weights[0] *= 0.5;
  grid->weights[point_count - 1] *= 0.5;
  return grid;
}

GridFunction::GridFunction(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("GridFunction: null grid");
  if (values_.size() != grid_->point_count)
    throw std::invalid_argument("GridFunction: " + std::to_string(values_.size()) +
                                " values on a " + std::to_string(grid_->point_count) +
                                "-point grid");
  if (!values_.allFinite())
    throw std::invalid_argument("GridFunction: values must be finite");
}

double inner_product(const GridFunction& f, const GridFunction& g) {
  if (!same_grid(f.grid(), g.grid()))
    throw std::invalid_argument("inner_product: grid mismatch");
  return f.grid().weights.dot(f.values().cwiseProduct(g.values()));
}

double quad_norm(const GridFunction& f) {
  return std::sqrt(f.grid().weights.dot(f.values().cwiseAbs2()));
}

GridFunction cosine_basis(int j, const GridPtr& grid) {
  if (j < 0) throw std::invalid_argument("cosine_basis: j must be >= 0");
  if (j == 0) return GridFunction(grid, Eigen::VectorXd::Ones(grid->point_count));
  const double sqrt2 = std::sqrt(2.0);
  Eigen::VectorXd v = (j * M_PI * grid->points.array()).cos() * sqrt2;
  return GridFunction(grid, std::move(v));
}

Eigen::MatrixXd cosine_basis_matrix(const Grid& grid, int max_frequency) {
  Eigen::MatrixXd basis(grid.point_count, max_frequency);
  const double sqrt2 = std::sqrt(2.0);
  for (int j = 1; j <= max_frequency; ++j)
    basis.col(j - 1) = (j * M_PI * grid.points.array()).cos() * sqrt2;
  return basis;
}

GridFunction synthesize(const CoefVector& c, const GridPtr& grid) {
  if (c.coeffs.size() < 1) throw std::invalid_argument("synthesize: empty coefficients");
  const int max_j = static_cast<int>(c.coeffs.size());
  Eigen::VectorXd v = cosine_basis_matrix(*grid, max_j) * c.coeffs;
  if (c.constant) v.array() += *c.constant;
  return GridFunction(grid, std::move(v));
}

CoefVector project(const GridFunction& f, const std::vector<GridFunction>& basis) {
  CoefVector out;
  out.coeffs.resize(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t k = 0; k < basis.size(); ++k)
    out.coeffs[static_cast<Eigen::Index>(k)] = inner_product(f, basis[k]);
  return out;
}

}  // namespace flr
