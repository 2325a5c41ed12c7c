#ifndef FLR_GRID_HPP
#define FLR_GRID_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <vector>

namespace flr {

/// Uniform grid on [0, 1] with trapezoid quadrature weights.
/// Fully determined by its point count: t_p = p / (P - 1),
/// w_p = 1/(P-1) in the interior and 1/(2(P-1)) at the endpoints.
struct Grid {
  int point_count;
  Eigen::VectorXd points;
  Eigen::VectorXd weights;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the uniform trapezoid grid; throws std::invalid_argument if P < 2.
GridPtr make_uniform_grid(int point_count);

/// Two grids are interchangeable iff they have the same point count
/// (uniform grids on [0,1] carry no other state).
inline bool same_grid(const Grid& a, const Grid& b) {
  return a.point_count == b.point_count;
}

/// A real function on [0, 1] sampled on a uniform grid.
class GridFunction {
 public:
  GridFunction(GridPtr grid, Eigen::VectorXd values);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  int size() const { return static_cast<int>(values_.size()); }
  double operator()(int p) const { return values_[p]; }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
};

/// Coefficients against the orthonormal cosine system:
/// coeffs[j-1] multiplies phi_j(t) = sqrt(2) cos(j pi t), j = 1..J;
/// `constant`, when present, multiplies psi_0 = 1.
/// (project() reuses the type for coefficients against any supplied basis.)
struct CoefVector {
  Eigen::VectorXd coeffs;
  std::optional<double> constant;
};

/// Trapezoid-quadrature inner product; both functions must share a grid.
double inner_product(const GridFunction& f, const GridFunction& g);

/// Quadrature norm sqrt(<f, f>).
double quad_norm(const GridFunction& f);

/// phi_j(t) = sqrt(2) cos(j pi t) for j >= 1; psi_0 = 1 for j = 0.
GridFunction cosine_basis(int j, const GridPtr& grid);

/// Basis matrix with columns phi_1 .. phi_J evaluated on the grid.
Eigen::MatrixXd cosine_basis_matrix(const Grid& grid, int max_frequency);

/// Pointwise sum c0 psi_0 + sum_j coeffs[j-1] phi_j on the grid.
GridFunction synthesize(const CoefVector& c, const GridPtr& grid);

/// Quadrature projection: coefficient k equals <f, basis[k]>.
CoefVector project(const GridFunction& f, const std::vector<GridFunction>& basis);

}  // namespace flr

#endif  // FLR_GRID_HPP
