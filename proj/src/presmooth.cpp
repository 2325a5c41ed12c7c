#include "flr/presmooth.hpp"

#include <stdexcept>
#include <string>

namespace flr {

GridFunction series_smooth(const NoisyCurve& curve, int smoothing_order,
                           const GridPtr& target) {
  if (!curve.grid) throw std::invalid_argument("series_smooth: null grid");
  const int k = curve.grid->point_count;
  if (smoothing_order < 0)
    throw std::invalid_argument("series_smooth: smoothing order must be >= 0");
  if (smoothing_order >= k)
    throw std::invalid_argument("series_smooth: smoothing order " +
                                std::to_string(smoothing_order) +
                                " must be below the observation count " +
                                std::to_string(k));
  if (curve.values.size() != k)
    throw std::invalid_argument("series_smooth: values do not match the grid");

  const Eigen::VectorXd weighted = curve.grid->weights.cwiseProduct(curve.values);
  CoefVector coef;
  coef.constant = weighted.sum();  // <y, psi_0>
  if (smoothing_order == 0) {
    coef.coeffs = Eigen::VectorXd::Zero(1);  // constant fit only
    return synthesize(coef, target);
  }
  coef.coeffs =
      cosine_basis_matrix(*curve.grid, smoothing_order).transpose() * weighted;
  return synthesize(coef, target);
}

int default_smoothing_order(int observation_count) {
  if (observation_count < 8)
    throw std::invalid_argument("default_smoothing_order: need k >= 8");
  int order = 1;
  // largest integer with order^3 <= k; avoids cbrt roundoff at perfect cubes
  while (static_cast<long long>(order + 1) * (order + 1) * (order + 1) <=
         observation_count)
    ++order;
  return order;
}

}  // namespace flr
