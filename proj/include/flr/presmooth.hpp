#ifndef FLR_PRESMOOTH_HPP
#define FLR_PRESMOOTH_HPP

#include <Eigen/Dense>

#include "flr/grid.hpp"

namespace flr {

/// A curve observed discretely with additive noise on its own grid.
struct NoisyCurve {
  GridPtr grid;
  Eigen::VectorXd values;
};

/// Orthogonal-series smoother: projects the noisy values onto
/// {psi_0, phi_1, ..., phi_J} by quadrature on the observation grid, then
/// synthesizes the truncated series on the target grid.
/// Requires 0 <= smoothing_order < observation count.
GridFunction series_smooth(const NoisyCurve& curve, int smoothing_order,
                           const GridPtr& target);

/// Default smoother order floor(k^(1/3)); requires k >= 8.
int default_smoothing_order(int observation_count);

}  // namespace flr

#endif  // FLR_PRESMOOTH_HPP
