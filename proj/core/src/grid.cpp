#include "typesize/grid.hpp"

#include <cmath>
#include <sstream>

#include "typesize/errors.hpp"

namespace typesize {

namespace {
constexpr double kTieTolerance = 1e-12;
}

Grid make_grid(std::size_t dim, std::uint32_t n, double s) {
  return make_grid(n, s, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim)));
}

Grid make_grid(std::uint32_t n, double s, Eigen::VectorXd anchor) {
  if (n < 1) throw DomainError("grid blocklength must be at least 1");
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("grid side scale s must be positive and finite");
  if (anchor.size() < 1 || !anchor.allFinite()) throw DomainError("grid anchor must be a finite vector");
  return Grid{n, s, std::move(anchor)};
}

std::vector<std::int64_t> cuboid_index_of(const Grid& grid, const Eigen::VectorXd& tau) {
  if (tau.size() != grid.anchor.size()) {
    std::ostringstream msg;
    msg << "statistic has dimension " << tau.size() << ", grid has " << grid.anchor.size();
    throw DomainError(msg.str());
  }
  const double side = grid.side();
  std::vector<std::int64_t> index(static_cast<std::size_t>(tau.size()));
  for (Eigen::Index i = 0; i < tau.size(); ++i) {
    // tau - c in (-side/2, side/2]  <=>  m = ceil(u - 1/2),  u = (tau - a) / side
    const double v = (tau[i] - grid.anchor[i]) / side - 0.5;
    const double nearest = std::round(v);
    const double m = std::abs(v - nearest) <= kTieTolerance * std::max(1.0, std::abs(v))
                         ? nearest
                         : std::ceil(v);
    index[static_cast<std::size_t>(i)] = static_cast<std::int64_t>(m);
  }
  return index;
}

Eigen::VectorXd center_of_index(const Grid& grid, const std::vector<std::int64_t>& index) {
  Eigen::VectorXd center(grid.anchor.size());
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    center[i] = grid.anchor[i] + grid.side() * static_cast<double>(index[static_cast<std::size_t>(i)]);
  }
  return center;
}

Eigen::VectorXd cuboid_center_of(const Grid& grid, const Eigen::VectorXd& tau) {
  return center_of_index(grid, cuboid_index_of(grid, tau));
}

}  // namespace typesize
