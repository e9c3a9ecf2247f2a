#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace typesize {

/// Cuboid partition of R^d with side s/n: boxes
///   { c + z : -s/2n < z_i <= s/2n },  c in anchor + (s/n) Z^d.
struct Grid {
  std::uint32_t n = 1;
  double s = 1.0;
  Eigen::VectorXd anchor;

  double side() const { return s / static_cast<double>(n); }
  std::size_t dim() const { return static_cast<std::size_t>(anchor.size()); }
};

/// Validates n >= 1, s > 0 finite, finite anchor of length `dim`.
Grid make_grid(std::size_t dim, std::uint32_t n, double s = 1.0);
Grid make_grid(std::uint32_t n, double s, Eigen::VectorXd anchor);

/// Integer lattice coordinates m of the cuboid containing `tau`
/// (center = anchor + side * m). Values within a relative 1e-12 of a box
/// boundary are assigned to the box whose inclusive side they touch.
std::vector<std::int64_t> cuboid_index_of(const Grid& grid, const Eigen::VectorXd& tau);

Eigen::VectorXd center_of_index(const Grid& grid, const std::vector<std::int64_t>& index);

Eigen::VectorXd cuboid_center_of(const Grid& grid, const Eigen::VectorXd& tau);

}  // namespace typesize
