#include "kcurv/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace kcurv {

SphereGrid SphereGrid::circle(Index n_theta) {
  if (n_theta < 8) throw DomainError("S^1 grid needs at least 8 nodes");
  SphereGrid grid;
  grid.dim_ = 1;
  grid.n_phi_ = 1;
  grid.n_theta_ = n_theta;
  grid.size_ = n_theta;
  grid.steps_ = {2.0 * std::numbers::pi / double(n_theta), 0.0};
  grid.spacing_ = grid.steps_[0];
  grid.populate_metric();
  return grid;
}

SphereGrid SphereGrid::sphere(Index n_phi, Index n_theta) {
  if (n_theta < 8) throw DomainError("S^2 grid needs at least 8 longitudes");
  if (n_theta % 2 != 0) throw DomainError("S^2 grid needs an even longitude count");
  if (n_phi < 4) throw DomainError("S^2 grid needs at least 4 latitude rings");
  SphereGrid grid;
  grid.dim_ = 2;
  grid.n_phi_ = n_phi;
  grid.n_theta_ = n_theta;
  grid.size_ = n_phi * n_theta;
  grid.steps_ = {std::numbers::pi / double(n_phi), 2.0 * std::numbers::pi / double(n_theta)};
  grid.populate_metric();
  double max_sin = 0.0;
  for (Index i = 0; i < n_phi; ++i)
    max_sin = std::max(max_sin, std::sin((double(i) + 0.5) * grid.steps_[0]));
  grid.spacing_ = std::max(grid.steps_[0], grid.steps_[1] * max_sin);
  return grid;
}

SphereGrid build_grid(int dim, std::span<const Index> resolution) {
  if (dim == 1) {
    if (resolution.size() != 1) throw DomainError("S^1 grid takes one resolution value");
    return SphereGrid::circle(resolution[0]);
  }
  if (dim == 2) {
    if (resolution.size() != 2) throw DomainError("S^2 grid takes two resolution values");
    return SphereGrid::sphere(resolution[0], resolution[1]);
  }
  throw DomainError("unsupported sphere dimension " + std::to_string(dim));
}

void SphereGrid::populate_metric() {
  const int n = dim_;
  const Index rings = (dim_ == 1) ? 1 : n_phi_;
  sigma_.assign(rings, SmallMat<double>::Identity(n, n));
  sigma_inv_.assign(rings, SmallMat<double>::Identity(n, n));
  christoffel_.assign(rings, {SmallMat<double>::Zero(n, n), SmallMat<double>::Zero(n, n)});
  if (dim_ == 1) return;
  for (Index i = 0; i < rings; ++i) {
    const double phi = (double(i) + 0.5) * steps_[0];
    const double s = std::sin(phi);
    const double c = std::cos(phi);
    sigma_[i](1, 1) = s * s;
    sigma_inv_[i](1, 1) = 1.0 / (s * s);
    christoffel_[i][0](1, 1) = -s * c;
    christoffel_[i][1](0, 1) = c / s;
    christoffel_[i][1](1, 0) = c / s;
  }
}

std::vector<Index> SphereGrid::resolution() const {
  if (dim_ == 1) return {n_theta_};
  return {n_phi_, n_theta_};
}

SmallVec<double> SphereGrid::coordinates(Index node) const {
  SmallVec<double> x(dim_);
  if (dim_ == 1) {
    x(0) = double(node) * steps_[0];
  } else {
    x(0) = (double(node / n_theta_) + 0.5) * steps_[0];
    x(1) = double(node % n_theta_) * steps_[1];
  }
  return x;
}

Eigen::VectorXd SphereGrid::point(Index node) const {
  const SmallVec<double> x = coordinates(node);
  Eigen::VectorXd p(dim_ + 1);
  if (dim_ == 1) {
    p << std::cos(x(0)), std::sin(x(0));
  } else {
    p << std::sin(x(0)) * std::cos(x(1)), std::sin(x(0)) * std::sin(x(1)), std::cos(x(0));
  }
  return p;
}

Index SphereGrid::neighbor(Index node, int d_phi, int d_theta, bool* crossed_pole) const {
  bool crossed = false;
  Index result;
  if (dim_ == 1) {
    result = ((node + d_theta) % n_theta_ + n_theta_) % n_theta_;
  } else {
    Index i = node / n_theta_ + d_phi;
    Index j = node % n_theta_ + d_theta;
    if (i < 0) {
      i = -1 - i;
      j += n_theta_ / 2;
      crossed = true;
    } else if (i >= n_phi_) {
      i = 2 * n_phi_ - 1 - i;
      j += n_theta_ / 2;
      crossed = true;
    }
    j = ((j % n_theta_) + n_theta_) % n_theta_;
    result = i * n_theta_ + j;
  }
  if (crossed_pole) *crossed_pole = crossed;
  return result;
}

std::vector<Index> SphereGrid::stencil(Index node) const {
  std::vector<Index> nodes;
  if (dim_ == 1) {
    for (int d = -1; d <= 1; ++d) nodes.push_back(neighbor(node, 0, d));
  } else {
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b) nodes.push_back(neighbor(node, a, b));
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

SphereGrid SphereGrid::refined() const {
  if (dim_ == 1) return circle(2 * n_theta_);
  return sphere(2 * n_phi_, 2 * n_theta_);
}

}  // namespace kcurv
