#pragma once

// Finite-difference discretization of the round S^1 and S^2.
//
// S^1 uses a periodic uniform grid in the angle theta. S^2 uses a
// colatitude/longitude grid (phi, theta) whose rings sit at half-integer
// multiples of d_phi, so no node lies on a pole. Stencils that step past a
// pole continue through it: the ghost of (phi, theta) at negative colatitude
// is the node (-phi, theta + pi). Tensor components pick up a factor (-1) per
// phi index in that reflection, which callers express through `parity`.

#include "kcurv/core.hpp"

#include <array>
#include <span>
#include <vector>

namespace kcurv {

/// Value and raw coordinate partials of a scalar field at one node.
template <typename Scalar>
struct NodeJet {
  Scalar value;
  SmallVec<Scalar> d;   // d_i f
  SmallMat<Scalar> dd;  // d_i d_j f
};

class SphereGrid {
 public:
  static SphereGrid circle(Index n_theta);
  static SphereGrid sphere(Index n_phi, Index n_theta);

  int dim() const { return dim_; }
  Index size() const { return size_; }
  Index n_phi() const { return n_phi_; }
  Index n_theta() const { return n_theta_; }
  /// Resolution as given to build_grid: {n} on S^1, {n_phi, n_theta} on S^2.
  std::vector<Index> resolution() const;

  /// Coordinate step along direction `axis` (0 = phi on S^2, 0 = theta on S^1).
  double step(int axis) const { return steps_[axis]; }
  /// Largest metric-scaled coordinate spacing.
  double spacing() const { return spacing_; }

  /// Intrinsic coordinates: (theta) on S^1, (phi, theta) on S^2.
  SmallVec<double> coordinates(Index node) const;
  /// Embedding of the node in R^{n+1}.
  Eigen::VectorXd point(Index node) const;

  const SmallMat<double>& sigma(Index node) const { return sigma_[ring(node)]; }
  const SmallMat<double>& sigma_inv(Index node) const { return sigma_inv_[ring(node)]; }
  /// Christoffel symbols of sigma: christoffel(node)[k](i, j) = Gamma~^k_ij.
  const std::array<SmallMat<double>, 2>& christoffel(Index node) const {
    return christoffel_[ring(node)];
  }

  /// Node reached by stepping (d_phi, d_theta) from `node` (S^1 ignores d_phi).
  /// `crossed_pole` reports whether the step went through a pole.
  Index neighbor(Index node, int d_phi, int d_theta, bool* crossed_pole = nullptr) const;

  /// Nodes read by the second-order stencil at `node`, sorted and unique.
  std::vector<Index> stencil(Index node) const;

  SphereGrid refined() const;

  /// Jet of `f` at `node`. `parity` multiplies values fetched across a pole.
  template <typename Scalar>
  NodeJet<Scalar> jet(const Field<Scalar>& f, Index node, double parity = 1.0) const;

  /// Covariant Hessian from a jet: d_ij f - Gamma~^k_ij d_k f.
  template <typename Scalar>
  SmallMat<Scalar> covariant_hessian_at(Index node, const NodeJet<Scalar>& jet) const;

 private:
  SphereGrid() = default;
  void populate_metric();
  Index ring(Index node) const { return dim_ == 1 ? 0 : node / n_theta_; }

  template <typename Scalar>
  Scalar fetch(const Field<Scalar>& f, Index node, int d_phi, int d_theta,
               double parity) const {
    bool crossed = false;
    const Index m = neighbor(node, d_phi, d_theta, &crossed);
    return crossed ? Scalar(parity * f(m)) : f(m);
  }

  int dim_ = 1;
  Index n_phi_ = 1;
  Index n_theta_ = 0;
  Index size_ = 0;
  std::array<double, 2> steps_{0.0, 0.0};
  double spacing_ = 0.0;
  // Metric quantities depend only on the ring.
  std::vector<SmallMat<double>> sigma_;
  std::vector<SmallMat<double>> sigma_inv_;
  std::vector<std::array<SmallMat<double>, 2>> christoffel_;
};

SphereGrid build_grid(int dim, std::span<const Index> resolution);

template <typename Scalar>
NodeJet<Scalar> SphereGrid::jet(const Field<Scalar>& f, Index node, double parity) const {
  NodeJet<Scalar> out;
  out.value = f(node);
  out.d.resize(dim_);
  out.dd.resize(dim_, dim_);
  if (dim_ == 1) {
    const double h = steps_[0];
    const Scalar fp = f(neighbor(node, 0, 1));
    const Scalar fm = f(neighbor(node, 0, -1));
    out.d(0) = (fp - fm) / (2.0 * h);
    out.dd(0, 0) = (fp - 2.0 * out.value + fm) / (h * h);
    return out;
  }
  const double hp = steps_[0];
  const double ht = steps_[1];
  const Scalar n_ = fetch(f, node, 1, 0, parity);
  const Scalar s_ = fetch(f, node, -1, 0, parity);
  const Scalar e_ = fetch(f, node, 0, 1, parity);
  const Scalar w_ = fetch(f, node, 0, -1, parity);
  const Scalar ne = fetch(f, node, 1, 1, parity);
  const Scalar nw = fetch(f, node, 1, -1, parity);
  const Scalar se = fetch(f, node, -1, 1, parity);
  const Scalar sw = fetch(f, node, -1, -1, parity);
  out.d(0) = (n_ - s_) / (2.0 * hp);
  out.d(1) = (e_ - w_) / (2.0 * ht);
  out.dd(0, 0) = (n_ - 2.0 * out.value + s_) / (hp * hp);
  out.dd(1, 1) = (e_ - 2.0 * out.value + w_) / (ht * ht);
  out.dd(0, 1) = (ne - nw - se + sw) / (4.0 * hp * ht);
  out.dd(1, 0) = out.dd(0, 1);
  return out;
}

template <typename Scalar>
SmallMat<Scalar> SphereGrid::covariant_hessian_at(Index node, const NodeJet<Scalar>& jet) const {
  SmallMat<Scalar> hess = jet.dd;
  if (dim_ == 1) return hess;
  const auto& gamma = christoffel(node);
  for (int i = 0; i < 2; ++i)
    for (int j = i; j < 2; ++j) {
      Scalar v = jet.dd(i, j);
      for (int k = 0; k < 2; ++k) v -= gamma[k](i, j) * jet.d(k);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  return hess;
}

/// Coordinate partials d_i u at every node.
template <typename Scalar>
std::vector<SmallVec<Scalar>> covariant_gradient(const Field<Scalar>& u, const SphereGrid& grid) {
  std::vector<SmallVec<Scalar>> out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) out[i] = grid.jet(u, i).d;
  return out;
}

template <typename Scalar>
std::vector<SmallMat<Scalar>> covariant_hessian(const Field<Scalar>& u, const SphereGrid& grid) {
  std::vector<SmallMat<Scalar>> out(grid.size());
  for (Index i = 0; i < grid.size(); ++i) out[i] = grid.covariant_hessian_at(i, grid.jet(u, i));
  return out;
}

}  // namespace kcurv
