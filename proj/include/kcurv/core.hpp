#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/AutoDiff>

#include <stdexcept>
#include <string>
#include <vector>

namespace kcurv {

using Index = Eigen::Index;

// Per-node tensors live on S^1 or S^2, so their size never exceeds 2.
template <typename Scalar>
using SmallVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 2, 1>;
template <typename Scalar>
using SmallMat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, 0, 2, 2>;

template <typename Scalar>
using Field = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Forward-mode scalar carrying one directional derivative.
using Dual = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.value(); }

/// Builds a dual number whose value is `value` and whose derivative follows
/// the chain rule through the partials `d_a`, `d_b` of an externally
/// evaluated function of (a, b).
inline double chain(double value, double, double, double, double) { return value; }
inline Dual chain(double value, double d_a, double d_b, const Dual& a, const Dual& b) {
  return Dual(value, d_a * a.derivatives() + d_b * b.derivatives());
}

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a node leaves the Garding cone.
class AdmissibilityError : public std::runtime_error {
 public:
  AdmissibilityError(const std::string& what, std::vector<Index> nodes = {})
      : std::runtime_error(what), nodes_(std::move(nodes)) {}
  const std::vector<Index>& nodes() const { return nodes_; }

 private:
  std::vector<Index> nodes_;
};

/// Raised when the graph fails to be spacelike at some nodes.
class SpacelikeError : public std::runtime_error {
 public:
  SpacelikeError(const std::string& what, std::vector<Index> nodes = {})
      : std::runtime_error(what), nodes_(std::move(nodes)) {}
  const std::vector<Index>& nodes() const { return nodes_; }

 private:
  std::vector<Index> nodes_;
};

}  // namespace kcurv
