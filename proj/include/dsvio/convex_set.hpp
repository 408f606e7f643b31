#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace dsvio {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Nonempty closed convex sets with closed-form Euclidean projections.
/// Every supported variant projects by a componentwise clamp.
class ConvexSet {
 public:
  enum class Kind { WholeSpace, NonnegativeOrthant, Box, ScaledSymmetricBox };

  static ConvexSet WholeSpace(Index dim) { return ConvexSet(Kind::WholeSpace, dim, {}, {}); }

  static ConvexSet NonnegativeOrthant(Index dim) {
    return ConvexSet(Kind::NonnegativeOrthant, dim, {}, {});
  }

  static ConvexSet Box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) {
      throw std::invalid_argument("ConvexSet::Box: bound dimensions differ");
    }
    if ((lower.array() > upper.array()).any()) {
      throw std::invalid_argument("ConvexSet::Box: lower > upper in some component");
    }
    const Index d = lower.size();
    return ConvexSet(Kind::Box, d, std::move(lower), std::move(upper));
  }

  /// r * [-1, 1]^dim
  static ConvexSet ScaledSymmetricBox(double radius, Index dim) {
    if (radius < 0) {
      throw std::invalid_argument("ConvexSet::ScaledSymmetricBox: negative radius");
    }
    return ConvexSet(Kind::ScaledSymmetricBox, dim, Vector::Constant(dim, -radius),
                     Vector::Constant(dim, radius));
  }

  Kind kind() const { return kind_; }
  Index dim() const { return dim_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }

 private:
  ConvexSet(Kind kind, Index dim, Vector lower, Vector upper)
      : kind_(kind), dim_(dim), lower_(std::move(lower)), upper_(std::move(upper)) {}

  Kind kind_;
  Index dim_;
  Vector lower_, upper_;  // materialized for Box and ScaledSymmetricBox
};

inline void check_dim(const ConvexSet& set, const Vector& z, const char* where) {
  if (z.size() != set.dim()) {
    throw std::invalid_argument(std::string(where) + ": dimension mismatch, set dim " +
                                std::to_string(set.dim()) + ", vector dim " +
                                std::to_string(z.size()));
  }
}

/// Euclidean projection onto the set.
inline Vector project(const ConvexSet& set, const Vector& z) {
  check_dim(set, z, "project");
  switch (set.kind()) {
    case ConvexSet::Kind::WholeSpace:
      return z;
    case ConvexSet::Kind::NonnegativeOrthant:
      return z.cwiseMax(0.0);
    case ConvexSet::Kind::Box:
    case ConvexSet::Kind::ScaledSymmetricBox:
      return z.cwiseMax(set.lower()).cwiseMin(set.upper());
  }
  throw std::logic_error("project: unreachable");
}

inline double distance(const ConvexSet& set, const Vector& z) {
  check_dim(set, z, "distance");
  return (z - project(set, z)).norm();
}

inline bool contains(const ConvexSet& set, const Vector& z, double tol = 0.0) {
  check_dim(set, z, "contains");
  return distance(set, z) <= tol;
}

}  // namespace dsvio
