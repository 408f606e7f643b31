#pragma once

#include <cmath>
#include <numbers>

#include "dsvio/scheme.hpp"

namespace dsvio {

/// Scalar decay instance with a known solution: the drift expectation is x
/// itself, so Exact mode gives x_nu = (1 - h)^nu x0 and the continuous flow
/// is x0 e^{-t}. The SAA variant adds a zero-mean sin(2 pi xi) disturbance,
/// xi ~ U(0, 1), and a two-variable inner program whose unique solution
/// (0.5, 0.5) is annihilated by B = [1, -1].
inline DsvioProblem decay_problem() {
  DsvioProblem p;
  p.n = 1;
  p.X = ConvexSet::NonnegativeOrthant(1);
  p.kernel.coordinates = {DistributionSpec::UniformAffine(0.0, 0.0, 1.0, 0.0)};

  p.phi1 = [](double, const Vector& xi, const Vector& x) -> Vector {
    return (Vector(1) << x[0] + std::sin(2.0 * std::numbers::pi * xi[0])).finished();
  };
  p.b_maps = {[](double, const Vector&, const Vector&) -> Matrix {
    return (Matrix(1, 2) << 1.0, -1.0).finished();
  }};
  p.inner_builders = {[](double, const Vector&, const Vector&) -> InnerProblem {
    BoxQuadraticProblem qp;
    qp.feasible = ConvexSet::Box(Vector::Zero(2), Vector::Ones(2));
    qp.blocks.push_back(
        ResidualBlock{Matrix::Identity(2, 2), (Vector(2) << 0.5, 0.5).finished(), 1.0});
    return qp;
  }};
  p.exact_drift = [](double, const Vector& x) -> Vector { return x; };
  return p;
}

inline double decay_closed_form(double x0, double t) { return x0 * std::exp(-t); }

}  // namespace dsvio
