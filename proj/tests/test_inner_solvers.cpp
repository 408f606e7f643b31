#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_util.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

#include "dsvio/inner_solvers.hpp"
#include "dsvio/random.hpp"

using namespace dsvio;

namespace {

Matrix random_matrix(const RngStream& stream, std::uint64_t node, Index rows, Index cols,
                     double scale) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    for (Index c = 0; c < cols; ++c) {
      m(r, c) = scale * (2.0 * rng::uniform(stream, node, static_cast<std::uint64_t>(r),
                                            static_cast<std::uint64_t>(c)) -
                         1.0);
    }
  }
  return m;
}

Vector random_vec(const RngStream& stream, std::uint64_t node, Index dim, double scale) {
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) {
    v[i] = scale * (2.0 * rng::uniform(stream, node, 1000, static_cast<std::uint64_t>(i)) - 1.0);
  }
  return v;
}

// Coarse-to-fine grid search over the box; resolution shrinks below 1e-5.
Vector grid_search_oracle(const BoxQuadraticProblem& p) {
  const Index m = p.blocks.front().G.cols();
  REQUIRE(m <= 3);
  Vector lo = p.feasible.lower();
  Vector hi = p.feasible.upper();
  Vector best = 0.5 * (lo + hi);
  double best_obj = objective(p, best);
  const int points = 21;
  for (int pass = 0; pass < 12; ++pass) {
    Vector y(m);
    std::vector<int> idx(static_cast<std::size_t>(m), 0);
    while (true) {
      for (Index k = 0; k < m; ++k) {
        y[k] = lo[k] + (hi[k] - lo[k]) * static_cast<double>(idx[static_cast<std::size_t>(k)]) /
                           (points - 1);
      }
      const double obj = objective(p, y);
      if (obj < best_obj) {
        best_obj = obj;
        best = y;
      }
      Index k = 0;
      while (k < m && ++idx[static_cast<std::size_t>(k)] == points) {
        idx[static_cast<std::size_t>(k)] = 0;
        ++k;
      }
      if (k == m) break;
    }
    const Vector radius = (hi - lo) / (points - 1);
    lo = (best - 2.0 * radius).cwiseMax(p.feasible.lower());
    hi = (best + 2.0 * radius).cwiseMin(p.feasible.upper());
  }
  return best;
}

}  // namespace

TEST_CASE("soft threshold worked examples") {
  const Vector v = (Vector(3) << 3.0, -3.0, 0.5).finished();
  const Vector s = soft_threshold(v, 1.0);
  CHECK(s[0] == 2.0);
  CHECK(s[1] == -2.0);
  CHECK(s[2] == 0.0);
  CHECK(bitwise_equal(soft_threshold(Vector::Zero(2), 0.5), Vector::Zero(2)));
}

TEST_CASE("lipschitz estimate matches a dense eigensolver") {
  const RngStream stream{77, 2};
  for (int trial = 0; trial < 20; ++trial) {
    const Index rows = 2 + trial % 4;
    const Index cols = 2 + (trial * 3) % 9;
    const Matrix H = random_matrix(stream, static_cast<std::uint64_t>(trial), rows, cols, 3.0);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(H.transpose() * H);
    const double expected = eig.eigenvalues().maxCoeff();
    CHECK(lipschitz_estimate(H) == doctest::Approx(expected).epsilon(1e-8));
  }
  CHECK(lipschitz_estimate(Matrix::Zero(3, 3)) == 1e-16);
}

TEST_CASE("kkt residual certifies optimality and rejects infeasible points") {
  // Unconstrained quadratic: minimum at y = c when H = I.
  L1LeastSquaresProblem p{Matrix::Identity(2, 2), (Vector(2) << 3.0, -1.0).finished(), 1.0,
                          ConvexSet::WholeSpace(2)};
  const Vector opt = soft_threshold(p.c, p.mu);  // separable closed form for H = I
  CHECK(kkt_residual(p, opt) <= 1e-14);
  CHECK(kkt_residual(p, Vector::Zero(2)) > 0.1);

  L1LeastSquaresProblem boxed = p;
  boxed.feasible = ConvexSet::ScaledSymmetricBox(1.0, 2);
  CHECK_THROWS_AS(kkt_residual(boxed, (Vector(2) << 2.0, 0.0).finished()),
                  std::invalid_argument);
}

TEST_CASE("l1 solver separable closed forms") {
  SolverConfig config;

  // H = I: y_i = soft_threshold(c_i, mu), then clamp.
  {
    L1LeastSquaresProblem p{Matrix::Identity(2, 2), (Vector(2) << 3.0, 10.995).finished(), 1.0,
                            ConvexSet::ScaledSymmetricBox(100.0, 2)};
    const auto sol = solve_l1(p, config);
    CHECK(sol.converged);
    CHECK(sol.y[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(sol.y[1] == doctest::Approx(9.995).epsilon(1e-8));
  }
  // Active box bound.
  {
    L1LeastSquaresProblem p{Matrix::Identity(2, 2), (Vector(2) << 3.0, 10.0).finished(), 1.0,
                            ConvexSet::ScaledSymmetricBox(5.0, 2)};
    const auto sol = solve_l1(p, config);
    CHECK(sol.converged);
    CHECK(sol.y[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(sol.y[1] == doctest::Approx(5.0).epsilon(1e-8));
  }
  // Diagonal H: y_i = soft_threshold(d_i c_i, mu) / d_i^2, clamped.
  {
    const Vector d = (Vector(3) << 0.5, 2.0, 4.0).finished();
    const Vector c = (Vector(3) << 1.0, -3.0, 0.1).finished();
    L1LeastSquaresProblem p{Matrix(d.asDiagonal()), c, 0.2,
                            ConvexSet::ScaledSymmetricBox(10.0, 3)};
    const auto sol = solve_l1(p, config);
    CHECK(sol.converged);
    for (Index i = 0; i < 3; ++i) {
      const double unclipped =
          soft_threshold((Vector(1) << d[i] * c[i]).finished(), p.mu)[0] / (d[i] * d[i]);
      const double expected = std::clamp(unclipped, -10.0, 10.0);
      // residual tol 1e-8 over curvature 0.25 bounds the coordinate error by 4e-8
      CHECK(sol.y[i] == doctest::Approx(expected).epsilon(1e-7));
    }
  }
}

TEST_CASE("l1 solver certifies random dense instances") {
  const RngStream stream{123, 3};
  SolverConfig config;
  for (int trial = 0; trial < 20; ++trial) {
    const auto node = static_cast<std::uint64_t>(100 + trial);
    const Matrix H = random_matrix(stream, node, 3, 10, 2.0);
    const Vector c = random_vec(stream, node, 3, 2.0);
    L1LeastSquaresProblem p{H, c, 5e-3, ConvexSet::ScaledSymmetricBox(2.0, 10)};
    const auto sol = solve_l1(p, config);
    CHECK(sol.converged);
    CHECK(sol.iterations <= config.max_iter);
    CHECK(sol.kkt_residual <= 1e-6);
    CHECK(contains(p.feasible, sol.y, 1e-12));
    // warm start from the solution converges immediately
    const auto warm = solve_l1(p, config, &sol.y);
    CHECK(warm.iterations == 0);
  }
}

TEST_CASE("l1 solver returns its best iterate when capped") {
  const RngStream stream{9, 4};
  const Matrix H = random_matrix(stream, 1, 3, 10, 2.0);
  const Vector c = random_vec(stream, 1, 3, 2.0);
  L1LeastSquaresProblem p{H, c, 5e-3, ConvexSet::ScaledSymmetricBox(2.0, 10)};
  SolverConfig capped;
  capped.max_iter = 50;
  capped.tol = 0.0;  // unreachable tolerance forces the cap
  const auto sol = solve_l1(p, capped);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations <= capped.max_iter);
  CHECK(contains(p.feasible, sol.y, 1e-12));
  CHECK(objective(p, sol.y) <= objective(p, Vector::Zero(10)) + 1e-12);
}

TEST_CASE("box quadratic solver matches a grid-search oracle") {
  const RngStream stream{55, 5};
  SolverConfig config;
  for (int trial = 0; trial < 10; ++trial) {
    const Index m = 1 + trial % 3;
    const auto node = static_cast<std::uint64_t>(trial);
    BoxQuadraticProblem p;
    p.feasible = ConvexSet::ScaledSymmetricBox(1.0, m);
    p.blocks.push_back(ResidualBlock{random_matrix(stream, node, 2, m, 2.0),
                                     random_vec(stream, node, 2, 2.0), 1.0});
    p.blocks.push_back(ResidualBlock{random_matrix(stream, node + 500, 1, m, 1.0),
                                     random_vec(stream, node + 500, 1, 1.0), 3.0});
    const auto sol = solve_box_quadratic(p, config);
    CHECK(sol.converged);
    CHECK(contains(p.feasible, sol.y, 1e-12));
    const Vector oracle = grid_search_oracle(p);
    CHECK((sol.y - oracle).lpNorm<Eigen::Infinity>() <= 1e-3);
  }
}

TEST_CASE("box quadratic solver handles badly scaled columns") {
  // Column scales differ by 1e4; Jacobi scaling keeps the iteration usable.
  Matrix G(2, 2);
  G << 1.0, 0.0, 0.0, 1e4;
  BoxQuadraticProblem p;
  p.feasible = ConvexSet::ScaledSymmetricBox(10.0, 2);
  p.blocks.push_back(ResidualBlock{G, (Vector(2) << 0.5, 2e4 * 0.25).finished(), 1.0});
  const auto sol = solve_box_quadratic(p, SolverConfig{});
  CHECK(sol.converged);
  CHECK(sol.y[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(sol.y[1] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("assembly rejects malformed problems") {
  BoxQuadraticProblem empty;
  empty.feasible = ConvexSet::WholeSpace(2);
  CHECK_THROWS_AS(solve_box_quadratic(empty, SolverConfig{}), std::invalid_argument);

  BoxQuadraticProblem bad;
  bad.feasible = ConvexSet::WholeSpace(2);
  bad.blocks.push_back(ResidualBlock{Matrix::Identity(2, 2), Vector::Zero(2), -1.0});
  CHECK_THROWS_AS(solve_box_quadratic(bad, SolverConfig{}), std::invalid_argument);
}

TEST_CASE("variant dispatcher routes both problem kinds") {
  const InnerProblem l1 = L1LeastSquaresProblem{Matrix::Identity(1, 1),
                                                (Vector(1) << 2.0).finished(), 0.5,
                                                ConvexSet::WholeSpace(1)};
  CHECK(solve(l1, SolverConfig{}).y[0] == doctest::Approx(1.5).epsilon(1e-8));

  BoxQuadraticProblem qp;
  qp.feasible = ConvexSet::Box(Vector::Zero(1), Vector::Ones(1));
  qp.blocks.push_back(ResidualBlock{Matrix::Identity(1, 1), (Vector(1) << 2.0).finished(), 1.0});
  CHECK(solve(InnerProblem{qp}, SolverConfig{}).y[0] == doctest::Approx(1.0).epsilon(1e-10));
}
