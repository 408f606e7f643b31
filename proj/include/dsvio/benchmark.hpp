#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsvio/csv.hpp"
#include "dsvio/scheme.hpp"

namespace dsvio::bench {

/// The two-state tracking example: xi_1 ~ N(1, sigma), xi_2 ~ U(-1-t, 1+t),
/// X = R^2_+, two L1-regularized least-squares inner problems of dimensions
/// 10 and 4.
struct ExampleInstance {
  double sigma = 0.5;
  double mu = 5e-3;
  Vector x0 = (Vector(2) << 1.0, 1.0).finished();
  double T = 1.0;
};

struct ResidualMetrics {
  double R1 = 0.0;
  double R2 = 0.0;
  double sigma = 0.0;
  Index J = 0;
  int repetitions = 1;
};

inline DsvioProblem build_instance(const ExampleInstance& inst) {
  if (inst.sigma <= 0.0) throw std::invalid_argument("ExampleInstance: sigma must be > 0");
  DsvioProblem p;
  p.n = 2;
  p.X = ConvexSet::NonnegativeOrthant(2);
  p.kernel.coordinates = {DistributionSpec::Normal(1.0, inst.sigma),
                          DistributionSpec::UniformAffine(-1.0, -1.0, 1.0, 1.0)};

  p.phi1 = [](double t, const Vector& xi, const Vector& x) -> Vector {
    Matrix A(2, 2);
    A << 1.0 + xi[1] + t, xi[0] - 1.0, xi[1], 3.0 + xi[0];
    return A * x;
  };

  p.b_maps = {
      [](double t, const Vector& xi, const Vector& x) -> Matrix {
        Matrix B = Matrix::Zero(2, 10);
        B.row(0).setConstant(2.0 * x[0] * xi[0] + t + xi[1]);
        B.row(1).setConstant(x[0] * xi[1] + t + 2.0 * xi[0]);
        return B;
      },
      [](double t, const Vector& xi, const Vector&) -> Matrix {
        Matrix B = Matrix::Zero(2, 4);
        B.row(0).setConstant(2.0 * t + xi[1]);
        B.row(1).setConstant(2.0 * t + 2.0 * xi[0]);
        return B;
      },
  };

  const double mu = inst.mu;
  p.inner_builders = {
      [mu](double t, const Vector& xi, const Vector& x) -> InnerProblem {
        Matrix H(3, 10);
        for (int col = 0; col < 10; ++col) {
          const double offset = 0.5 * static_cast<double>(col + 1);
          H(0, col) = t + xi[0] + offset;
          H(1, col) = t + xi[1] + offset;
          H(2, col) = xi[0] + xi[1] + offset;
        }
        Vector c(3);
        c << x[0] + xi[1], x[1] + xi[0], (xi[0] + xi[1]) * x[0];
        const double radius = 1.0 + t + std::exp(-std::abs(xi[0])) + std::abs(xi[1]);
        return L1LeastSquaresProblem{std::move(H), std::move(c), mu,
                                     ConvexSet::ScaledSymmetricBox(radius, 10)};
      },
      [mu](double t, const Vector& xi, const Vector& x) -> InnerProblem {
        Matrix H(2, 4);
        H << 1.0, t, xi[0], xi[1], t, t + xi[0], t + xi[1], xi[0] + xi[1];
        Vector c(2);
        c << x[0] - x[1], (xi[0] - xi[1]) * x[1];
        const double radius = 2.0 - t + std::abs(xi[1]);
        return L1LeastSquaresProblem{std::move(H), std::move(c), mu,
                                     ConvexSet::ScaledSymmetricBox(radius, 4)};
      },
  };
  return p;
}

/// High-fidelity reference run for one sigma; dedicated stream identity.
inline Trajectory reference_trajectory(const ExampleInstance& inst, std::uint64_t seed,
                                       Index N = 10000, Index J = 1000) {
  const DsvioProblem problem = build_instance(inst);
  SchemeConfig config;
  config.T = inst.T;
  config.N = N;
  config.J = J;
  config.stream = RngStream{seed, 0xfefe0000ULL};
  auto [traj, records] = run_scheme(problem, inst.x0, config, SolverConfig{}, SchemeMode::SAA);
  return traj;
}

/// Mean absolute per-coordinate deviation over grid nodes i = 1..N.
inline ResidualMetrics residual_metrics(const Trajectory& ref, const Trajectory& trial) {
  if (ref.N() != trial.N() || ref.T != trial.T) {
    throw std::invalid_argument("residual_metrics: trajectories must share the grid");
  }
  const Index N = ref.N();
  ResidualMetrics m;
  for (Index i = 1; i <= N; ++i) {
    const Vector& a = ref.states[static_cast<std::size_t>(i)];
    const Vector& b = trial.states[static_cast<std::size_t>(i)];
    m.R1 += std::abs(a[0] - b[0]);
    m.R2 += std::abs(a[1] - b[1]);
  }
  m.R1 /= static_cast<double>(N);
  m.R2 /= static_cast<double>(N);
  return m;
}

struct GridRow {
  double sigma;
  Index J;
  int rep;
  double R1;
  double R2;
};

struct GridResult {
  std::vector<GridRow> rows;                  // one per (sigma, J, rep)
  std::vector<ResidualMetrics> averaged;      // one per (sigma, J)
};

/// Runs the (sigma, J) grid against a per-sigma reference. Each cell gets
/// its own run_id so cells can run in any order without colliding streams.
inline GridResult experiment_grid(const std::vector<double>& sigmas,
                                  const std::vector<Index>& Js, int reps, Index N,
                                  std::uint64_t seed, double mu = 5e-3) {
  if (reps < 1) throw std::invalid_argument("experiment_grid: reps must be >= 1");
  GridResult result;
  for (std::size_t si = 0; si < sigmas.size(); ++si) {
    ExampleInstance inst;
    inst.sigma = sigmas[si];
    inst.mu = mu;
    const Trajectory ref = reference_trajectory(inst, seed, N);
    const DsvioProblem problem = build_instance(inst);
    for (std::size_t ji = 0; ji < Js.size(); ++ji) {
      ResidualMetrics avg;
      avg.sigma = inst.sigma;
      avg.J = Js[ji];
      avg.repetitions = reps;
      for (int rep = 0; rep < reps; ++rep) {
        SchemeConfig config;
        config.T = inst.T;
        config.N = N;
        config.J = Js[ji];
        config.stream =
            RngStream{seed, (static_cast<std::uint64_t>(si) * 1000 + ji) * 1000 +
                                static_cast<std::uint64_t>(rep) + 1};
        auto [traj, records] =
            run_scheme(problem, inst.x0, config, SolverConfig{}, SchemeMode::SAA);
        const ResidualMetrics m = residual_metrics(ref, traj);
        result.rows.push_back(GridRow{inst.sigma, Js[ji], rep, m.R1, m.R2});
        avg.R1 += m.R1;
        avg.R2 += m.R2;
      }
      avg.R1 /= static_cast<double>(reps);
      avg.R2 /= static_cast<double>(reps);
      result.averaged.push_back(avg);
    }
  }
  return result;
}

inline void write_grid_csv(const GridResult& grid, const std::string& rows_path,
                           const std::string& averaged_path) {
  auto rows = open_output(rows_path);
  rows << "sigma,J,rep,R1,R2\n";
  for (const auto& r : grid.rows) {
    rows << format_number(r.sigma) << "," << r.J << "," << r.rep << "," << format_number(r.R1)
         << "," << format_number(r.R2) << "\n";
  }
  auto avg = open_output(averaged_path);
  avg << "sigma,J,R1_mean,R2_mean\n";
  for (const auto& m : grid.averaged) {
    avg << format_number(m.sigma) << "," << m.J << "," << format_number(m.R1) << ","
        << format_number(m.R2) << "\n";
  }
}

}  // namespace dsvio::bench
