#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dsvio/convex_set.hpp"
#include "dsvio/inner_solvers.hpp"
#include "dsvio/random.hpp"

namespace dsvio {

/// The full model: projected dynamics on X whose drift is the expectation
/// of Phi1(t, xi, x) + sum_i B_i(t, xi, x) y_i(t, xi) over the kernel, with
/// each y_i solving a parametric convex program.
struct DsvioProblem {
  Index n = 0;
  ConvexSet X = ConvexSet::WholeSpace(0);
  std::function<Vector(double, const Vector&, const Vector&)> phi1;          // (t, xi, x)
  std::vector<std::function<Matrix(double, const Vector&, const Vector&)>> b_maps;
  std::vector<std::function<InnerProblem(double, const Vector&, const Vector&)>> inner_builders;
  ProbabilityKernel kernel;
  // Analytic E[Phi] for Exact mode, when available.
  std::function<Vector(double, const Vector&)> exact_drift;
};

struct SchemeConfig {
  double T = 1.0;
  Index N = 100;          // h = T / N
  Index J = 1;            // SAA batch size
  RngStream stream;
  bool warm_start = true;    // reuse previous node's inner solutions per (i, j) slot
  bool keep_records = false;  // retain per-node batches and inner solutions

  double step() const { return T / static_cast<double>(N); }

  void validate() const {
    if (T <= 0.0 || N < 1 || J < 1) throw std::invalid_argument("SchemeConfig: T>0, N>=1, J>=1");
    if (step() > 1.0) throw std::invalid_argument("SchemeConfig: h = T/N must be <= 1");
  }
};

struct Trajectory {
  double T = 0.0;
  std::vector<Vector> states;  // N + 1 states on the uniform grid

  Index num_nodes() const { return static_cast<Index>(states.size()); }
  Index N() const { return num_nodes() - 1; }
  double step() const { return T / static_cast<double>(N()); }
  double node_time(Index nu) const { return step() * static_cast<double>(nu); }
};

struct StepRecord {
  Index node = 0;
  SampleBatch batch;
  std::vector<std::vector<InnerSolution>> inner_solutions;  // k x J
  Vector drift_estimate;
};

enum class SchemeMode { SAA, Exact };

/// Empirical-mean drift at (t, x): solves the k inner problems for each
/// sample, assembles Phi per sample, and averages in fixed ascending j
/// order. Solves run sequentially in fixed (i, j) order so the per-builder
/// support caches evolve the same way on every identical run.
inline std::pair<Vector, std::vector<std::vector<InnerSolution>>> saa_drift(
    const DsvioProblem& problem, double t, const Vector& x, const SampleBatch& batch,
    const SolverConfig& solver_config,
    const std::vector<std::vector<InnerSolution>>* warm = nullptr,
    std::vector<SupportCache>* caches = nullptr) {
  const Index J = batch.size();
  const std::size_t k = problem.inner_builders.size();
  std::vector<std::vector<InnerSolution>> solutions(k);
  for (auto& row : solutions) row.resize(static_cast<std::size_t>(J));

  for (std::size_t i = 0; i < k; ++i) {
    SupportCache* cache = caches != nullptr ? &(*caches)[i] : nullptr;
    for (Index j = 0; j < J; ++j) {
      const Vector xi = batch.sample(j);
      const InnerProblem ip = problem.inner_builders[i](t, xi, x);
      const Vector* start = nullptr;
      if (warm != nullptr) {
        start = &(*warm)[i][static_cast<std::size_t>(j)].y;
      }
      solutions[i][static_cast<std::size_t>(j)] = solve(ip, solver_config, start, cache);
    }
  }

  Vector drift = Vector::Zero(problem.n);
  for (Index j = 0; j < J; ++j) {
    const Vector xi = batch.sample(j);
    Vector phi = problem.phi1(t, xi, x);
    for (std::size_t i = 0; i < k; ++i) {
      phi.noalias() += problem.b_maps[i](t, xi, x) *
                       solutions[i][static_cast<std::size_t>(j)].y;
    }
    drift += phi;
  }
  drift /= static_cast<double>(J);
  return {std::move(drift), std::move(solutions)};
}

/// x + h (Pi_X(x - drift) - x), evaluated as the convex combination
/// (1-h) x + h Pi_X(x - drift). When x lies in X the result lies in X;
/// a final clamp removes rounding dust so discrete feasibility is exact.
inline Vector euler_step(const Vector& x, const Vector& drift, double h, const ConvexSet& X) {
  if (h <= 0.0 || h > 1.0) throw std::invalid_argument("euler_step: need 0 < h <= 1");
  const Vector target = project(X, x - drift);
  Vector next = (1.0 - h) * x + h * target;
  if (contains(X, x, 0.0)) next = project(X, next);
  return next;
}

inline std::pair<Trajectory, std::vector<StepRecord>> run_scheme(const DsvioProblem& problem,
                                                                 const Vector& x0,
                                                                 const SchemeConfig& config,
                                                                 const SolverConfig& solver_config,
                                                                 SchemeMode mode) {
  config.validate();
  if (mode == SchemeMode::Exact && !problem.exact_drift) {
    throw std::invalid_argument("run_scheme: Exact mode requires exact_drift");
  }
  if (!contains(problem.X, x0, 0.0)) {
    std::cerr << "warning: run_scheme: x0 is outside X (dist = " << distance(problem.X, x0)
              << "); the scheme is still defined\n";
  }

  const double h = config.step();
  Trajectory traj;
  traj.T = config.T;
  traj.states.reserve(static_cast<std::size_t>(config.N) + 1);
  traj.states.push_back(x0);

  std::vector<StepRecord> records;
  std::vector<std::vector<InnerSolution>> prev_solutions;
  std::vector<SupportCache> caches(problem.inner_builders.size());

  Vector x = x0;
  for (Index nu = 0; nu < config.N; ++nu) {
    const double t = h * static_cast<double>(nu);
    Vector drift;
    if (mode == SchemeMode::Exact) {
      drift = problem.exact_drift(t, x);
    } else {
      SampleBatch batch = sample_batch(problem.kernel, t, config.J, config.stream,
                                       static_cast<std::uint64_t>(nu));
      const auto* warm =
          (config.warm_start && !prev_solutions.empty()) ? &prev_solutions : nullptr;
      auto [d, sols] = saa_drift(problem, t, x, batch, solver_config, warm, &caches);
      drift = std::move(d);
      if (config.keep_records) {
        records.push_back(StepRecord{nu, batch, sols, drift});
      }
      prev_solutions = std::move(sols);
    }
    x = euler_step(x, drift, h, problem.X);
    traj.states.push_back(x);
  }
  return {std::move(traj), std::move(records)};
}

/// Piecewise-linear evaluation; exact at nodes.
inline Vector interpolate(const Trajectory& traj, double t) {
  if (t < 0.0 || t > traj.T) throw std::invalid_argument("interpolate: t outside [0, T]");
  const double h = traj.step();
  Index nu = static_cast<Index>(t / h);
  if (nu >= traj.N()) nu = traj.N() - 1;
  const double t_lo = h * static_cast<double>(nu);
  const double t_hi = h * static_cast<double>(nu + 1);
  return ((t_hi - t) / h) * traj.states[static_cast<std::size_t>(nu)] +
         ((t - t_lo) / h) * traj.states[static_cast<std::size_t>(nu + 1)];
}

struct FeasibilityReport {
  double max_distance = 0.0;
  std::optional<Index> first_violating_node;  // first node with dist > 1e-12
};

inline FeasibilityReport feasibility_report(const Trajectory& traj, const ConvexSet& X) {
  FeasibilityReport report;
  for (Index nu = 0; nu < traj.num_nodes(); ++nu) {
    const double d = distance(X, traj.states[static_cast<std::size_t>(nu)]);
    if (d > report.max_distance) report.max_distance = d;
    if (d > 1e-12 && !report.first_violating_node) report.first_violating_node = nu;
  }
  return report;
}

}  // namespace dsvio
