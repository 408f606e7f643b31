#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dsvio/health/generate.hpp"
#include "dsvio/health/rules.hpp"
#include "dsvio/inner_solvers.hpp"
#include "dsvio/random.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dsvio::health {

struct Harmonic {
  double amplitude = 0.0;
  double frequency = 0.0;  // cycles per hour
};

struct HealthModelParams {
  double A = std::exp(-3.0);
  double p = 0.01;
  std::vector<Harmonic> harmonics = {{0.15, 0.025}, {0.17, 0.021}};
  double eps1 = 0.0;  // circadian noise, off by default
  double ell0 = 0.02;
  double delta_ell1 = 1.5;
  std::array<double, 3> alpha = {0.4, 0.4, 0.2};
  std::array<double, 3> lambda = {0.5, 0.5, 0.5};
  std::array<double, 3> rho = {5.0, 5.0, 5.0};
  double box_radius = 10.0;

  void validate() const {
    for (double a : alpha) {
      if (a < 0.0) throw std::invalid_argument("HealthModelParams: alpha weights >= 0");
    }
    if (box_radius <= 0.0) throw std::invalid_argument("HealthModelParams: box_radius > 0");
  }
};

inline double clamp_state(double x) { return std::clamp(x, 0.0, 2.0); }

/// Similarity-based downweighting of history rows: lambda * (1 - softmax of
/// negative squared distances to b_row, scaled by the squared median of the
/// pairwise row distances of H). Identical rows degrade to the uniform
/// softmax limit.
inline Vector correction_weights(const Vector& b_row, const Matrix& H, double lambda) {
  const Index rows = H.rows();
  if (rows < 2) throw std::invalid_argument("correction_weights: H needs >= 2 rows");
  if (H.cols() != b_row.size()) {
    throw std::invalid_argument("correction_weights: b_row and H column mismatch");
  }

  Vector d(rows);
  for (Index r = 0; r < rows; ++r) d[r] = (b_row.transpose() - H.row(r)).squaredNorm();

  std::vector<double> pair_dist;
  pair_dist.reserve(static_cast<std::size_t>(rows * (rows - 1) / 2));
  for (Index r = 0; r < rows; ++r) {
    for (Index s = r + 1; s < rows; ++s) pair_dist.push_back((H.row(r) - H.row(s)).norm());
  }
  std::sort(pair_dist.begin(), pair_dist.end());
  const std::size_t mid = pair_dist.size() / 2;
  const double bandwidth = pair_dist.size() % 2 == 1
                               ? pair_dist[mid]
                               : 0.5 * (pair_dist[mid - 1] + pair_dist[mid]);

  Vector s(rows);
  if (bandwidth == 0.0) {
    s.setConstant(1.0 / static_cast<double>(rows));
  } else {
    const Vector v = -d / (bandwidth * bandwidth);
    const Vector e = (v.array() - v.maxCoeff()).exp();
    s = e / e.sum();
  }
  return lambda * (Vector::Ones(rows) - s);
}

/// Truncated Fourier circadian signal; t in hours.
inline double circadian(double t, const std::vector<Harmonic>& harmonics, double eps1 = 0.0) {
  double q = eps1;
  for (const auto& h : harmonics) {
    q += h.amplitude * std::sin(2.0 * std::numbers::pi * h.frequency * t);
  }
  return q;
}

/// ell = ell0 + delta_ell1 * (sum_i alpha_i * (B_i y_i) + eps2).
inline double exogenous_drive(const std::array<double, 3>& by, const HealthModelParams& params,
                              double eps2 = 0.0) {
  double m = eps2;
  for (int i = 0; i < 3; ++i) m += params.alpha[static_cast<std::size_t>(i)] * by[static_cast<std::size_t>(i)];
  return params.ell0 + params.delta_ell1 * m;
}

/// One source of monitoring data frozen at a node: the current day's feature
/// row plus the historical rows and their labels.
struct SourceSnapshot {
  Vector b_row;           // m_i
  Matrix history;         // history days x m_i
  Vector history_labels;  // history days
};

struct StepDiagnostics {
  double ell_mean = 0.0;
  int solves = 0;
  int non_converged = 0;
};

using WarmSlots = std::array<std::vector<Vector>, 3>;  // [source][subsample draw]

/// One tracking update: draws history subsamples, solves the three
/// box-constrained quadratic programs per draw, averages the exogenous
/// drives, and applies the projected update onto [0, 2].
inline double health_step(double x, double t, const std::array<SourceSnapshot, 3>& sources,
                          const HealthModelParams& params, const SolverConfig& solver_config,
                          const RngStream& subsample_stream, std::uint64_t node_key,
                          StepDiagnostics* diag = nullptr, WarmSlots* warm = nullptr) {
  params.validate();
  if (x < 0.0 || x > 2.0) throw std::invalid_argument("health_step: x must lie in [0, 2]");
  const auto pool = static_cast<Index>(sources[0].history.rows());
  for (const auto& src : sources) {
    if (src.history.rows() != pool || src.history.rows() != src.history_labels.size()) {
      throw std::invalid_argument("health_step: inconsistent history shapes");
    }
  }

  // Row draws are sequential so the stream layout is independent of the
  // solver thread count.
  std::vector<std::vector<int>> draws(kSubsampleDraws);
  for (int iota = 0; iota < kSubsampleDraws; ++iota) {
    draws[static_cast<std::size_t>(iota)] = rng::sample_without_replacement(
        static_cast<int>(pool), std::min<int>(kSubsampleRows, static_cast<int>(pool)),
        subsample_stream, node_key, static_cast<std::uint64_t>(iota));
  }

  if (warm != nullptr) {
    for (auto& slot : *warm) slot.resize(kSubsampleDraws);
  }

  std::array<std::array<double, 3>, kSubsampleDraws> by{};
  int non_converged = 0;

#ifdef _OPENMP
#pragma omp parallel for collapse(2) schedule(dynamic, 1) reduction(+ : non_converged)
#endif
  for (int iota = 0; iota < kSubsampleDraws; ++iota) {
    for (int i = 0; i < 3; ++i) {
      const auto& src = sources[static_cast<std::size_t>(i)];
      const auto& rows = draws[static_cast<std::size_t>(iota)];
      const auto m = src.b_row.size();
      const auto count = static_cast<Index>(rows.size());

      Matrix H(count, m);
      Vector c(count);
      for (Index r = 0; r < count; ++r) {
        H.row(r) = src.history.row(rows[static_cast<std::size_t>(r)]);
        c[r] = src.history_labels[rows[static_cast<std::size_t>(r)]];
      }
      const Vector N = correction_weights(src.b_row, H, params.lambda[static_cast<std::size_t>(i)]);

      BoxQuadraticProblem qp;
      qp.feasible = ConvexSet::ScaledSymmetricBox(params.box_radius, m);
      qp.blocks.push_back(ResidualBlock{src.b_row.transpose(), (Vector(1) << x).finished(),
                                        params.rho[static_cast<std::size_t>(i)]});
      qp.blocks.push_back(ResidualBlock{H, N * x + c, 1.0});

      const Vector* start = nullptr;
      if (warm != nullptr) {
        const Vector& prev = (*warm)[static_cast<std::size_t>(i)][static_cast<std::size_t>(iota)];
        if (prev.size() == m) start = &prev;
      }
      const InnerSolution sol = solve_box_quadratic(qp, solver_config, start);
      if (!sol.converged) ++non_converged;
      by[static_cast<std::size_t>(iota)][static_cast<std::size_t>(i)] = src.b_row.dot(sol.y);
      if (warm != nullptr) {
        (*warm)[static_cast<std::size_t>(i)][static_cast<std::size_t>(iota)] = sol.y;
      }
    }
  }

  double ell_mean = 0.0;
  for (int iota = 0; iota < kSubsampleDraws; ++iota) {
    ell_mean += exogenous_drive(by[static_cast<std::size_t>(iota)], params);
  }
  ell_mean /= static_cast<double>(kSubsampleDraws);

  if (diag != nullptr) {
    diag->ell_mean = ell_mean;
    diag->solves = 3 * kSubsampleDraws;
    diag->non_converged = non_converged;
  }
  return clamp_state(x - params.A * x - params.p + circadian(t, params.harmonics, params.eps1) +
                     ell_mean);
}

/// Ground-truth recursion driven directly by the labels eta_i of the day.
inline double true_step(double x, double t, const std::array<double, 3>& eta,
                        const HealthModelParams& params) {
  if (x < 0.0 || x > 2.0) throw std::invalid_argument("true_step: x must lie in [0, 2]");
  double drive = params.ell0;
  for (int i = 0; i < 3; ++i) {
    drive += params.delta_ell1 * params.alpha[static_cast<std::size_t>(i)] *
             eta[static_cast<std::size_t>(i)];
  }
  return clamp_state(x - params.A * x - params.p + circadian(t, params.harmonics, params.eps1) +
                     drive);
}

/// Three-way split of [0, 2]: low band maps to 0, middle to 1, high to 2.
inline int discretize(double x) {
  if (x <= 2.0 / 3.0) return 0;
  if (x < 4.0 / 3.0) return 1;
  return 2;
}

struct HealthRunConfig {
  int downsample = 12;  // 1 keeps the full 5-second cadence
  bool redraw_per_node = true;
  HealthModelParams params;
  SolverConfig solver;

  int steps_per_day() const { return kStepsPerDayFull / downsample; }
  double dt_hours() const { return 24.0 / static_cast<double>(steps_per_day()); }

  void validate() const {
    if (downsample < 1 || kStepsPerDayFull % downsample != 0) {
      throw std::invalid_argument("HealthRunConfig: downsample must divide 17280");
    }
    params.validate();
  }
};

struct DayTrajectory {
  int person = 0;
  int day = 0;  // test-day index, 0-based
  std::vector<double> t_hours;
  std::vector<double> x_pred;
  std::vector<double> x_true;
  std::vector<int> class_pred;
  std::vector<int> class_true;
  int non_converged = 0;
};

namespace detail {

inline SourceSnapshot snapshot_at(const Population& pop, int person, Source source, int test_day,
                                  int step, int steps_per_day) {
  const int m = source_dim(source);
  SourceSnapshot snap;
  snap.b_row = standardize(
      source, source_features(pop, person, source, kHistoryDays + test_day, step, steps_per_day));
  snap.history.resize(kHistoryDays, m);
  snap.history_labels.resize(kHistoryDays);
  for (int d = 0; d < kHistoryDays; ++d) {
    snap.history.row(d) =
        standardize(source, source_features(pop, person, source, d, step, steps_per_day))
            .transpose();
    snap.history_labels[d] = label_value(pop, person, d, step, steps_per_day);
  }
  return snap;
}

}  // namespace detail

/// Runs both recursions for one (person, test day): the tracking update fed
/// by generated monitoring data and the label-driven reference.
inline DayTrajectory simulate_day(const Population& pop, int person, int test_day,
                                  const HealthRunConfig& config) {
  config.validate();
  if (person < 0 || person >= pop.num_persons()) {
    throw std::invalid_argument("simulate_day: person index out of range");
  }
  if (test_day < 0 || test_day >= pop.test_days) {
    throw std::invalid_argument("simulate_day: test day out of range");
  }

  const int steps = config.steps_per_day();
  const double dt = config.dt_hours();
  const int day = kHistoryDays + test_day;
  const RngStream subsample_stream{pop.seed, keys::kSubsample};

  DayTrajectory out;
  out.person = person;
  out.day = test_day;
  out.t_hours.reserve(static_cast<std::size_t>(steps) + 1);
  out.x_pred.reserve(static_cast<std::size_t>(steps) + 1);
  out.x_true.reserve(static_cast<std::size_t>(steps) + 1);

  double x = clamp_state(label_value(pop, person, day, 0, steps));
  double x_true = x;
  WarmSlots warm;

  const auto record = [&](double t, double xp, double xt) {
    out.t_hours.push_back(t);
    out.x_pred.push_back(xp);
    out.x_true.push_back(xt);
    out.class_pred.push_back(discretize(xp));
    out.class_true.push_back(discretize(xt));
  };
  record(0.0, x, x_true);

  for (int nu = 0; nu < steps; ++nu) {
    const double t = dt * static_cast<double>(nu);
    const std::array<SourceSnapshot, 3> sources = {
        detail::snapshot_at(pop, person, Source::Watch, test_day, nu, steps),
        detail::snapshot_at(pop, person, Source::Insole, test_day, nu, steps),
        detail::snapshot_at(pop, person, Source::Emr, test_day, nu, steps),
    };
    const int key_step = config.redraw_per_node ? nu : 0;
    const std::uint64_t node_key =
        (static_cast<std::uint64_t>(person) * 128 + static_cast<std::uint64_t>(day)) *
            (1ULL << 20) +
        static_cast<std::uint64_t>(key_step);

    StepDiagnostics diag;
    x = health_step(x, t, sources, config.params, config.solver, subsample_stream, node_key,
                    &diag, &warm);
    out.non_converged += diag.non_converged;

    const double eta = label_value(pop, person, day, nu, steps);
    x_true = true_step(x_true, t, {eta, eta, eta}, config.params);
    record(dt * static_cast<double>(nu + 1), x, x_true);
  }
  return out;
}

}  // namespace dsvio::health
