// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] is the path of the command-line binary (criterion 8).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "dsvio/benchmark.hpp"
#include "dsvio/examples.hpp"
#include "dsvio/health/metrics.hpp"
#include "dsvio/health/model.hpp"
#include "dsvio/scheme.hpp"

using namespace dsvio;

namespace {

int failures = 0;

class Criterion {
 public:
  explicit Criterion(std::string name) : name_(std::move(name)) {}

  void require(bool ok, const std::string& detail) {
    if (!ok) {
      ok_ = false;
      details_.push_back(detail);
    }
  }

  void finish(std::chrono::steady_clock::time_point start, long budget_ms = 0) {
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    if (budget_ms > 0 && elapsed > budget_ms) {
      ok_ = false;
      details_.push_back("runtime " + std::to_string(elapsed) + " ms exceeds budget " +
                         std::to_string(budget_ms) + " ms");
    }
    std::cout << (ok_ ? "PASS" : "FAIL") << " " << name_ << " (" << elapsed << " ms)\n";
    for (const auto& d : details_) std::cout << "       " << d << "\n";
    if (!ok_) ++failures;
  }

 private:
  std::string name_;
  bool ok_ = true;
  std::vector<std::string> details_;
};

double max_node_error_vs_flow(Index N) {
  const DsvioProblem problem = decay_problem();
  SchemeConfig config;
  config.T = 1.0;
  config.N = N;
  const auto [traj, records] =
      run_scheme(problem, Vector::Ones(1), config, SolverConfig{}, SchemeMode::Exact);
  double err = 0.0;
  for (Index nu = 0; nu <= N; ++nu) {
    const double t = traj.node_time(nu);
    err = std::max(err, std::abs(traj.states[static_cast<std::size_t>(nu)][0] - std::exp(-t)));
  }
  return err;
}

void criterion_1_exact_closed_form() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 1: exact-mode closed form and first-order error decay");

  const DsvioProblem problem = decay_problem();
  SchemeConfig config;
  config.T = 1.0;
  config.N = 10;
  const auto [traj, records] =
      run_scheme(problem, Vector::Ones(1), config, SolverConfig{}, SchemeMode::Exact);
  const double xN = traj.states.back()[0];
  c.require(std::abs(xN - std::pow(0.9, 10)) <= 1e-12,
            "x_N = " + format_number(xN) + " vs 0.9^10");

  const double e100 = max_node_error_vs_flow(100);
  const double e1000 = max_node_error_vs_flow(1000);
  const double ratio = e100 / e1000;
  c.require(ratio >= 8.0 && ratio <= 12.0,
            "error ratio N=100 / N=1000 = " + format_number(ratio));
  c.finish(start, 1000);
}

void criterion_2_projection_axioms() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 2: projection axiom suite");

  const RngStream stream{111, 61};
  const Index dim = 3;
  const std::vector<ConvexSet> variants = {
      ConvexSet::WholeSpace(dim),
      ConvexSet::NonnegativeOrthant(dim),
      ConvexSet::Box(Vector::Constant(dim, -1.0), Vector::Constant(dim, 0.5)),
      ConvexSet::ScaledSymmetricBox(2.0, dim),
  };
  std::uint64_t node = 0;
  const auto rand_vec = [&](std::uint64_t n) {
    Vector v(dim);
    for (Index i = 0; i < dim; ++i) {
      v[i] = 8.0 * (rng::uniform(stream, n, 0, static_cast<std::uint64_t>(i)) - 0.5);
    }
    return v;
  };
  for (const auto& set : variants) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Vector x = rand_vec(node++);
      const Vector y = rand_vec(node++);
      const Vector px = project(set, x);
      const Vector py = project(set, y);
      if (!((project(set, px).array() == px.array()).all())) {
        c.require(false, "idempotence violated");
      }
      c.require((px - py).norm() <= (x - y).norm() + 1e-15, "nonexpansiveness violated");
      c.require((x - px).dot(py - px) <= 1e-10, "variational inequality violated");
    }
  }
  c.finish(start, 5000);
}

void criterion_3_inner_solver_certification() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 3: inner-solver certification");

  const RngStream stream{222, 62};
  SolverConfig config;
  bench::ExampleInstance inst;
  const DsvioProblem shaped = bench::build_instance(inst);

  // 20 instances drawn through the example's own builders
  for (int trial = 0; trial < 20; ++trial) {
    const auto node = static_cast<std::uint64_t>(trial);
    const double t = rng::uniform(stream, node, 0, 0);
    const Vector xi = (Vector(2) << rng::normal(stream, node, 1, 0, 1.0, 0.5),
                       2.0 * rng::uniform(stream, node, 2, 0) - 1.0)
                          .finished();
    const Vector x = (Vector(2) << 2.0 * rng::uniform(stream, node, 3, 0),
                      2.0 * rng::uniform(stream, node, 4, 0))
                         .finished();
    for (const auto& builder : shaped.inner_builders) {
      const InnerProblem p = builder(t, xi, x);
      const auto sol = solve(p, config);
      c.require(sol.converged && sol.kkt_residual <= 1e-6 && sol.iterations <= 5000,
                "l1 instance not certified: residual " + format_number(sol.kkt_residual));
    }
  }

  // diagonal closed form
  const Vector d = (Vector(4) << 0.25, 1.0, 2.0, 5.0).finished();
  const Vector cs = (Vector(4) << 1.5, -0.4, 0.02, -2.0).finished();
  L1LeastSquaresProblem diag{Matrix(d.asDiagonal()), cs, 0.1,
                             ConvexSet::ScaledSymmetricBox(3.0, 4)};
  const auto dsol = solve_l1(diag, config);
  for (Index i = 0; i < 4; ++i) {
    const double raw = d[i] * cs[i];
    const double st = std::copysign(std::max(std::abs(raw) - diag.mu, 0.0), raw) / (d[i] * d[i]);
    const double expected = std::clamp(st, -3.0, 3.0);
    c.require(std::abs(dsol.y[i] - expected) <= 1e-8, "diagonal closed form mismatch");
  }

  // box quadratic against grid search, m <= 3
  for (int trial = 0; trial < 5; ++trial) {
    const Index m = 1 + trial % 3;
    const auto node = static_cast<std::uint64_t>(700 + trial);
    Matrix G(2, m);
    Vector rhs(2);
    for (Index r = 0; r < 2; ++r) {
      rhs[r] = 2.0 * rng::uniform(stream, node, 50, static_cast<std::uint64_t>(r)) - 1.0;
      for (Index k = 0; k < m; ++k) {
        G(r, k) = 2.0 * rng::uniform(stream, node, static_cast<std::uint64_t>(r),
                                     static_cast<std::uint64_t>(k)) -
                  1.0;
      }
    }
    BoxQuadraticProblem qp;
    qp.feasible = ConvexSet::ScaledSymmetricBox(1.0, m);
    qp.blocks.push_back(ResidualBlock{G, rhs, 1.0});
    const auto sol = solve_box_quadratic(qp, config);

    Vector lo = qp.feasible.lower();
    Vector hi = qp.feasible.upper();
    Vector best = 0.5 * (lo + hi);
    double best_obj = objective(qp, best);
    for (int pass = 0; pass < 12; ++pass) {
      std::vector<int> idx(static_cast<std::size_t>(m), 0);
      Vector y(m);
      while (true) {
        for (Index k = 0; k < m; ++k) {
          y[k] = lo[k] + (hi[k] - lo[k]) * idx[static_cast<std::size_t>(k)] / 20.0;
        }
        const double obj = objective(qp, y);
        if (obj < best_obj) {
          best_obj = obj;
          best = y;
        }
        Index k = 0;
        while (k < m && ++idx[static_cast<std::size_t>(k)] == 21) {
          idx[static_cast<std::size_t>(k)] = 0;
          ++k;
        }
        if (k == m) break;
      }
      const Vector radius = (hi - lo) / 20.0;
      lo = (best - 2.0 * radius).cwiseMax(qp.feasible.lower());
      hi = (best + 2.0 * radius).cwiseMin(qp.feasible.upper());
    }
    c.require(sol.converged && (sol.y - best).lpNorm<Eigen::Infinity>() <= 1e-3,
              "box quadratic vs grid oracle mismatch");
  }
  c.finish(start, 30000);
}

void criterion_4_discrete_feasibility() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 4: exact discrete feasibility");

  const RngStream meta{333, 63};
  for (int run = 0; run < 100; ++run) {
    const auto node = static_cast<std::uint64_t>(run);
    const Index n = 2;
    DsvioProblem problem;
    problem.n = n;
    if (run % 2 == 0) {
      problem.X = ConvexSet::NonnegativeOrthant(n);
    } else {
      Vector lo(n), hi(n);
      for (Index i = 0; i < n; ++i) {
        lo[i] = -2.0 * rng::uniform(meta, node, 0, static_cast<std::uint64_t>(i));
        hi[i] = 2.0 * rng::uniform(meta, node, 1, static_cast<std::uint64_t>(i));
      }
      problem.X = ConvexSet::Box(lo, hi);
    }
    const double a11 = 2.0 * rng::uniform(meta, node, 2, 0) - 1.0;
    const double a22 = 2.0 * rng::uniform(meta, node, 2, 1) - 1.0;
    problem.phi1 = [a11, a22](double, const Vector& xi, const Vector& x) -> Vector {
      return (Vector(2) << a11 * x[0] + xi[0], a22 * x[1] - xi[0]).finished();
    };
    problem.kernel.coordinates = {DistributionSpec::Normal(0.0, 1.0)};

    Vector x0(n);
    for (Index i = 0; i < n; ++i) x0[i] = 4.0 * rng::uniform(meta, node, 3, static_cast<std::uint64_t>(i)) - 2.0;
    x0 = project(problem.X, x0);

    SchemeConfig config;
    config.T = 1.0;
    config.N = 5 + run % 23;  // h ranges over (0, 1]
    config.J = 1 + run % 7;
    config.stream = RngStream{900 + static_cast<std::uint64_t>(run), 64};
    const auto [traj, records] =
        run_scheme(problem, x0, config, SolverConfig{}, SchemeMode::SAA);
    const auto report = feasibility_report(traj, problem.X);
    c.require(report.max_distance == 0.0,
              "run " + std::to_string(run) + ": max distance " +
                  format_number(report.max_distance));
  }
  c.finish(start);
}

double spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
  const auto rank = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0.0;
      for (std::size_t j = 0; j < v.size(); ++j) less += v[j] < v[i] ? 1.0 : 0.0;
      r[i] = less + 1.0;
    }
    return r;
  };
  const auto rx = rank(xs);
  const auto ry = rank(ys);
  double d2 = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  const double n = static_cast<double>(rx.size());
  return 1.0 - 6.0 * d2 / (n * (n * n - 1.0));
}

void criterion_5_grid_trends() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 5: accuracy-grid trends at desk scale");

  const std::vector<double> sigmas = {0.1, 0.5, 1.5};
  const std::vector<Index> Js = {30, 100, 200, 500};
  const auto grid = bench::experiment_grid(sigmas, Js, 10, 2000, 20240824);

  const auto cell = [&](double sigma, Index J) -> const bench::ResidualMetrics& {
    for (const auto& m : grid.averaged) {
      if (m.sigma == sigma && m.J == J) return m;
    }
    throw std::logic_error("cell not found");
  };
  const auto& low = cell(0.1, 500);
  const auto& high = cell(1.5, 30);
  c.require(low.R1 < high.R1, "R1: low-noise large-J " + format_number(low.R1) +
                                  " vs high-noise small-J " + format_number(high.R1));
  c.require(low.R2 < high.R2, "R2: low-noise large-J " + format_number(low.R2) +
                                  " vs high-noise small-J " + format_number(high.R2));

  std::vector<double> j_vals, r1_vals;
  for (Index J : Js) {
    j_vals.push_back(static_cast<double>(J));
    r1_vals.push_back(cell(0.5, J).R1);
  }
  const double rho = spearman(j_vals, r1_vals);
  c.require(rho <= -0.8, "Spearman(R1, J) at sigma 0.5 = " + format_number(rho));
  c.finish(start, 600000);
}

void criterion_6_saa_consistency() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 6: SAA consistency in the batch size");

  const DsvioProblem problem = decay_problem();
  SchemeConfig exact_config;
  exact_config.T = 1.0;
  exact_config.N = 1000;
  const auto [exact, er] =
      run_scheme(problem, Vector::Ones(1), exact_config, SolverConfig{}, SchemeMode::Exact);

  std::vector<double> medians;
  for (Index J : {Index{100}, Index{1000}, Index{10000}}) {
    std::vector<double> deviations;
    for (int rep = 0; rep < 20; ++rep) {
      SchemeConfig config = exact_config;
      config.J = J;
      config.stream = RngStream{20240824, 7000 + static_cast<std::uint64_t>(J) * 100 +
                                              static_cast<std::uint64_t>(rep)};
      const auto [traj, records] =
          run_scheme(problem, Vector::Ones(1), config, SolverConfig{}, SchemeMode::SAA);
      double dev = 0.0;
      for (Index nu = 0; nu <= config.N; ++nu) {
        dev = std::max(dev, std::abs(traj.states[static_cast<std::size_t>(nu)][0] -
                                     exact.states[static_cast<std::size_t>(nu)][0]));
      }
      deviations.push_back(dev);
    }
    std::sort(deviations.begin(), deviations.end());
    medians.push_back(0.5 * (deviations[9] + deviations[10]));
  }
  c.require(medians[0] > medians[1] && medians[1] > medians[2],
            "medians " + format_number(medians[0]) + ", " + format_number(medians[1]) + ", " +
                format_number(medians[2]));
  c.finish(start);
}

void criterion_7_health_pipeline() {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 7: health pipeline properties and desk-scale run");

  using namespace dsvio::health;

  // weight sum identity
  {
    const RngStream stream{444, 65};
    Matrix H(50, 14);
    for (Index r = 0; r < 50; ++r) {
      for (Index k = 0; k < 14; ++k) {
        H(r, k) = rng::uniform(stream, static_cast<std::uint64_t>(r), 0,
                               static_cast<std::uint64_t>(k));
      }
    }
    Vector b(14);
    for (Index k = 0; k < 14; ++k) b[k] = rng::uniform(stream, 777, 0, static_cast<std::uint64_t>(k));
    const Vector w = correction_weights(b, H, 0.5);
    c.require(std::abs(w.sum() - 0.5 * 49.0) <= 1e-10,
              "weight sum " + format_number(w.sum()));
  }

  // hand-computed confusion matrix
  {
    std::vector<int> truth, pred;
    const int counts[3][3] = {{5, 1, 0}, {1, 3, 1}, {0, 1, 8}};
    for (int t = 0; t < 3; ++t) {
      for (int p = 0; p < 3; ++p) {
        for (int k = 0; k < counts[t][p]; ++k) {
          truth.push_back(t);
          pred.push_back(p);
        }
      }
    }
    const auto [cm, metrics] = evaluate(truth, pred);
    c.require(cm.total() == 20, "confusion total");
    c.require(cm.row_sum(0) == 6 && cm.row_sum(1) == 5 && cm.row_sum(2) == 9,
              "confusion row sums");
    c.require(metrics[0].accuracy == 0.9, "accuracy(0)");
    c.require(metrics[0].precision == 5.0 / 6.0, "precision(0)");
    c.require(metrics[0].recall == 5.0 / 6.0, "recall(0)");
  }

  // oracle-mode tracking
  {
    HealthModelParams params;
    params.harmonics.clear();
    params.rho = {1e4, 1e4, 1e4};
    params.lambda = {0.0, 0.0, 0.0};
    std::array<SourceSnapshot, 3> sources;
    const RngStream gen{3, 33};
    for (int i = 0; i < 3; ++i) {
      auto& src = sources[static_cast<std::size_t>(i)];
      src.b_row = (Vector(2) << 1.0, 0.0).finished();
      src.history.resize(4, 2);
      for (Index r = 0; r < 4; ++r) {
        for (Index k = 0; k < 2; ++k) {
          src.history(r, k) = 0.01 * rng::uniform(gen, static_cast<std::uint64_t>(i),
                                                  static_cast<std::uint64_t>(r),
                                                  static_cast<std::uint64_t>(k));
        }
      }
      src.history_labels = Vector::Zero(4);
    }
    const RngStream stream{19, 55};
    double x = 0.01, x_ref = 0.01;
    WarmSlots warm;
    bool tracked = true;
    for (int nu = 0; nu < 120; ++nu) {
      x = health_step(x, 0.0, sources, params, SolverConfig{}, stream,
                      static_cast<std::uint64_t>(nu), nullptr, &warm);
      x_ref = clamp_state(x_ref - params.A * x_ref - params.p +
                          exogenous_drive({x_ref, x_ref, x_ref}, params));
      if (nu >= 100 && std::abs(x - x_ref) > 1e-2) tracked = false;
    }
    c.require(tracked, "oracle-mode tracking error above 1e-2 after burn-in");
  }

  // end-to-end desk-scale run: 2 persons x 2 days, 1-in-12 downsampling
  {
    const auto pop = generate_population(2, 2, RngStream{20240824, 0});
    HealthRunConfig config;  // desk-scale defaults
    std::vector<int> truth, pred;
    bool confined = true;
    for (int person = 0; person < 2; ++person) {
      for (int day = 0; day < 2; ++day) {
        const auto traj = simulate_day(pop, person, day, config);
        for (std::size_t k = 0; k < traj.x_pred.size(); ++k) {
          if (traj.x_pred[k] < 0.0 || traj.x_pred[k] > 2.0 || traj.x_true[k] < 0.0 ||
              traj.x_true[k] > 2.0) {
            confined = false;
          }
        }
        truth.insert(truth.end(), traj.class_true.begin(), traj.class_true.end());
        pred.insert(pred.end(), traj.class_pred.begin(), traj.class_pred.end());
      }
    }
    c.require(confined, "a state left [0, 2]");
    const auto [cm, metrics] = evaluate(truth, pred);
    c.require(cm.total() == static_cast<long>(truth.size()), "confusion total mismatch");
    long diag_sum = 0;
    for (int i = 0; i < 3; ++i) diag_sum += cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    std::cout << "       desk-scale health run: " << truth.size() << " points, agreement "
              << format_number(static_cast<double>(diag_sum) / static_cast<double>(cm.total()))
              << "\n";
    for (const auto& m : metrics) {
      std::ostringstream line;
      line << "       class " << m.cls;
      const auto put = [&](const char* name, const std::optional<double>& v) {
        line << " " << name << "=" << (v ? format_number(*v) : std::string("n/a"));
      };
      put("acc", m.accuracy);
      put("prec", m.precision);
      put("rec", m.recall);
      put("spec", m.specificity);
      put("f1", m.f1);
      std::cout << line.str() << "\n";
    }
  }
  c.finish(start, 300000);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// The manifest records the output directory, which necessarily differs
// between the twin runs; every other line must match byte for byte.
std::string manifest_without_out_dir(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::ostringstream kept;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("output.dir", 0) == 0) continue;
    kept << line << "\n";
  }
  return kept.str();
}

void criterion_8_determinism(const std::string& cli) {
  const auto start = std::chrono::steady_clock::now();
  Criterion c("criterion 8: bitwise-identical re-runs of every command");

  const auto base = std::filesystem::temp_directory_path() / "dsvio_acceptance";
  std::filesystem::remove_all(base);
  std::filesystem::create_directories(base);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "simulate --seed 5 --set problem.kind=decay --set problem.N=50 --set problem.J=25"},
      {"simulate-tracking", "simulate --seed 5 --set problem.kind=tracking --set problem.N=40 --set problem.J=10"},
      {"bench4", "bench4 --seed 5 --set bench4.sigmas=0.5 --set bench4.Js=10,20 --set bench4.reps=2 --set bench4.N=40"},
      {"gen-data", "gen-data --seed 5 --set health.persons=1 --set health.days=1"},
      {"health", "health --seed 5 --set health.persons=1 --set health.days=1 --set health.downsample=1440"},
  };

  for (const auto& [name, command] : commands) {
    const auto dir_a = base / (name + "_a");
    const auto dir_b = base / (name + "_b");
    for (const auto& dir : {dir_a, dir_b}) {
      const std::string full = cli + " " + command + " --out " + dir.string() + " > /dev/null 2>&1";
      const int rc = std::system(full.c_str());
      c.require(rc == 0, name + ": exit status " + std::to_string(rc));
    }
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir_a)) {
      ++files;
      const auto twin = dir_b / entry.path().filename();
      c.require(std::filesystem::exists(twin),
                name + ": missing " + entry.path().filename().string());
      if (std::filesystem::exists(twin)) {
        if (entry.path().filename() == "manifest.txt") {
          c.require(manifest_without_out_dir(entry.path()) == manifest_without_out_dir(twin),
                    name + ": manifest mismatch beyond the output directory");
        } else {
          c.require(read_file(entry.path()) == read_file(twin),
                    name + ": byte mismatch in " + entry.path().filename().string());
        }
      }
    }
    c.require(files > 0, name + ": produced no files");
  }
  std::filesystem::remove_all(base);
  c.finish(start);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli-binary>\n";
    return 2;
  }
  criterion_1_exact_closed_form();
  criterion_2_projection_axioms();
  criterion_3_inner_solver_certification();
  criterion_4_discrete_feasibility();
  criterion_5_grid_trends();
  criterion_6_saa_consistency();
  criterion_7_health_pipeline();
  criterion_8_determinism(argv[1]);
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed\n";
    return 1;
  }
  std::cout << "all acceptance criteria passed\n";
  return 0;
}
