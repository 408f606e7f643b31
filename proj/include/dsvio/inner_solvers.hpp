#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <utility>
#include <variant>
#include <vector>

#include "dsvio/convex_set.hpp"

namespace dsvio {

/// min 0.5 ||H y - c||^2 + mu ||y||_1  over a box-like feasible set.
struct L1LeastSquaresProblem {
  Matrix H;
  Vector c;
  double mu = 0.0;
  ConvexSet feasible = ConvexSet::WholeSpace(0);
};

struct ResidualBlock {
  Matrix G;
  Vector d;
  double weight;
};

/// min sum_b (w_b / 2) ||G_b y - d_b||^2 over a box.
struct BoxQuadraticProblem {
  std::vector<ResidualBlock> blocks;
  ConvexSet feasible = ConvexSet::WholeSpace(0);
};

using InnerProblem = std::variant<L1LeastSquaresProblem, BoxQuadraticProblem>;

struct SolverConfig {
  int max_iter = 5000;
  double tol = 1e-8;
  bool restart = true;
};

struct InnerSolution {
  Vector y;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool converged = false;
};

inline Vector soft_threshold(const Vector& v, double mu) {
  return v.array().sign() * (v.array().abs() - mu).max(0.0);
}

/// Cross-call memory of optimal support patterns for l1 least-squares
/// problems of one parametric family. Consecutive instances tend to share a
/// handful of active sets, so replaying a remembered pattern reduces a solve
/// to one small least-squares system plus a residual certificate. Entries
/// are kept most-recently-confirmed first. Callers that share a cache must
/// call the solver sequentially; the cache is not synchronized.
struct SupportCache {
  // per-coordinate codes: 0 zero, +1/-1 free with that sign,
  // +2 pinned at the upper bound, -2 pinned at the lower bound
  std::vector<std::vector<std::int8_t>> entries;

  static constexpr std::size_t kMaxEntries = 48;
  static constexpr std::size_t kMaxTries = 12;

  void promote(std::size_t k) {
    if (k == 0) return;
    auto pattern = std::move(entries[k]);
    entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(k));
    entries.insert(entries.begin(), std::move(pattern));
  }

  void confirm(std::vector<std::int8_t> pattern) {
    for (std::size_t k = 0; k < entries.size(); ++k) {
      if (entries[k] == pattern) {
        promote(k);
        return;
      }
    }
    entries.insert(entries.begin(), std::move(pattern));
    if (entries.size() > kMaxEntries) entries.pop_back();
  }
};

/// Largest eigenvalue of H^T H by power iteration on the Gram matrix.
/// An all-zero matrix maps to 1e-16 so that 1/L stays finite.
inline double lipschitz_estimate(const Matrix& H) {
  const Index m = H.cols();
  const Matrix gram = H.transpose() * H;
  if (gram.cwiseAbs().maxCoeff() == 0.0) return 1e-16;
  Vector v = Vector::Ones(m);
  for (Index i = 0; i < m; ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector w = gram * v;
    const double norm = w.norm();
    if (norm == 0.0) return 1e-16;
    v = w / norm;
    const double next = v.dot(gram * v);
    if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

/// Largest eigenvalue of a symmetric PSD matrix, same iteration.
inline double spectral_radius_psd(const Matrix& Q) {
  if (Q.cwiseAbs().maxCoeff() == 0.0) return 1e-16;
  Vector v = Vector::Ones(Q.rows());
  for (Index i = 0; i < Q.rows(); ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Vector w = Q * v;
    const double norm = w.norm();
    if (norm == 0.0) return 1e-16;
    v = w / norm;
    const double next = v.dot(Q * v);
    if (std::abs(next - lambda) <= 1e-14 * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

namespace detail {

// Assembled smooth part 0.5 y'Qy - b'y + const of a BoxQuadraticProblem.
struct QuadraticForm {
  Matrix Q;
  Vector b;
  double constant = 0.0;

  double value(const Vector& y) const { return 0.5 * y.dot(Q * y) - b.dot(y) + constant; }
  Vector gradient(const Vector& y) const { return Q * y - b; }
};

inline QuadraticForm assemble(const BoxQuadraticProblem& p) {
  if (p.blocks.empty()) {
    throw std::invalid_argument("BoxQuadraticProblem: needs at least one residual block");
  }
  const Index m = p.blocks.front().G.cols();
  QuadraticForm f{Matrix::Zero(m, m), Vector::Zero(m), 0.0};
  for (const auto& blk : p.blocks) {
    if (blk.G.cols() != m || blk.G.rows() != blk.d.size()) {
      throw std::invalid_argument("BoxQuadraticProblem: inconsistent block dimensions");
    }
    if (blk.weight <= 0.0) throw std::invalid_argument("BoxQuadraticProblem: weight must be > 0");
    f.Q.noalias() += blk.weight * blk.G.transpose() * blk.G;
    f.b.noalias() += blk.weight * blk.G.transpose() * blk.d;
    f.constant += 0.5 * blk.weight * blk.d.squaredNorm();
  }
  return f;
}

// Coordinate bounds implied by a box-like feasible set; infinities where
// the set does not constrain a side.
struct BoxBounds {
  Vector lo;
  Vector hi;
};

inline BoxBounds effective_bounds(const ConvexSet& set, Index m) {
  const double inf = std::numeric_limits<double>::infinity();
  BoxBounds b{Vector::Constant(m, -inf), Vector::Constant(m, inf)};
  switch (set.kind()) {
    case ConvexSet::Kind::NonnegativeOrthant:
      b.lo.setZero();
      break;
    case ConvexSet::Kind::Box:
    case ConvexSet::Kind::ScaledSymmetricBox:
      b.lo = set.lower();
      b.hi = set.upper();
      break;
    default:
      break;
  }
  return b;
}

inline std::vector<std::int8_t> support_pattern(const Vector& y, const BoxBounds& b) {
  std::vector<std::int8_t> pat(static_cast<std::size_t>(y.size()), 0);
  for (Index i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    if (yi == 0.0) continue;
    if (std::isfinite(b.hi[i]) && std::abs(yi - b.hi[i]) <= 1e-9 * (1.0 + std::abs(b.hi[i]))) {
      pat[static_cast<std::size_t>(i)] = 2;
    } else if (std::isfinite(b.lo[i]) &&
               std::abs(yi - b.lo[i]) <= 1e-9 * (1.0 + std::abs(b.lo[i]))) {
      pat[static_cast<std::size_t>(i)] = -2;
    } else {
      pat[static_cast<std::size_t>(i)] = yi > 0.0 ? 1 : -1;
    }
  }
  return pat;
}

/// Solve an l1 least-squares problem restricted to a support pattern:
/// pinned coordinates sit at their bound, zero coordinates stay zero, and
/// free coordinates solve the reduced normal equations with the l1 term
/// linearized by the pattern's sign. Free coordinates whose reduced solution
/// leaves the box are pinned one at a time and the system is re-solved.
/// Accepts only on a passing residual certificate.
inline bool try_pattern(const L1LeastSquaresProblem& p, const std::vector<std::int8_t>& pat,
                        const BoxBounds& b, double tol, InnerSolution& out) {
  const Index m = p.H.cols();
  if (static_cast<Index>(pat.size()) != m) return false;
  std::vector<Index> free_idx;
  std::vector<Index> pin_idx;
  Vector sign_of = Vector::Zero(m);
  Vector cand = Vector::Zero(m);
  for (Index i = 0; i < m; ++i) {
    switch (pat[static_cast<std::size_t>(i)]) {
      case 1:
        free_idx.push_back(i);
        sign_of[i] = 1.0;
        break;
      case -1:
        free_idx.push_back(i);
        sign_of[i] = -1.0;
        break;
      case 2:
        if (!std::isfinite(b.hi[i])) return false;
        pin_idx.push_back(i);
        cand[i] = b.hi[i];
        break;
      case -2:
        if (!std::isfinite(b.lo[i])) return false;
        pin_idx.push_back(i);
        cand[i] = b.lo[i];
        break;
      default:
        break;
    }
  }
  for (std::size_t pass = 0; pass <= pat.size() && !free_idx.empty(); ++pass) {
    const auto nf = static_cast<Index>(free_idx.size());
    Matrix Hf(p.H.rows(), nf);
    for (Index k = 0; k < nf; ++k) Hf.col(k) = p.H.col(free_idx[static_cast<std::size_t>(k)]);
    Vector resid = p.c;
    for (const Index i : pin_idx) resid.noalias() -= p.H.col(i) * cand[i];
    Vector rhs = Hf.transpose() * resid;
    for (Index k = 0; k < nf; ++k) rhs[k] -= p.mu * sign_of[free_idx[static_cast<std::size_t>(k)]];
    const Vector yf = (Hf.transpose() * Hf).completeOrthogonalDecomposition().solve(rhs);
    double worst = 0.0;
    std::size_t worst_k = 0;
    bool at_lo = false;
    for (Index k = 0; k < nf; ++k) {
      const Index i = free_idx[static_cast<std::size_t>(k)];
      if (yf[k] - b.hi[i] > worst) {
        worst = yf[k] - b.hi[i];
        worst_k = static_cast<std::size_t>(k);
        at_lo = false;
      }
      if (b.lo[i] - yf[k] > worst) {
        worst = b.lo[i] - yf[k];
        worst_k = static_cast<std::size_t>(k);
        at_lo = true;
      }
    }
    if (worst > 0.0) {
      const Index i = free_idx[worst_k];
      cand[i] = at_lo ? b.lo[i] : b.hi[i];
      pin_idx.push_back(i);
      free_idx.erase(free_idx.begin() + static_cast<std::ptrdiff_t>(worst_k));
      continue;
    }
    for (Index k = 0; k < nf; ++k) cand[free_idx[static_cast<std::size_t>(k)]] = yf[k];
    break;
  }
  Vector y = project(p.feasible, cand);
  const Vector grad = p.H.transpose() * (p.H * y - p.c);
  const double res = (y - project(p.feasible, soft_threshold(y - grad, p.mu))).lpNorm<Eigen::Infinity>();
  if (res <= tol) {
    out.y = std::move(y);
    out.iterations = 0;
    out.kkt_residual = res;
    out.converged = true;
    return true;
  }
  return false;
}

}  // namespace detail

/// Natural residual of the prox fixed-point map with unit step.
/// Zero exactly at a minimizer; used both as the solver stopping rule
/// and as an after-the-fact certificate.
inline double kkt_residual(const L1LeastSquaresProblem& p, const Vector& y) {
  if (!contains(p.feasible, y, 1e-12)) {
    throw std::invalid_argument("kkt_residual: y is infeasible");
  }
  const Vector grad = p.H.transpose() * (p.H * y - p.c);
  return (y - project(p.feasible, soft_threshold(y - grad, p.mu))).lpNorm<Eigen::Infinity>();
}

inline double kkt_residual(const BoxQuadraticProblem& p, const Vector& y) {
  if (!contains(p.feasible, y, 1e-12)) {
    throw std::invalid_argument("kkt_residual: y is infeasible");
  }
  const auto f = detail::assemble(p);
  return (y - project(p.feasible, y - f.gradient(y))).lpNorm<Eigen::Infinity>();
}

inline double kkt_residual(const InnerProblem& p, const Vector& y) {
  return std::visit([&](const auto& q) { return kkt_residual(q, y); }, p);
}

inline double objective(const L1LeastSquaresProblem& p, const Vector& y) {
  return 0.5 * (p.H * y - p.c).squaredNorm() + p.mu * y.lpNorm<1>();
}

inline double objective(const BoxQuadraticProblem& p, const Vector& y) {
  double v = 0.0;
  for (const auto& blk : p.blocks) v += 0.5 * blk.weight * (blk.G * y - blk.d).squaredNorm();
  return v;
}

namespace detail {

/// FISTA on 0.5||Hy - c||^2 + mu||y||_1 + indicator(box).
/// Prox order is soft-threshold then clamp. Cold starts are seeded by a
/// ridge-regularized normal-equations solve; a supplied warm start takes
/// precedence. The gradient is affine, so the extrapolated-point gradient
/// is combined from stored gradients: one Gram multiply per iteration.
/// Non-convergence sets the flag; the best iterate by objective is returned.
inline InnerSolution fista_l1(const L1LeastSquaresProblem& p, const SolverConfig& config,
                              const Vector* warm_start = nullptr) {
  if (p.mu <= 0.0) throw std::invalid_argument("solve_l1: mu must be > 0");
  const Index m = p.H.cols();
  const double lip = lipschitz_estimate(p.H);
  const double step = 1.0 / lip;

  const Matrix gram = p.H.transpose() * p.H;
  const Vector htc = p.H.transpose() * p.c;
  const double c_sq = 0.5 * p.c.squaredNorm();
  // smooth part from a cached gradient: 0.5||Hy - c||^2 = 0.5 y.(grad - htc) + 0.5||c||^2
  const auto obj_from_grad = [&](const Vector& y, const Vector& grad) {
    return 0.5 * (y.dot(grad) - htc.dot(y)) + c_sq + p.mu * y.lpNorm<1>();
  };

  Vector x;
  if (warm_start != nullptr) {
    x = project(p.feasible, *warm_start);
  } else {
    const Matrix ridge = gram + p.mu * Matrix::Identity(m, m);
    x = project(p.feasible, soft_threshold(ridge.ldlt().solve(htc), p.mu));
  }
  Vector grad = gram * x - htc;
  Vector x_prev = x;
  Vector grad_prev = grad;
  double t = 1.0;
  Vector best = x;
  double best_obj = obj_from_grad(x, grad);

  const double inf = std::numeric_limits<double>::infinity();
  Vector lo_b = Vector::Constant(m, -inf);
  Vector hi_b = Vector::Constant(m, inf);
  switch (p.feasible.kind()) {
    case ConvexSet::Kind::NonnegativeOrthant:
      lo_b.setZero();
      break;
    case ConvexSet::Kind::Box:
    case ConvexSet::Kind::ScaledSymmetricBox:
      lo_b = p.feasible.lower();
      hi_b = p.feasible.upper();
      break;
    default:
      break;
  }
  // Active-set polish: guess which coordinates sit at zero or at a bound,
  // solve the reduced normal equations on the remaining support exactly, and
  // accept only on a passing residual certificate. Iterate magnitudes crawl
  // on rank-deficient problems, but the gradient slack mu - |grad_i| singles
  // out the support early: it vanishes on free coordinates and stays positive
  // on zeros. The zero set is swept over slack-ordered cut points.
  const auto residual_at = [&](const Vector& y, const Vector& g) {
    return (y - project(p.feasible, soft_threshold(y - g, p.mu))).lpNorm<Eigen::Infinity>();
  };
  const auto sweep = [&](const std::vector<char>& pinned0, const Vector& pin0, const Vector& xc,
                         const Vector& gc) -> std::pair<Vector, double> {
    std::vector<Index> order;  // non-pinned coordinates, most zero-like first
    for (Index i = 0; i < m; ++i) {
      if (!pinned0[static_cast<std::size_t>(i)]) order.push_back(i);
    }
    std::sort(order.begin(), order.end(), [&](Index a, Index b) {
      return std::abs(gc[a]) < std::abs(gc[b]);
    });
    Vector best_cand = xc;
    double best_res = std::numeric_limits<double>::infinity();
    // an l1 least-squares support rarely exceeds rank(H); larger free sets
    // only duplicate candidates already reachable through the pinning loop
    const std::size_t max_free =
        std::min(order.size(), static_cast<std::size_t>(p.H.rows()) + 2);
    for (std::size_t cut = order.size(); cut + 1 > order.size() - max_free; --cut) {
      auto pin_flag = pinned0;
      Vector pin_val = pin0;
      std::vector<Index> free_idx(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
      Vector yf;
      // pin coordinates whose reduced solution leaves the box, then re-solve
      for (std::size_t pass = 0; pass <= order.size() && !free_idx.empty(); ++pass) {
        Vector resid = p.c;
        for (Index i = 0; i < m; ++i) {
          if (pin_flag[static_cast<std::size_t>(i)]) resid -= p.H.col(i) * pin_val[i];
        }
        const auto nf = static_cast<Index>(free_idx.size());
        Matrix Hf(p.H.rows(), nf);
        Vector rhs(nf);
        for (Index k = 0; k < nf; ++k) {
          const Index i = free_idx[static_cast<std::size_t>(k)];
          Hf.col(k) = p.H.col(i);
          // at optimality grad_i = -mu sign(y_i) on the support
          rhs[k] = -p.mu * (gc[i] < 0.0 ? 1.0 : -1.0);
        }
        rhs.noalias() += Hf.transpose() * resid;
        const Matrix gram_ff = Hf.transpose() * Hf;
        yf = gram_ff.completeOrthogonalDecomposition().solve(rhs);
        std::vector<Index> keep;
        for (Index k = 0; k < nf; ++k) {
          const Index i = free_idx[static_cast<std::size_t>(k)];
          if (yf[k] < lo_b[i]) {
            pin_flag[static_cast<std::size_t>(i)] = 1;
            pin_val[i] = lo_b[i];
          } else if (yf[k] > hi_b[i]) {
            pin_flag[static_cast<std::size_t>(i)] = 1;
            pin_val[i] = hi_b[i];
          } else {
            keep.push_back(i);
          }
        }
        if (keep.size() == free_idx.size()) break;
        free_idx = std::move(keep);
      }
      Vector cand = Vector::Zero(m);
      for (Index i = 0; i < m; ++i) {
        if (pin_flag[static_cast<std::size_t>(i)]) cand[i] = pin_val[i];
      }
      for (std::size_t k = 0; k < free_idx.size(); ++k) {
        cand[free_idx[k]] = yf[static_cast<Index>(k)];
      }
      cand = project(p.feasible, cand);
      const Vector grad_c = gram * cand - htc;
      const double res_c = residual_at(cand, grad_c);
      if (res_c < best_res) {
        best_res = res_c;
        best_cand = cand;
      }
      if (res_c <= config.tol) break;
    }
    return {best_cand, best_res};
  };
  const auto polish = [&](const Vector& xc, const Vector& gc) -> std::pair<Vector, double> {
    std::vector<char> exact_pin(static_cast<std::size_t>(m), 0);
    Vector exact_val = Vector::Zero(m);
    for (Index i = 0; i < m; ++i) {
      if (xc[i] != 0.0 && (xc[i] == lo_b[i] || xc[i] == hi_b[i])) {
        exact_pin[static_cast<std::size_t>(i)] = 1;
        exact_val[i] = xc[i];
      }
    }
    auto result = sweep(exact_pin, exact_val, xc, gc);
    if (result.second <= config.tol) return result;
    // singular reduced systems can hide a bound-active coordinate from the
    // pinning loop; retry with near-bound coordinates pinned outright
    std::vector<char> near_pin = exact_pin;
    Vector near_val = exact_val;
    bool widened = false;
    for (Index i = 0; i < m; ++i) {
      if (near_pin[static_cast<std::size_t>(i)]) continue;
      if (std::isfinite(lo_b[i]) && std::abs(xc[i] - lo_b[i]) <= 1e-2 * (1.0 + std::abs(lo_b[i]))) {
        near_pin[static_cast<std::size_t>(i)] = 1;
        near_val[i] = lo_b[i];
        widened = true;
      } else if (std::isfinite(hi_b[i]) &&
                 std::abs(xc[i] - hi_b[i]) <= 1e-2 * (1.0 + std::abs(hi_b[i]))) {
        near_pin[static_cast<std::size_t>(i)] = 1;
        near_val[i] = hi_b[i];
        widened = true;
      } else if (std::isfinite(lo_b[i]) && gc[i] > p.mu) {
        // |grad| > mu cannot hold at an interior optimum: the coordinate is
        // still drifting toward the bound on the downhill side
        near_pin[static_cast<std::size_t>(i)] = 1;
        near_val[i] = lo_b[i];
        widened = true;
      } else if (std::isfinite(hi_b[i]) && gc[i] < -p.mu) {
        near_pin[static_cast<std::size_t>(i)] = 1;
        near_val[i] = hi_b[i];
        widened = true;
      }
    }
    if (!widened) return result;
    const auto retry = sweep(near_pin, near_val, xc, gc);
    return retry.second < result.second ? retry : result;
  };

  InnerSolution sol;
  int next_polish = 25;
  int polish_gap = 25;
  for (int it = 0; it < config.max_iter; ++it) {
    const double res = residual_at(x, grad);
    if (res <= config.tol) {
      sol.y = x;
      sol.iterations = it;
      sol.kkt_residual = res;
      sol.converged = true;
      return sol;
    }
    if (it == next_polish) {
      const auto [cand, res_c] = polish(x, grad);
      if (res_c <= config.tol) {
        sol.y = cand;
        sol.iterations = it;
        sol.kkt_residual = res_c;
        sol.converged = true;
        return sol;
      }
      // failed guesses back off exponentially, but keep trying periodically
      polish_gap = std::min(polish_gap * 2, 250);
      next_polish = it + polish_gap;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    const Vector z = x + beta * (x - x_prev);
    const Vector grad_z = grad + beta * (grad - grad_prev);
    Vector x_next = project(p.feasible, soft_threshold(z - step * grad_z, p.mu * step));
    Vector grad_next = gram * x_next - htc;
    const double obj = obj_from_grad(x_next, grad_next);
    if (obj < best_obj) {
      best_obj = obj;
      best = x_next;
    }
    if (config.restart && obj > obj_from_grad(x, grad)) {
      // drop the momentum and take a monotone step from x itself, so the
      // iterate cannot freeze when the accelerated step stops helping
      t = 1.0;
      x = project(p.feasible, soft_threshold(x - step * grad, p.mu * step));
      grad = gram * x - htc;
      x_prev = x;
      grad_prev = grad;
      const double obj_restart = obj_from_grad(x, grad);
      if (obj_restart < best_obj) {
        best_obj = obj_restart;
        best = x;
      }
      continue;
    }
    x_prev = std::move(x);
    grad_prev = std::move(grad);
    x = std::move(x_next);
    grad = std::move(grad_next);
    t = t_next;
  }
  // one last polish from the final iterate before giving up
  if (config.max_iter > 0) {
    const auto [cand, res_c] = polish(x, grad);
    if (res_c <= config.tol) {
      sol.y = cand;
      sol.iterations = config.max_iter;
      sol.kkt_residual = res_c;
      sol.converged = true;
      return sol;
    }
  }
  sol.y = best;
  sol.iterations = config.max_iter;
  sol.kkt_residual = kkt_residual(p, best);
  sol.converged = sol.kkt_residual <= config.tol;
  return sol;
}

}  // namespace detail

/// Hybrid l1 least-squares solver. Order of attack, cheapest first:
/// remembered support patterns from the cache, the warm start's own support,
/// ADMM splitting with periodic direct active-set certification, and finally
/// FISTA with active-set polish. Every exit passes the same residual
/// certificate, so the staging affects speed, never correctness. The cache,
/// when supplied, is updated with the support of each certified solution.
/// Non-convergence sets the flag; the best iterate by objective is returned.
inline InnerSolution solve_l1(const L1LeastSquaresProblem& p, const SolverConfig& config,
                              const Vector* warm_start = nullptr,
                              SupportCache* cache = nullptr) {
  if (p.mu <= 0.0) throw std::invalid_argument("solve_l1: mu must be > 0");
  const Index m = p.H.cols();
  const detail::BoxBounds bounds = detail::effective_bounds(p.feasible, m);
  InnerSolution sol;
  if (cache != nullptr) {
    const std::size_t tries = std::min(cache->entries.size(), SupportCache::kMaxTries);
    for (std::size_t k = 0; k < tries; ++k) {
      if (detail::try_pattern(p, cache->entries[k], bounds, config.tol, sol)) {
        cache->promote(k);
        return sol;
      }
    }
  }
  if (warm_start != nullptr) {
    const Vector w = project(p.feasible, *warm_start);
    if (detail::try_pattern(p, detail::support_pattern(w, bounds), bounds, config.tol, sol)) {
      if (cache != nullptr) cache->confirm(detail::support_pattern(sol.y, bounds));
      return sol;
    }
  }

  const Matrix gram = p.H.transpose() * p.H;
  const Vector htc = p.H.transpose() * p.c;
  const auto residual_at = [&](const Vector& y, const Vector& g) {
    return (y - project(p.feasible, soft_threshold(y - g, p.mu))).lpNorm<Eigen::Infinity>();
  };
  const auto accept = [&](Vector y, int it, double res) {
    sol.y = std::move(y);
    sol.iterations = it;
    sol.kkt_residual = res;
    sol.converged = true;
    if (cache != nullptr) cache->confirm(detail::support_pattern(sol.y, bounds));
    return sol;
  };

  Vector z = warm_start != nullptr ? project(p.feasible, *warm_start)
                                   : project(p.feasible, Vector::Zero(m));
  {
    const Vector g = gram * z - htc;
    const double res = residual_at(z, g);
    if (res <= config.tol) return accept(std::move(z), 0, res);
  }

  // ADMM splitting between the quadratic and the prox of mu||.||_1 + box.
  // rho is fixed; convergence is certified, never assumed, so an instance
  // the splitting handles poorly just falls through to FISTA below.
  const double rho = 0.03;
  const int admm_budget = std::min(config.max_iter, 600);
  const Eigen::LDLT<Matrix> fac(gram + rho * Matrix::Identity(m, m));
  Vector u = Vector::Zero(m);
  Vector best = z;
  double best_obj = objective(p, z);
  for (int it = 1; it <= admm_budget; ++it) {
    const Vector y = fac.solve(htc + rho * (z - u));
    z = project(p.feasible, soft_threshold(y + u, p.mu / rho));
    u.noalias() += y - z;
    if (it % 10 == 0 || it == admm_budget) {
      const Vector g = gram * z - htc;
      const double res = residual_at(z, g);
      if (res <= config.tol) return accept(z, it, res);
      auto pat = detail::support_pattern(z, bounds);
      if (detail::try_pattern(p, pat, bounds, config.tol, sol)) {
        sol.iterations = it;
        if (cache != nullptr) cache->confirm(detail::support_pattern(sol.y, bounds));
        return sol;
      }
      // the support is sometimes identified before the magnitudes settle:
      // free the zero coordinates whose gradient slack |g_i| <= mu fails
      bool widened = false;
      for (Index i = 0; i < m; ++i) {
        if (pat[static_cast<std::size_t>(i)] == 0 && std::abs(g[i]) > p.mu) {
          pat[static_cast<std::size_t>(i)] = g[i] > 0.0 ? -1 : 1;
          widened = true;
        }
      }
      if (widened && detail::try_pattern(p, pat, bounds, config.tol, sol)) {
        sol.iterations = it;
        if (cache != nullptr) cache->confirm(detail::support_pattern(sol.y, bounds));
        return sol;
      }
      const double obj = objective(p, z);
      if (obj < best_obj) {
        best_obj = obj;
        best = z;
      }
    }
  }
  if (admm_budget < config.max_iter) {
    SolverConfig rest = config;
    rest.max_iter = config.max_iter - admm_budget;
    sol = detail::fista_l1(p, rest, &z);
    sol.iterations += admm_budget;
    if (sol.converged) {
      if (cache != nullptr) cache->confirm(detail::support_pattern(sol.y, bounds));
      return sol;
    }
    if (objective(p, sol.y) > best_obj) {
      sol.y = best;
      sol.kkt_residual = kkt_residual(p, best);
      sol.converged = sol.kkt_residual <= config.tol;
    }
    return sol;
  }
  sol.y = best;
  sol.iterations = admm_budget;
  sol.kkt_residual = kkt_residual(p, best);
  sol.converged = sol.kkt_residual <= config.tol;
  return sol;
}

/// Accelerated projected gradient on a sum of weighted quadratic residual
/// blocks over a box. Solves in Jacobi-scaled coordinates to tame badly
/// scaled columns; the stopping rule is checked in original coordinates.
inline InnerSolution solve_box_quadratic(const BoxQuadraticProblem& p, const SolverConfig& config,
                                         const Vector* warm_start = nullptr) {
  const auto f = detail::assemble(p);
  const Index m = f.Q.rows();

  Vector scale(m);
  for (Index i = 0; i < m; ++i) scale[i] = f.Q(i, i) > 1e-300 ? 1.0 / std::sqrt(f.Q(i, i)) : 1.0;
  const Matrix qs = scale.asDiagonal() * f.Q * scale.asDiagonal();
  const Vector bs = scale.asDiagonal() * f.b;
  ConvexSet box = [&] {
    switch (p.feasible.kind()) {
      case ConvexSet::Kind::Box:
      case ConvexSet::Kind::ScaledSymmetricBox:
        return ConvexSet::Box(p.feasible.lower().cwiseQuotient(scale),
                              p.feasible.upper().cwiseQuotient(scale));
      default:
        return p.feasible;  // whole space or orthant: scaling-invariant
    }
  }();

  Vector x;
  if (warm_start != nullptr) {
    x = project(box, warm_start->cwiseQuotient(scale));
  } else {
    // ridge-regularized Newton seed; exact for interior minimizers
    const Matrix ridge = qs + 1e-10 * Matrix::Identity(m, m);
    x = project(box, ridge.ldlt().solve(bs));
  }

  auto original_residual = [&](const Vector& xs, const Vector& grad_s) {
    // y = S xs, grad f(y) = S^{-1} grad_s
    const Vector y = xs.cwiseProduct(scale);
    const Vector g = grad_s.cwiseQuotient(scale);
    return (y - project(p.feasible, y - g)).lpNorm<Eigen::Infinity>();
  };

  InnerSolution sol;

  // Direct active-set attempt: a strongly convex box QP resolves in a few
  // reduced Newton solves, where the accelerated iteration can crawl on an
  // ill-conditioned Gram matrix. Pin the worst bound violator of each
  // reduced solution, release the worst wrong-sign multiplier, and accept
  // only on a passing residual certificate; any failure falls through.
  {
    const detail::BoxBounds bb = detail::effective_bounds(box, m);
    Vector y = x;
    std::vector<std::int8_t> state(static_cast<std::size_t>(m), 0);  // 0 free, -1 lo, +1 hi
    for (Index i = 0; i < m; ++i) {
      if (y[i] == bb.lo[i]) state[static_cast<std::size_t>(i)] = -1;
      else if (y[i] == bb.hi[i]) state[static_cast<std::size_t>(i)] = 1;
    }
    for (int round = 0; round < 3 * static_cast<int>(m) + 10; ++round) {
      std::vector<Index> free_idx;
      for (Index i = 0; i < m; ++i) {
        if (state[static_cast<std::size_t>(i)] == 0) free_idx.push_back(i);
      }
      if (!free_idx.empty()) {
        const auto nf = static_cast<Index>(free_idx.size());
        Matrix qff(nf, nf);
        Vector rhs(nf);
        for (Index a = 0; a < nf; ++a) {
          const Index i = free_idx[static_cast<std::size_t>(a)];
          rhs[a] = bs[i];
          for (Index b = 0; b < nf; ++b) {
            qff(a, b) = qs(i, free_idx[static_cast<std::size_t>(b)]);
          }
          for (Index j = 0; j < m; ++j) {
            if (state[static_cast<std::size_t>(j)] != 0) rhs[a] -= qs(i, j) * y[j];
          }
        }
        const Vector yf = (qff + 1e-13 * Matrix::Identity(nf, nf)).ldlt().solve(rhs);
        double worst = 0.0;
        Index worst_i = -1;
        bool at_lo = false;
        for (Index a = 0; a < nf; ++a) {
          const Index i = free_idx[static_cast<std::size_t>(a)];
          if (yf[a] - bb.hi[i] > worst) {
            worst = yf[a] - bb.hi[i];
            worst_i = i;
            at_lo = false;
          }
          if (bb.lo[i] - yf[a] > worst) {
            worst = bb.lo[i] - yf[a];
            worst_i = i;
            at_lo = true;
          }
        }
        if (worst_i >= 0) {
          state[static_cast<std::size_t>(worst_i)] = at_lo ? -1 : 1;
          y[worst_i] = at_lo ? bb.lo[worst_i] : bb.hi[worst_i];
          continue;
        }
        for (Index a = 0; a < nf; ++a) y[free_idx[static_cast<std::size_t>(a)]] = yf[a];
      }
      const Vector g = qs * y - bs;
      const double res = original_residual(y, g);
      if (res <= config.tol) {
        sol.y = project(p.feasible, y.cwiseProduct(scale));
        sol.iterations = 0;
        sol.kkt_residual = res;
        sol.converged = true;
        return sol;
      }
      // a pinned coordinate whose multiplier has the wrong sign must leave
      double worst = 0.0;
      Index worst_i = -1;
      for (Index i = 0; i < m; ++i) {
        const auto s = state[static_cast<std::size_t>(i)];
        const double viol = s == -1 ? -g[i] : s == 1 ? g[i] : 0.0;
        if (viol > worst) {
          worst = viol;
          worst_i = i;
        }
      }
      if (worst_i < 0) break;
      state[static_cast<std::size_t>(worst_i)] = 0;
    }
  }

  const double lip = spectral_radius_psd(qs);
  const double step = 1.0 / lip;

  // the gradient is affine: cache it and combine for the extrapolated point,
  // so each iteration costs a single matrix-vector product
  const auto obj_from_grad = [&](const Vector& xs, const Vector& grad_s) {
    return 0.5 * (xs.dot(grad_s) - bs.dot(xs));
  };

  Vector grad = qs * x - bs;
  Vector x_prev = x;
  Vector grad_prev = grad;
  double t = 1.0;
  Vector best = x;
  double best_obj = obj_from_grad(x, grad);
  for (int it = 0; it < config.max_iter; ++it) {
    const double res = original_residual(x, grad);
    if (res <= config.tol) {
      sol.y = project(p.feasible, x.cwiseProduct(scale));
      sol.iterations = it;
      sol.kkt_residual = res;
      sol.converged = true;
      return sol;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    const Vector z = x + beta * (x - x_prev);
    const Vector grad_z = grad + beta * (grad - grad_prev);
    Vector x_next = project(box, z - step * grad_z);
    Vector grad_next = qs * x_next - bs;
    const double obj = obj_from_grad(x_next, grad_next);
    if (obj < best_obj) {
      best_obj = obj;
      best = x_next;
    }
    if (config.restart && obj > obj_from_grad(x, grad)) {
      // drop the momentum and take a monotone step from x itself, so the
      // iterate cannot freeze when the accelerated step stops helping
      t = 1.0;
      x = project(box, x - step * grad);
      grad = qs * x - bs;
      x_prev = x;
      grad_prev = grad;
      const double obj_restart = obj_from_grad(x, grad);
      if (obj_restart < best_obj) {
        best_obj = obj_restart;
        best = x;
      }
      continue;
    }
    x_prev = std::move(x);
    grad_prev = std::move(grad);
    x = std::move(x_next);
    grad = std::move(grad_next);
    t = t_next;
  }
  sol.y = project(p.feasible, best.cwiseProduct(scale));
  sol.iterations = config.max_iter;
  sol.kkt_residual = kkt_residual(p, sol.y);
  sol.converged = sol.kkt_residual <= config.tol;
  return sol;
}

inline InnerSolution solve(const InnerProblem& p, const SolverConfig& config,
                           const Vector* warm_start = nullptr, SupportCache* cache = nullptr) {
  if (const auto* l1 = std::get_if<L1LeastSquaresProblem>(&p)) {
    return solve_l1(*l1, config, warm_start, cache);
  }
  return solve_box_quadratic(std::get<BoxQuadraticProblem>(p), config, warm_start);
}

}  // namespace dsvio
