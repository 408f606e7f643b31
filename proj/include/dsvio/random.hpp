#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dsvio/convex_set.hpp"

namespace dsvio {

/// Identity of a reproducible random stream. Draws are a pure function of
/// (seed, run_id, node, sample, coordinate), independent of call order, so
/// parallel generation cannot reorder them.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t run_id = 0;
};

namespace rng {

// splitmix64 finalizer; statistically strong enough for counter mixing.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t counter_hash(const RngStream& stream, std::uint64_t node,
                                  std::uint64_t sample, std::uint64_t coord) {
  std::uint64_t h = mix(stream.seed);
  h = mix(h ^ mix(stream.run_id + 0x632be59bd9b4e019ULL));
  h = mix(h ^ mix(node + 0x9e3779b97f4a7c15ULL));
  h = mix(h ^ mix(sample + 0xc2b2ae3d27d4eb4fULL));
  h = mix(h ^ mix(coord + 0x165667b19e3779f9ULL));
  return h;
}

/// Uniform on (0, 1), 53-bit resolution, never exactly 0 or 1.
inline double to_unit(std::uint64_t bits) {
  // (k + 0.5) * 2^-52 with k < 2^52: every value is exactly representable,
  // so the result is strictly inside (0, 1) even at the counter extremes.
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

inline double uniform(const RngStream& stream, std::uint64_t node, std::uint64_t sample,
                      std::uint64_t coord) {
  return to_unit(counter_hash(stream, node, sample, coord));
}

/// Inverse of the standard normal CDF (Wichura's AS 241, PPND16).
/// Fixed algorithm so that cross-platform runs match bitwise.
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    r -= 1.6;
    value = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                  2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
              4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
            (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                  1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
              2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    value = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                  1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
              5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
            (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                  1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
              5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -value : value;
}

inline double normal(const RngStream& stream, std::uint64_t node, std::uint64_t sample,
                     std::uint64_t coord, double mean, double sd) {
  return mean + sd * normal_quantile(uniform(stream, node, sample, coord));
}

/// Fisher-Yates prefix: the first `count` entries of a keyed random
/// permutation of {0, ..., pool-1}.
inline std::vector<int> sample_without_replacement(int pool, int count, const RngStream& stream,
                                                   std::uint64_t node, std::uint64_t sample) {
  std::vector<int> idx(pool);
  for (int i = 0; i < pool; ++i) idx[i] = i;
  for (int i = 0; i < count; ++i) {
    const std::uint64_t bits = counter_hash(stream, node, sample, static_cast<std::uint64_t>(i));
    const int j = i + static_cast<int>(bits % static_cast<std::uint64_t>(pool - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(count);
  return idx;
}

}  // namespace rng

/// One marginal of a time-varying product kernel.
struct DistributionSpec {
  enum class Kind { Normal, UniformAffine };
  Kind kind;
  // Normal: mean, sd. UniformAffine: U(a0 + a1 t, b0 + b1 t).
  double a = 0.0, b = 1.0, c = 0.0, d = 0.0;

  static DistributionSpec Normal(double mean, double sd) {
    if (sd <= 0.0) throw std::invalid_argument("DistributionSpec: sd must be > 0");
    return {Kind::Normal, mean, sd, 0.0, 0.0};
  }
  static DistributionSpec UniformAffine(double a0, double a1, double b0, double b1) {
    return {Kind::UniformAffine, a0, a1, b0, b1};
  }
};

struct ProbabilityKernel {
  std::vector<DistributionSpec> coordinates;

  Index dim() const { return static_cast<Index>(coordinates.size()); }

  void validate_at(double t) const {
    for (const auto& spec : coordinates) {
      if (spec.kind == DistributionSpec::Kind::UniformAffine) {
        if (spec.a + spec.b * t >= spec.c + spec.d * t) {
          throw std::invalid_argument("ProbabilityKernel: empty uniform range at t=" +
                                      std::to_string(t));
        }
      }
    }
  }
};

/// i.i.d. draws at one time node; row j is sample xi^j.
struct SampleBatch {
  double t = 0.0;
  Matrix samples;  // J x ell

  Index size() const { return samples.rows(); }
  Vector sample(Index j) const { return samples.row(j).transpose(); }
};

inline SampleBatch sample_batch(const ProbabilityKernel& kernel, double t, Index J,
                                const RngStream& stream, std::uint64_t node) {
  if (J < 1) throw std::invalid_argument("sample_batch: J must be >= 1");
  kernel.validate_at(t);
  const Index ell = kernel.dim();
  SampleBatch batch;
  batch.t = t;
  batch.samples.resize(J, ell);
  for (Index j = 0; j < J; ++j) {
    for (Index c = 0; c < ell; ++c) {
      const auto& spec = kernel.coordinates[static_cast<std::size_t>(c)];
      const double u = rng::uniform(stream, node, static_cast<std::uint64_t>(j),
                                    static_cast<std::uint64_t>(c));
      if (spec.kind == DistributionSpec::Kind::Normal) {
        batch.samples(j, c) = spec.a + spec.b * rng::normal_quantile(u);
      } else {
        const double lo = spec.a + spec.b * t;
        const double hi = spec.c + spec.d * t;
        batch.samples(j, c) = lo + (hi - lo) * u;
      }
    }
  }
  return batch;
}

}  // namespace dsvio
