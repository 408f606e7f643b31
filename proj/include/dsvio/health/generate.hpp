#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "dsvio/csv.hpp"
#include "dsvio/health/rules.hpp"
#include "dsvio/random.hpp"

namespace dsvio::health {

struct PersonProfile {
  int user_id = 0;
  int age = 60;
  bool male = true;
  double height = 170.0;  // cm
  double weight = 63.0;   // kg
  double bmi = 22.0;
};

/// How the health state evolves within one 24-hour day.
struct StatePattern {
  enum class Kind { Jump, Linear, Exponential, Logistic };
  Kind kind = Kind::Linear;
  double start_level = 0.0;  // in [0, 2]
  double end_level = 0.0;    // in [0, 2]
  double window_start = 0.3;  // fraction of the day
  double window_end = 0.7;
};

inline const char* pattern_name(StatePattern::Kind k) {
  switch (k) {
    case StatePattern::Kind::Jump: return "jump";
    case StatePattern::Kind::Linear: return "linear";
    case StatePattern::Kind::Exponential: return "exponential";
    case StatePattern::Kind::Logistic: return "logistic";
  }
  return "?";
}

inline StatePattern::Kind pattern_from_name(const std::string& s) {
  if (s == "jump") return StatePattern::Kind::Jump;
  if (s == "linear") return StatePattern::Kind::Linear;
  if (s == "exponential") return StatePattern::Kind::Exponential;
  if (s == "logistic") return StatePattern::Kind::Logistic;
  throw std::runtime_error("unknown pattern kind: " + s);
}

/// Label at day fraction tau in [0, 1].
inline double pattern_value(const StatePattern& p, double tau) {
  const double w0 = p.window_start;
  const double w1 = p.window_end;
  const double span = p.end_level - p.start_level;
  const double mid = 0.5 * (w0 + w1);
  switch (p.kind) {
    case StatePattern::Kind::Jump:
      return tau < mid ? p.start_level : p.end_level;
    case StatePattern::Kind::Linear: {
      const double u = std::clamp((tau - w0) / (w1 - w0), 0.0, 1.0);
      return p.start_level + span * u;
    }
    case StatePattern::Kind::Exponential: {
      const double u = std::clamp((tau - w0) / (w1 - w0), 0.0, 1.0);
      return p.start_level + span * (1.0 - std::exp(-5.0 * u)) / (1.0 - std::exp(-5.0));
    }
    case StatePattern::Kind::Logistic: {
      const double u = (tau - mid) / (w1 - w0);
      return p.start_level + span / (1.0 + std::exp(-10.0 * u));
    }
  }
  return p.start_level;
}

/// A synthetic cohort plus everything needed to regenerate its 5-second
/// signal streams deterministically.
struct Population {
  std::uint64_t seed = 0;
  int test_days = 2;  // days simulated after the 90-day history
  std::vector<PersonProfile> profiles;
  std::vector<Vector> emr;                          // per person, 30 indicators
  std::vector<std::vector<StatePattern>> patterns;  // per person, 90 + test_days entries

  int total_days() const { return kHistoryDays + test_days; }
  int num_persons() const { return static_cast<int>(profiles.size()); }
};

namespace keys {
// run_id namespaces so independent draw families never collide.
inline constexpr std::uint64_t kProfile = 0x10;
inline constexpr std::uint64_t kEmr = 0x11;
inline constexpr std::uint64_t kPattern = 0x12;
inline constexpr std::uint64_t kSignal = 0x13;
inline constexpr std::uint64_t kSubsample = 0x14;
}  // namespace keys

inline double clip(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// HR = 70 - 0.2(age-60) + 2*1{male} + 0.05(SBP-120) + 0.01(HGB-140)
inline double heart_rate_baseline(double age, bool male, double sbp, double hgb) {
  return 70.0 - 0.2 * (age - 60.0) + 2.0 * (male ? 1.0 : 0.0) + 0.05 * (sbp - 120.0) +
         0.01 * (hgb - 140.0);
}

inline PersonProfile generate_profile(std::uint64_t seed, int person) {
  const RngStream stream{seed, keys::kProfile};
  const auto node = static_cast<std::uint64_t>(person);
  PersonProfile p;
  p.user_id = person + 1;

  const double ug = rng::uniform(stream, node, 0, 0);
  const double ua = rng::uniform(stream, node, 0, 1);
  if (ug < 0.5) {
    p.age = 60 + static_cast<int>(ua * 10.0);
  } else if (ug < 0.8) {
    p.age = 70 + static_cast<int>(ua * 10.0);
  } else {
    p.age = 80 + static_cast<int>(ua * 15.0);
  }
  p.male = rng::uniform(stream, node, 0, 2) < 0.5;

  const double height_mean = (p.male ? 170.0 : 160.0) - 0.1 * (p.age - 60);
  p.height = clip(height_mean + 5.0 * rng::normal_quantile(rng::uniform(stream, node, 0, 3)),
                  145.0, 190.0);
  p.bmi = clip(22.0 + 2.5 * rng::normal_quantile(rng::uniform(stream, node, 0, 4)), 18.5, 30.0);
  p.weight = p.bmi * (p.height / 100.0) * (p.height / 100.0);
  return p;
}

inline Vector generate_emr(std::uint64_t seed, const PersonProfile& p) {
  const RngStream stream{seed, keys::kEmr};
  const auto node = static_cast<std::uint64_t>(p.user_id - 1);
  Vector emr(kEmrFeatures);
  for (int k = 0; k < kEmrFeatures; ++k) {
    const auto& rule = kEmrRules[static_cast<std::size_t>(k)];
    const double z = rng::normal_quantile(rng::uniform(stream, node, static_cast<std::uint64_t>(k), 0));
    const double v = rule.median + rule.age_coef * (p.age - 70) +
                     rule.male_coef * (p.male ? 1.0 : 0.0) + rule.bmi_coef * (p.bmi - 22.0) +
                     rule.sd * z;
    emr[k] = clip(v, rule.lo, rule.hi);
  }
  return emr;
}

inline StatePattern generate_pattern(std::uint64_t seed, int person, int day) {
  const RngStream stream{seed, keys::kPattern};
  const auto node = static_cast<std::uint64_t>(person) * 1024 + static_cast<std::uint64_t>(day);
  StatePattern p;
  const double uk = rng::uniform(stream, node, 0, 0);
  p.kind = uk < 0.25   ? StatePattern::Kind::Jump
           : uk < 0.5  ? StatePattern::Kind::Linear
           : uk < 0.75 ? StatePattern::Kind::Exponential
                       : StatePattern::Kind::Logistic;
  const int start_class = static_cast<int>(rng::uniform(stream, node, 0, 1) * 3.0);
  int end_class = static_cast<int>(rng::uniform(stream, node, 0, 2) * 2.0);
  if (end_class >= start_class) ++end_class;  // a different class
  const double jitter0 = 0.4 * rng::uniform(stream, node, 0, 3) - 0.2;
  const double jitter1 = 0.4 * rng::uniform(stream, node, 0, 4) - 0.2;
  p.start_level = clip(static_cast<double>(start_class) + jitter0, 0.0, 2.0);
  p.end_level = clip(static_cast<double>(end_class) + jitter1, 0.0, 2.0);
  p.window_start = 0.2 + 0.3 * rng::uniform(stream, node, 0, 5);
  p.window_end = p.window_start + 0.2 + 0.2 * rng::uniform(stream, node, 0, 6);
  return p;
}

inline Population generate_population(int num_persons, int test_days, const RngStream& stream) {
  if (num_persons < 1) throw std::invalid_argument("generate_population: num_persons >= 1");
  if (test_days < 1) throw std::invalid_argument("generate_population: test_days >= 1");
  Population pop;
  pop.seed = stream.seed;
  pop.test_days = test_days;
  for (int person = 0; person < num_persons; ++person) {
    pop.profiles.push_back(generate_profile(stream.seed, person));
    pop.emr.push_back(generate_emr(stream.seed, pop.profiles.back()));
    std::vector<StatePattern> days;
    for (int day = 0; day < pop.total_days(); ++day) {
      days.push_back(generate_pattern(stream.seed, person, day));
    }
    pop.patterns.push_back(std::move(days));
  }
  return pop;
}

/// Health-state label of (person, day) at step nu of a steps_per_day grid.
inline double label_value(const Population& pop, int person, int day, int step,
                          int steps_per_day) {
  const double tau = static_cast<double>(step) / static_cast<double>(steps_per_day);
  return pattern_value(pop.patterns[static_cast<std::size_t>(person)]
                                   [static_cast<std::size_t>(day)],
                       tau);
}

enum class Source { Watch = 0, Insole = 1, Emr = 2 };

inline int source_dim(Source s) {
  switch (s) {
    case Source::Watch: return kWatchFeatures;
    case Source::Insole: return kInsoleFeatures;
    case Source::Emr: return kEmrFeatures;
  }
  return 0;
}

namespace detail {
inline std::uint64_t signal_node(const Population& pop, int person, Source source, int day) {
  return (static_cast<std::uint64_t>(person) * 8 + static_cast<std::uint64_t>(source)) *
             static_cast<std::uint64_t>(pop.total_days()) +
         static_cast<std::uint64_t>(day);
}
}  // namespace detail

/// Raw (physiological-unit) feature row of one source for (person, day)
/// at step nu. Pure function of the population seed.
inline Vector source_features(const Population& pop, int person, Source source, int day, int step,
                              int steps_per_day) {
  const auto& profile = pop.profiles[static_cast<std::size_t>(person)];
  const Vector& emr = pop.emr[static_cast<std::size_t>(person)];
  const double eta = label_value(pop, person, day, step, steps_per_day);
  const double tau = static_cast<double>(step) / static_cast<double>(steps_per_day);
  const double hour = 24.0 * tau;
  const double act = activity_level(hour);
  const double sleep = sleep_indicator(hour);

  const RngStream stream{pop.seed, keys::kSignal};
  const std::uint64_t node = detail::signal_node(pop, person, source, day);
  const auto draw = [&](int feature) {
    return rng::normal_quantile(rng::uniform(stream, node, static_cast<std::uint64_t>(step),
                                             static_cast<std::uint64_t>(feature)));
  };

  Vector row(source_dim(source));
  switch (source) {
    case Source::Watch: {
      for (int k = 0; k < kWatchFeatures; ++k) {
        const auto& rule = kWatchRules[static_cast<std::size_t>(k)];
        double base = rule.base;
        if (k == 0) base = heart_rate_baseline(profile.age, profile.male, emr[4], emr[2]);
        if (k == 8) base = emr[4];
        if (k == 9) base = emr[5];
        const double v = base + rule.label_slope * eta +
                         rule.circadian_amp * std::sin(2.0 * std::numbers::pi * tau) +
                         rule.activity_coef * act - rule.sleep_coef * sleep +
                         rule.noise_sd * draw(k);
        row[k] = clip(v, rule.lo, rule.hi);
      }
      break;
    }
    case Source::Insole: {
      for (int k = 0; k < kInsoleFeatures; ++k) {
        const auto& rule = kInsoleRules[static_cast<std::size_t>(k)];
        const double base = rule.base + rule.weight_coef * profile.weight +
                            rule.age_coef * (profile.age - 60);
        const double v =
            base + rule.label_slope * eta + rule.activity_coef * act + rule.noise_sd * draw(k);
        row[k] = clip(v, rule.lo, rule.hi);
      }
      break;
    }
    case Source::Emr: {
      for (int k = 0; k < kEmrFeatures; ++k) {
        const auto& rule = kEmrRules[static_cast<std::size_t>(k)];
        const double v = emr[k] + rule.label_shift * eta + 0.2 * rule.sd * draw(k);
        row[k] = clip(v, rule.lo, rule.hi);
      }
      break;
    }
  }
  return row;
}

/// Fixed population-level affine normalization used by the tracking model:
/// (v - midpoint) / half-range from the rule tables. Data-independent, so
/// CSV round-trips cannot perturb it.
inline Vector standardize(Source source, const Vector& raw) {
  Vector out(raw.size());
  for (Index k = 0; k < raw.size(); ++k) {
    double lo = 0.0, hi = 1.0;
    switch (source) {
      case Source::Watch:
        lo = kWatchRules[static_cast<std::size_t>(k)].lo;
        hi = kWatchRules[static_cast<std::size_t>(k)].hi;
        break;
      case Source::Insole:
        lo = kInsoleRules[static_cast<std::size_t>(k)].lo;
        hi = kInsoleRules[static_cast<std::size_t>(k)].hi;
        break;
      case Source::Emr:
        lo = kEmrRules[static_cast<std::size_t>(k)].lo;
        hi = kEmrRules[static_cast<std::size_t>(k)].hi;
        break;
    }
    out[k] = (raw[k] - 0.5 * (lo + hi)) / (0.5 * (hi - lo));
  }
  return out;
}

}  // namespace dsvio::health
