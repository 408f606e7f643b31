#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace dsvio::health {

inline constexpr int kWatchFeatures = 14;
inline constexpr int kInsoleFeatures = 17;
inline constexpr int kEmrFeatures = 30;
inline constexpr int kHistoryDays = 90;
inline constexpr int kSubsampleRows = 50;
inline constexpr int kSubsampleDraws = 20;
inline constexpr int kStepsPerDayFull = 17280;  // 5-second cadence over 24 h

/// Clinical indicator rule: sampling median/sd, physiological clip range,
/// demographic adjustments, and the per-state-unit shift applied to the
/// daily time series. Fixed table so the generated data is reproducible.
struct EmrRule {
  const char* name;
  double median;
  double sd;
  double lo;
  double hi;
  double age_coef;   // per year above 70
  double male_coef;  // additive for male
  double bmi_coef;   // per BMI unit above 22
  double label_shift;  // per health-state unit
};

inline constexpr std::array<EmrRule, kEmrFeatures> kEmrRules = {{
    {"wbc", 6.0, 1.2, 3.0, 12.0, 0.01, 0.1, 0.05, 1.5},
    {"rbc", 4.7, 0.4, 3.5, 6.0, -0.005, 0.3, 0.01, -0.15},
    {"hgb", 140.0, 10.0, 115.0, 175.0, -0.2, 8.0, 0.3, -4.0},
    {"plt", 250.0, 40.0, 120.0, 420.0, -0.5, -10.0, 1.0, 20.0},
    {"sbp", 128.0, 10.0, 90.0, 180.0, 0.4, 2.0, 0.8, 6.0},
    {"dbp", 76.0, 7.0, 50.0, 110.0, 0.1, 1.5, 0.5, 3.0},
    {"glu", 5.6, 0.7, 3.5, 11.0, 0.01, 0.1, 0.08, 0.6},
    {"hba1c", 5.7, 0.5, 4.0, 9.0, 0.01, 0.05, 0.05, 0.3},
    {"tc", 4.9, 0.8, 2.5, 8.0, 0.005, -0.1, 0.06, 0.2},
    {"tg", 1.4, 0.5, 0.4, 4.5, 0.0, 0.1, 0.08, 0.2},
    {"hdl", 1.3, 0.3, 0.6, 2.5, 0.0, -0.2, -0.03, -0.1},
    {"ldl", 2.9, 0.7, 1.0, 5.5, 0.005, 0.0, 0.05, 0.15},
    {"crea", 80.0, 12.0, 40.0, 150.0, 0.5, 10.0, 0.4, 6.0},
    {"urea", 5.6, 1.2, 2.5, 12.0, 0.05, 0.4, 0.05, 0.8},
    {"ua", 330.0, 60.0, 150.0, 550.0, 0.5, 40.0, 3.0, 15.0},
    {"alt", 24.0, 8.0, 5.0, 70.0, -0.1, 4.0, 0.6, 4.0},
    {"ast", 26.0, 7.0, 8.0, 70.0, 0.0, 3.0, 0.3, 4.0},
    {"alp", 72.0, 15.0, 30.0, 140.0, 0.3, 2.0, 0.5, 5.0},
    {"ggt", 30.0, 12.0, 8.0, 100.0, 0.0, 8.0, 0.8, 5.0},
    {"tbil", 12.0, 3.5, 3.0, 28.0, 0.02, 1.5, 0.0, 1.0},
    {"alb", 43.0, 2.5, 32.0, 52.0, -0.08, 0.5, 0.05, -1.5},
    {"tp", 70.0, 4.0, 58.0, 85.0, -0.05, 0.5, 0.05, -1.0},
    {"na", 140.0, 2.0, 130.0, 150.0, 0.0, 0.0, 0.0, -0.6},
    {"k", 4.2, 0.3, 3.2, 5.6, 0.002, 0.05, 0.0, 0.12},
    {"ca", 2.35, 0.08, 2.0, 2.7, -0.001, 0.01, 0.0, -0.03},
    {"crp", 2.0, 1.2, 0.1, 40.0, 0.02, 0.1, 0.08, 2.0},
    {"esr", 12.0, 5.0, 1.0, 60.0, 0.2, -2.0, 0.3, 5.0},
    {"tsh", 2.1, 0.8, 0.3, 6.0, 0.01, -0.1, 0.02, 0.25},
    {"ft4", 15.0, 2.0, 9.0, 23.0, -0.02, 0.3, 0.0, -0.6},
    {"vitd", 58.0, 14.0, 20.0, 120.0, -0.2, 2.0, -0.5, -4.0},
}};

/// Signal rule for a wearable channel. The instantaneous value is
///   base + label_slope * eta + circadian_amp * sin(2 pi tau)
///        + activity_coef * act - sleep_coef * sleep + noise
/// clipped to [lo, hi]; base may depend on the person (see generate.hpp).
struct SignalRule {
  const char* name;
  double base;
  double label_slope;
  double circadian_amp;
  double activity_coef;
  double sleep_coef;
  double noise_sd;
  double lo;
  double hi;
};

// heart_rate and sbp/dbp bases are overridden per person from the
// HR baseline formula and the EMR blood-pressure values.
inline constexpr std::array<SignalRule, kWatchFeatures> kWatchRules = {{
    {"heart_rate", 72.0, 6.0, 1.5, 8.0, 8.0, 2.0, 40.0, 180.0},
    {"spo2", 97.5, -1.2, 0.1, -0.3, 0.2, 0.4, 85.0, 100.0},
    {"sleep_quality", 0.75, -0.2, 0.0, -0.4, 0.2, 0.05, 0.0, 1.0},
    {"steps", 4.0, -1.5, 0.0, 8.0, 4.0, 0.8, 0.0, 50.0},
    {"calories", 0.35, -0.05, 0.0, 0.6, 0.15, 0.05, 0.0, 5.0},
    {"skin_temperature", 36.5, 0.4, 0.3, 0.2, 0.1, 0.1, 34.0, 40.0},
    {"hrv", 45.0, -8.0, 2.0, -5.0, 5.0, 3.0, 5.0, 120.0},
    {"stress_index", 30.0, 15.0, 2.0, 5.0, -8.0, 5.0, 0.0, 100.0},
    {"sbp", 128.0, 5.0, 2.0, 6.0, 4.0, 3.0, 80.0, 200.0},
    {"dbp", 76.0, 3.0, 1.0, 3.0, 2.0, 2.0, 40.0, 120.0},
    {"activity_intensity", 0.1, -0.15, 0.0, 0.8, 0.1, 0.05, 0.0, 1.0},
    {"active_minutes", 0.1, -0.2, 0.0, 0.8, 0.1, 0.1, 0.0, 1.0},
    {"floors_climbed", 0.05, -0.02, 0.0, 0.1, 0.05, 0.02, 0.0, 2.0},
    {"status", 0.0, 1.0, 0.0, 0.0, 0.0, 0.25, 0.0, 2.0},
}};

/// Insole channels. weight_coef and age_coef feed the person-specific base:
///   base + weight_coef * weight + age_coef * (age - 60).
struct InsoleRule {
  const char* name;
  double base;
  double weight_coef;
  double age_coef;
  double label_slope;
  double activity_coef;
  double noise_sd;
  double lo;
  double hi;
};

inline constexpr std::array<InsoleRule, kInsoleFeatures> kInsoleRules = {{
    {"pressure_left_forefoot", 0.0, 0.23, 0.0, 1.0, 10.0, 2.0, 0.0, 200.0},
    {"pressure_left_heel", 0.0, 0.27, 0.0, 1.0, 8.0, 2.0, 0.0, 200.0},
    {"pressure_right_forefoot", 0.0, 0.23, 0.0, 1.0, 10.0, 2.0, 0.0, 200.0},
    {"pressure_right_heel", 0.0, 0.27, 0.0, 1.0, 8.0, 2.0, 0.0, 200.0},
    {"step_frequency", 1.9, 0.0, -0.01, -0.3, 0.6, 0.1, 0.0, 4.0},
    {"stride_length", 1.25, 0.0, -0.005, -0.15, 0.2, 0.05, 0.0, 2.5},
    {"lr_symmetry", 0.95, 0.0, 0.0, -0.08, 0.0, 0.02, 0.0, 1.0},
    {"force_estimation", 0.0, 1.05, 0.0, 2.0, 15.0, 3.0, 0.0, 350.0},
    {"balance_status", 0.92, 0.0, -0.002, -0.12, 0.0, 0.03, 0.0, 1.0},
    {"motion_type", 1.0, 0.0, 0.0, -0.3, 2.0, 0.3, 0.0, 5.0},
    {"cadence_variability", 0.05, 0.0, 0.001, 0.06, 0.0, 0.01, 0.0, 1.0},
    {"contact_time", 0.62, 0.0, 0.002, 0.05, -0.15, 0.02, 0.0, 2.0},
    {"swing_time", 0.38, 0.0, 0.0, -0.02, -0.05, 0.02, 0.0, 2.0},
    {"pressure_peak_left", 0.0, 0.55, 0.0, 1.5, 8.0, 2.0, 0.0, 300.0},
    {"pressure_peak_right", 0.0, 0.55, 0.0, 1.5, 8.0, 2.0, 0.0, 300.0},
    {"gait_speed", 1.1, 0.0, -0.008, -0.2, 0.3, 0.05, 0.0, 3.0},
    {"double_support_ratio", 0.25, 0.0, 0.001, 0.05, -0.05, 0.02, 0.0, 1.0},
}};

/// Deterministic daytime activity profile (hour of day in [0, 24)).
/// Zero while asleep, a smooth arch during waking hours.
inline double activity_level(double hour) {
  if (hour < 6.5 || hour > 21.5) return 0.0;
  const double s = std::sin(std::numbers::pi * (hour - 6.5) / 15.0);
  return s > 0.0 ? s : 0.0;
}

inline double sleep_indicator(double hour) { return (hour < 6.5 || hour > 21.5) ? 1.0 : 0.0; }

}  // namespace dsvio::health
