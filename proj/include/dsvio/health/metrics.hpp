#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dsvio/csv.hpp"
#include "dsvio/health/model.hpp"

namespace dsvio::health {

/// Rows index the true class, columns the predicted class.
struct ConfusionMatrix3 {
  std::array<std::array<long, 3>, 3> counts{};

  long total() const {
    long t = 0;
    for (const auto& row : counts) {
      for (long c : row) t += c;
    }
    return t;
  }
  long row_sum(int i) const {
    return counts[static_cast<std::size_t>(i)][0] + counts[static_cast<std::size_t>(i)][1] +
           counts[static_cast<std::size_t>(i)][2];
  }
  long col_sum(int i) const {
    return counts[0][static_cast<std::size_t>(i)] + counts[1][static_cast<std::size_t>(i)] +
           counts[2][static_cast<std::size_t>(i)];
  }
};

/// One-vs-rest metrics; a zero-denominator ratio is reported as absent.
struct ClassMetrics {
  int cls = 0;
  std::optional<double> accuracy;
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> specificity;
  std::optional<double> f1;
};

inline std::pair<ConfusionMatrix3, std::array<ClassMetrics, 3>> evaluate(
    const std::vector<int>& true_classes, const std::vector<int>& predicted_classes) {
  if (true_classes.size() != predicted_classes.size()) {
    throw std::invalid_argument("evaluate: series length mismatch");
  }
  ConfusionMatrix3 cm;
  for (std::size_t k = 0; k < true_classes.size(); ++k) {
    const int t = true_classes[k];
    const int p = predicted_classes[k];
    if (t < 0 || t > 2 || p < 0 || p > 2) throw std::invalid_argument("evaluate: class not in {0,1,2}");
    ++cm.counts[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
  }

  const auto ratio = [](long num, long den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };

  std::array<ClassMetrics, 3> metrics;
  const long total = cm.total();
  for (int i = 0; i < 3; ++i) {
    const long tp = cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)];
    const long fn = cm.row_sum(i) - tp;
    const long fp = cm.col_sum(i) - tp;
    const long tn = total - tp - fn - fp;
    ClassMetrics& m = metrics[static_cast<std::size_t>(i)];
    m.cls = i;
    m.accuracy = ratio(tp + tn, total);
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.specificity = ratio(tn, tn + fp);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
      m.f1 = 2.0 * (*m.precision) * (*m.recall) / (*m.precision + *m.recall);
    }
  }
  return {cm, metrics};
}

inline void write_confusion_csv(const ConfusionMatrix3& cm, const std::string& path) {
  auto out = open_output(path);
  out << "true_class,pred_0,pred_1,pred_2\n";
  for (int i = 0; i < 3; ++i) {
    out << i;
    for (int j = 0; j < 3; ++j) out << "," << cm.counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    out << "\n";
  }
}

inline void write_metrics_csv(const std::array<ClassMetrics, 3>& metrics,
                              const std::string& path) {
  auto out = open_output(path);
  out << "class,accuracy,precision,recall,specificity,f1\n";
  const auto cell = [](const std::optional<double>& v) {
    return v ? format_number(*v) : std::string();
  };
  for (const auto& m : metrics) {
    out << m.cls << "," << cell(m.accuracy) << "," << cell(m.precision) << "," << cell(m.recall)
        << "," << cell(m.specificity) << "," << cell(m.f1) << "\n";
  }
}

inline void write_day_trajectory_csv(const DayTrajectory& day, const std::string& path) {
  auto out = open_output(path);
  out << "nu,t,x_pred,x_true,class_pred,class_true\n";
  for (std::size_t nu = 0; nu < day.t_hours.size(); ++nu) {
    out << nu << "," << format_number(day.t_hours[nu]) << "," << format_number(day.x_pred[nu])
        << "," << format_number(day.x_true[nu]) << "," << day.class_pred[nu] << ","
        << day.class_true[nu] << "\n";
  }
}

}  // namespace dsvio::health
