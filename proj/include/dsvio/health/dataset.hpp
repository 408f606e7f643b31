#pragma once

#include <string>
#include <vector>

#include "dsvio/csv.hpp"
#include "dsvio/health/generate.hpp"

namespace dsvio::health {

// Five-file dataset layout. user_profiles, user_groups and medical_records
// round-trip exactly; the two signal files are hourly excerpts of the
// 5-second streams, which stay regenerable from the population seed.

inline void write_user_profiles_csv(const Population& pop, const std::string& path) {
  auto out = open_output(path);
  out << "user_id,age,gender,height,weight,bmi\n";
  for (const auto& p : pop.profiles) {
    out << p.user_id << "," << p.age << "," << (p.male ? "male" : "female") << ","
        << format_number(p.height) << "," << format_number(p.weight) << ","
        << format_number(p.bmi) << "\n";
  }
}

inline void write_user_groups_csv(const Population& pop, const std::string& path) {
  auto out = open_output(path);
  out << "user_id,day,pattern,start_level,end_level,window_start,window_end\n";
  for (int person = 0; person < pop.num_persons(); ++person) {
    for (int day = 0; day < pop.total_days(); ++day) {
      const auto& p = pop.patterns[static_cast<std::size_t>(person)][static_cast<std::size_t>(day)];
      out << pop.profiles[static_cast<std::size_t>(person)].user_id << "," << day << ","
          << pattern_name(p.kind) << "," << format_number(p.start_level) << ","
          << format_number(p.end_level) << "," << format_number(p.window_start) << ","
          << format_number(p.window_end) << "\n";
    }
  }
}

inline void write_medical_records_csv(const Population& pop, const std::string& path) {
  auto out = open_output(path);
  out << "user_id";
  for (const auto& rule : kEmrRules) out << "," << rule.name;
  out << "\n";
  for (int person = 0; person < pop.num_persons(); ++person) {
    out << pop.profiles[static_cast<std::size_t>(person)].user_id;
    const Vector& emr = pop.emr[static_cast<std::size_t>(person)];
    for (int k = 0; k < kEmrFeatures; ++k) out << "," << format_number(emr[k]);
    out << "\n";
  }
}

namespace detail {

template <typename Rules>
inline void write_signal_csv(const Population& pop, Source source, const Rules& rules,
                             const std::string& path) {
  auto out = open_output(path);
  out << "user_id,day,hour";
  for (const auto& rule : rules) out << "," << rule.name;
  out << "\n";
  for (int person = 0; person < pop.num_persons(); ++person) {
    for (int day = 0; day < pop.total_days(); ++day) {
      for (int hour = 0; hour < 24; ++hour) {
        const int step = hour * (kStepsPerDayFull / 24);
        const Vector row = source_features(pop, person, source, day, step, kStepsPerDayFull);
        out << pop.profiles[static_cast<std::size_t>(person)].user_id << "," << day << "," << hour;
        for (Index k = 0; k < row.size(); ++k) out << "," << format_number(row[k]);
        out << "\n";
      }
    }
  }
}

}  // namespace detail

inline void write_health_data_csv(const Population& pop, const std::string& path) {
  detail::write_signal_csv(pop, Source::Watch, kWatchRules, path);
}

inline void write_insole_data_csv(const Population& pop, const std::string& path) {
  detail::write_signal_csv(pop, Source::Insole, kInsoleRules, path);
}

inline void write_dataset(const Population& pop, const std::string& dir) {
  write_user_profiles_csv(pop, dir + "/user_profiles.csv");
  write_user_groups_csv(pop, dir + "/user_groups.csv");
  write_medical_records_csv(pop, dir + "/medical_records.csv");
  write_health_data_csv(pop, dir + "/health_data.csv");
  write_insole_data_csv(pop, dir + "/insole_data.csv");
}

namespace detail {

inline std::vector<std::vector<std::string>> read_rows(const std::string& path,
                                                       const std::vector<std::string>& header) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  expect_header(split_csv_line(line), header, path);
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("csv: wrong field count in " + path);
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

}  // namespace detail

inline std::vector<PersonProfile> read_user_profiles_csv(const std::string& path) {
  const auto rows =
      detail::read_rows(path, {"user_id", "age", "gender", "height", "weight", "bmi"});
  std::vector<PersonProfile> profiles;
  for (const auto& row : rows) {
    PersonProfile p;
    p.user_id = static_cast<int>(parse_number(row[0]));
    p.age = static_cast<int>(parse_number(row[1]));
    if (row[2] != "male" && row[2] != "female") {
      throw std::runtime_error("user_profiles: gender must be male or female");
    }
    p.male = row[2] == "male";
    p.height = parse_number(row[3]);
    p.weight = parse_number(row[4]);
    p.bmi = parse_number(row[5]);
    profiles.push_back(p);
  }
  return profiles;
}

inline std::vector<Vector> read_medical_records_csv(const std::string& path) {
  std::vector<std::string> header = {"user_id"};
  for (const auto& rule : kEmrRules) header.emplace_back(rule.name);
  const auto rows = detail::read_rows(path, header);
  std::vector<Vector> records;
  for (const auto& row : rows) {
    Vector emr(kEmrFeatures);
    for (int k = 0; k < kEmrFeatures; ++k) emr[k] = parse_number(row[static_cast<std::size_t>(k) + 1]);
    records.push_back(std::move(emr));
  }
  return records;
}

inline std::vector<std::vector<StatePattern>> read_user_groups_csv(const std::string& path,
                                                                   int num_persons,
                                                                   int total_days) {
  const auto rows = detail::read_rows(
      path, {"user_id", "day", "pattern", "start_level", "end_level", "window_start",
             "window_end"});
  if (rows.size() != static_cast<std::size_t>(num_persons) * static_cast<std::size_t>(total_days)) {
    throw std::runtime_error("user_groups: expected one row per (person, day)");
  }
  std::vector<std::vector<StatePattern>> patterns(
      static_cast<std::size_t>(num_persons),
      std::vector<StatePattern>(static_cast<std::size_t>(total_days)));
  std::size_t r = 0;
  for (int person = 0; person < num_persons; ++person) {
    for (int day = 0; day < total_days; ++day, ++r) {
      const auto& row = rows[r];
      if (static_cast<int>(parse_number(row[1])) != day) {
        throw std::runtime_error("user_groups: rows must be grouped by person, ordered by day");
      }
      StatePattern p;
      p.kind = pattern_from_name(row[2]);
      p.start_level = parse_number(row[3]);
      p.end_level = parse_number(row[4]);
      p.window_start = parse_number(row[5]);
      p.window_end = parse_number(row[6]);
      patterns[static_cast<std::size_t>(person)][static_cast<std::size_t>(day)] = p;
    }
  }
  return patterns;
}

/// Rebuilds a population from the three exactly-round-tripping files plus
/// the seed that keys the signal noise streams.
inline Population population_from_csvs(const std::string& profiles_path,
                                       const std::string& groups_path,
                                       const std::string& records_path, std::uint64_t seed,
                                       int test_days) {
  Population pop;
  pop.seed = seed;
  pop.test_days = test_days;
  pop.profiles = read_user_profiles_csv(profiles_path);
  pop.emr = read_medical_records_csv(records_path);
  if (pop.emr.size() != pop.profiles.size()) {
    throw std::runtime_error("dataset: profile and medical-record counts differ");
  }
  pop.patterns = read_user_groups_csv(groups_path, pop.num_persons(), pop.total_days());
  return pop;
}

}  // namespace dsvio::health
