// Command-line front end: named example simulations, the accuracy grid,
// the health-tracking pipeline, and synthetic dataset emission.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dsvio/benchmark.hpp"
#include "dsvio/csv.hpp"
#include "dsvio/examples.hpp"
#include "dsvio/health/dataset.hpp"
#include "dsvio/health/metrics.hpp"
#include "dsvio/health/model.hpp"
#include "dsvio/scheme.hpp"

namespace {

constexpr const char* kVersion = "1.0.0";

using KeyMap = std::map<std::string, std::string>;

// Flat dotted-key config file: one `key = value` per line, `#` comments,
// lists comma-separated. Flags override file values.
KeyMap load_config_file(const std::string& path) {
  auto in = dsvio::open_input(path);
  KeyMap map;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (eq == std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key = value");
    }
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty key");
    }
    map[key] = value;
  }
  return map;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(item);
  return out;
}

// Registers every config key with its parser so file values, flag
// overrides, validation messages, and the manifest all share one source.
struct Settings {
  struct Entry {
    std::string key;
    std::function<void(const std::string&)> set;  // throws on bad value
    std::function<std::string()> echo;
  };
  std::vector<Entry> entries;

  void add(const std::string& key, double* v) {
    entries.push_back({key, [v](const std::string& s) { *v = dsvio::parse_number(s); },
                       [v] { return dsvio::format_number(*v); }});
  }
  void add(const std::string& key, std::int64_t* v) {
    entries.push_back({key,
                       [v](const std::string& s) {
                         *v = static_cast<std::int64_t>(std::stoll(s));
                       },
                       [v] { return std::to_string(*v); }});
  }
  void add(const std::string& key, std::uint64_t* v) {
    entries.push_back({key, [v](const std::string& s) { *v = std::stoull(s); },
                       [v] { return std::to_string(*v); }});
  }
  void add(const std::string& key, bool* v) {
    entries.push_back({key,
                       [v](const std::string& s) {
                         if (s == "true" || s == "1") {
                           *v = true;
                         } else if (s == "false" || s == "0") {
                           *v = false;
                         } else {
                           throw std::runtime_error("expected true/false");
                         }
                       },
                       [v] { return *v ? std::string("true") : std::string("false"); }});
  }
  void add(const std::string& key, std::string* v) {
    entries.push_back(
        {key, [v](const std::string& s) { *v = s; }, [v] { return *v; }});
  }
  void add(const std::string& key, std::vector<double>* v) {
    entries.push_back({key,
                       [v](const std::string& s) {
                         v->clear();
                         for (const auto& item : split_list(s)) v->push_back(dsvio::parse_number(item));
                       },
                       [v] {
                         std::string out;
                         for (std::size_t i = 0; i < v->size(); ++i) {
                           if (i) out += ",";
                           out += dsvio::format_number((*v)[i]);
                         }
                         return out;
                       }});
  }
  void add(const std::string& key, std::vector<std::int64_t>* v) {
    entries.push_back({key,
                       [v](const std::string& s) {
                         v->clear();
                         for (const auto& item : split_list(s)) {
                           v->push_back(static_cast<std::int64_t>(std::stoll(item)));
                         }
                       },
                       [v] {
                         std::string out;
                         for (std::size_t i = 0; i < v->size(); ++i) {
                           if (i) out += ",";
                           out += std::to_string((*v)[i]);
                         }
                         return out;
                       }});
  }

  // File values first, then flag overrides of the form key=value.
  void apply(const KeyMap& file_values, const KeyMap& overrides) const {
    std::set<std::string> known;
    for (const auto& e : entries) known.insert(e.key);
    for (const auto* map : {&file_values, &overrides}) {
      for (const auto& [key, value] : *map) {
        if (!known.count(key)) throw std::runtime_error("unknown config key: " + key);
        for (const auto& e : entries) {
          if (e.key != key) continue;
          try {
            e.set(value);
          } catch (const std::exception& ex) {
            throw std::runtime_error("bad value for " + key + ": " + ex.what());
          }
        }
      }
    }
  }

  void write_manifest(const std::string& command, const std::string& dir) const {
    auto out = dsvio::open_output(dir + "/manifest.txt");
    out << "command = " << command << "\n";
    out << "version = " << kVersion << "\n";
    for (const auto& e : entries) out << e.key << " = " << e.echo() << "\n";
  }
};

std::string ensure_out_dir(const std::string& dir) {
  std::filesystem::create_directories(dir);
  return dir;
}

KeyMap parse_set_flags(const std::vector<std::string>& pairs) {
  KeyMap map;
  for (const auto& p : pairs) {
    const auto eq = p.find('=');
    if (eq == std::string::npos) throw std::runtime_error("--set expects key=value, got: " + p);
    map[p.substr(0, eq)] = p.substr(eq + 1);
  }
  return map;
}

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> set_flags;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool paper_scale = false;
};

void add_common(CLI::App* cmd, CommonArgs* args) {
  cmd->add_option("--config", args->config_path, "flat dotted-key config file");
  cmd->add_option("--set", args->set_flags, "override a config key, key=value; wins over the file");
  cmd->add_option("--out", args->out_dir, "output directory");
  cmd->add_option("--seed", args->seed, "root seed for all random streams");
  cmd->add_flag("--paper-scale", args->paper_scale, "full-size experiment defaults");
}

KeyMap file_values(const CommonArgs& args) {
  return args.config_path.empty() ? KeyMap{} : load_config_file(args.config_path);
}

int run_simulate(const CommonArgs& args) {
  std::string kind = "decay";
  std::string mode = "saa";
  double T = 1.0;
  std::int64_t N = 100;
  std::int64_t J = 100;
  double sigma = 0.5;

  Settings s;
  s.add("problem.kind", &kind);
  s.add("problem.mode", &mode);
  s.add("problem.T", &T);
  s.add("problem.N", &N);
  s.add("problem.J", &J);
  s.add("problem.sigma", &sigma);
  std::uint64_t seed = args.seed;
  std::string out_dir = args.out_dir;
  s.add("run.seed", &seed);
  s.add("output.dir", &out_dir);
  s.apply(file_values(args), parse_set_flags(args.set_flags));

  if (N < 1 || J < 1 || T <= 0.0) throw std::runtime_error("problem.N >= 1, problem.J >= 1, problem.T > 0 required");
  if (T / static_cast<double>(N) > 1.0) {
    throw std::runtime_error("problem.N too small: step h = T/N must be <= 1");
  }

  dsvio::DsvioProblem problem;
  dsvio::Vector x0;
  if (kind == "decay") {
    problem = dsvio::decay_problem();
    x0 = dsvio::Vector::Ones(1);
  } else if (kind == "tracking") {
    dsvio::bench::ExampleInstance inst;
    inst.sigma = sigma;
    inst.T = T;
    problem = dsvio::bench::build_instance(inst);
    x0 = inst.x0;
  } else {
    throw std::runtime_error("problem.kind must be decay or tracking");
  }

  dsvio::SchemeConfig config;
  config.T = T;
  config.N = N;
  config.J = J;
  config.stream = dsvio::RngStream{seed, 1};
  const auto scheme_mode =
      mode == "exact" ? dsvio::SchemeMode::Exact
      : mode == "saa" ? dsvio::SchemeMode::SAA
                      : throw std::runtime_error("problem.mode must be saa or exact");

  const auto [traj, records] =
      dsvio::run_scheme(problem, x0, config, dsvio::SolverConfig{}, scheme_mode);
  ensure_out_dir(out_dir);
  dsvio::write_trajectory_csv(traj, out_dir + "/trajectory.csv");
  s.write_manifest("simulate", out_dir);
  std::cout << "simulate: wrote " << out_dir << "/trajectory.csv (" << traj.num_nodes()
            << " nodes)\n";
  return 0;
}

int run_bench4(const CommonArgs& args) {
  std::vector<double> sigmas = {0.1, 0.5, 1.0, 1.5};
  std::vector<std::int64_t> Js = {30, 100, 200, 500};
  std::int64_t reps = args.paper_scale ? 50 : 10;
  std::int64_t N = args.paper_scale ? 10000 : 2000;
  double mu = 5e-3;

  Settings s;
  s.add("bench4.sigmas", &sigmas);
  s.add("bench4.Js", &Js);
  s.add("bench4.reps", &reps);
  s.add("bench4.N", &N);
  s.add("bench4.mu", &mu);
  std::uint64_t seed = args.seed;
  std::string out_dir = args.out_dir;
  s.add("run.seed", &seed);
  s.add("output.dir", &out_dir);
  s.apply(file_values(args), parse_set_flags(args.set_flags));

  if (N < 1 || reps < 1) throw std::runtime_error("bench4.N >= 1 and bench4.reps >= 1 required");
  std::vector<dsvio::Index> J_list(Js.begin(), Js.end());
  const auto grid = dsvio::bench::experiment_grid(sigmas, J_list, static_cast<int>(reps), N, seed, mu);
  ensure_out_dir(out_dir);
  dsvio::bench::write_grid_csv(grid, out_dir + "/grid_rows.csv", out_dir + "/grid_averaged.csv");
  s.write_manifest("bench4", out_dir);
  std::cout << "bench4: wrote " << out_dir << "/grid_rows.csv and grid_averaged.csv\n";
  return 0;
}

int run_health(const CommonArgs& args) {
  std::int64_t persons = args.paper_scale ? 10 : 2;
  std::int64_t days = args.paper_scale ? 10 : 2;
  std::int64_t downsample = args.paper_scale ? 1 : 12;
  bool redraw_per_node = true;
  std::string data_dir;  // optional: ingest a gen-data dataset instead of regenerating

  Settings s;
  s.add("health.persons", &persons);
  s.add("health.days", &days);
  s.add("health.downsample", &downsample);
  s.add("health.redraw_per_node", &redraw_per_node);
  s.add("health.data_dir", &data_dir);
  std::uint64_t seed = args.seed;
  std::string out_dir = args.out_dir;
  s.add("run.seed", &seed);
  s.add("output.dir", &out_dir);
  s.apply(file_values(args), parse_set_flags(args.set_flags));

  if (persons < 1 || days < 1) throw std::runtime_error("health.persons >= 1 and health.days >= 1 required");

  dsvio::health::Population pop;
  if (data_dir.empty()) {
    pop = dsvio::health::generate_population(static_cast<int>(persons), static_cast<int>(days),
                                             dsvio::RngStream{seed, 0});
  } else {
    pop = dsvio::health::population_from_csvs(
        data_dir + "/user_profiles.csv", data_dir + "/user_groups.csv",
        data_dir + "/medical_records.csv", seed, static_cast<int>(days));
    if (pop.num_persons() < persons) throw std::runtime_error("health.data_dir has fewer persons than requested");
  }

  dsvio::health::HealthRunConfig config;
  config.downsample = static_cast<int>(downsample);
  config.redraw_per_node = redraw_per_node;

  ensure_out_dir(out_dir);
  std::vector<int> all_true;
  std::vector<int> all_pred;
  for (int person = 0; person < persons; ++person) {
    std::vector<int> person_true;
    std::vector<int> person_pred;
    for (int day = 0; day < days; ++day) {
      const auto traj = dsvio::health::simulate_day(pop, person, day, config);
      const std::string tag =
          "_person" + std::to_string(person + 1) + "_day" + std::to_string(day + 1);
      dsvio::health::write_day_trajectory_csv(traj, out_dir + "/trajectory" + tag + ".csv");
      person_true.insert(person_true.end(), traj.class_true.begin(), traj.class_true.end());
      person_pred.insert(person_pred.end(), traj.class_pred.begin(), traj.class_pred.end());
      if (traj.non_converged > 0) {
        std::cerr << "warning: person " << person + 1 << " day " << day + 1 << ": "
                  << traj.non_converged << " inner solves hit the iteration cap\n";
      }
    }
    const auto [cm, metrics] = dsvio::health::evaluate(person_true, person_pred);
    const std::string tag = "_person" + std::to_string(person + 1);
    dsvio::health::write_confusion_csv(cm, out_dir + "/confusion" + tag + ".csv");
    dsvio::health::write_metrics_csv(metrics, out_dir + "/metrics" + tag + ".csv");
    all_true.insert(all_true.end(), person_true.begin(), person_true.end());
    all_pred.insert(all_pred.end(), person_pred.begin(), person_pred.end());
  }
  const auto [cm, metrics] = dsvio::health::evaluate(all_true, all_pred);
  dsvio::health::write_confusion_csv(cm, out_dir + "/confusion_overall.csv");
  dsvio::health::write_metrics_csv(metrics, out_dir + "/metrics_overall.csv");
  s.write_manifest("health", out_dir);

  long agree = 0;
  for (std::size_t k = 0; k < all_true.size(); ++k) agree += all_true[k] == all_pred[k];
  std::cout << "health: " << persons << " persons x " << days << " days, "
            << all_true.size() << " evaluated points, class agreement "
            << dsvio::format_number(static_cast<double>(agree) /
                                    static_cast<double>(all_true.size()))
            << "\n";
  return 0;
}

int run_gen_data(const CommonArgs& args) {
  std::int64_t persons = args.paper_scale ? 10 : 2;
  std::int64_t days = args.paper_scale ? 10 : 2;

  Settings s;
  s.add("health.persons", &persons);
  s.add("health.days", &days);
  std::uint64_t seed = args.seed;
  std::string out_dir = args.out_dir;
  s.add("run.seed", &seed);
  s.add("output.dir", &out_dir);
  s.apply(file_values(args), parse_set_flags(args.set_flags));

  if (persons < 1 || days < 1) throw std::runtime_error("health.persons >= 1 and health.days >= 1 required");
  const auto pop = dsvio::health::generate_population(static_cast<int>(persons),
                                                      static_cast<int>(days),
                                                      dsvio::RngStream{seed, 0});
  ensure_out_dir(out_dir);
  dsvio::health::write_dataset(pop, out_dir);
  s.write_manifest("gen-data", out_dir);
  std::cout << "gen-data: wrote 5 CSV files to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Projected-dynamics toolkit: example simulations, accuracy grids, health tracking"};
  app.require_subcommand(1);

  CommonArgs simulate_args, bench_args, health_args, gen_args;
  auto* simulate = app.add_subcommand("simulate", "run one named example instance");
  add_common(simulate, &simulate_args);
  auto* bench4 = app.add_subcommand("bench4", "accuracy grid over noise level and sample size");
  add_common(bench4, &bench_args);
  auto* health = app.add_subcommand("health", "health-state tracking pipeline");
  add_common(health, &health_args);
  auto* gen_data = app.add_subcommand("gen-data", "emit the synthetic monitoring dataset CSVs");
  add_common(gen_data, &gen_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_simulate(simulate_args);
    if (bench4->parsed()) return run_bench4(bench_args);
    if (health->parsed()) return run_health(health_args);
    if (gen_data->parsed()) return run_gen_data(gen_args);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
