// Copyright 2026 The dubins_stack Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <utility>

#include "CLI11.hpp"
#include "json.hpp"
#include "spdlog/cfg/helpers.h"
#include "spdlog/spdlog.h"

#include "dubins_stack/errors.h"
#include "dubins_stack/io.h"
#include "dubins_stack/scenario.h"

namespace dubins_stack::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Options {
  std::string scenario = "infinity";
  std::string filter = "none";
  std::vector<std::string> filters;
  std::string spline = "off";
  double noise = 0.02;
  std::uint64_t seed = 0;
  int seeds = 20;
  double tolerance = 0.1;
  int horizon = 10;
  double dt = 0.1;
  std::string out = ".";
  std::string plot = "off";
  std::vector<double> shift;
  int particles = 1000;
  int max_steps = 200;
  std::string config;
};

const std::vector<std::string> kFilterNames = {"none", "ekf", "ukf", "pf"};

void AddCommonFlags(CLI::App* app, Options& o) {
  app->add_option("--scenario", o.scenario, "course to drive")
      ->check(CLI::IsMember({"infinity"}));
  app->add_option("--spline", o.spline, "reference densification")
      ->check(CLI::IsMember({"off", "chspline"}));
  app->add_option("--noise", o.noise, "observation noise scale q")
      ->check(CLI::NonNegativeNumber);
  app->add_option("--tolerance", o.tolerance, "arrival radius [m]")
      ->check(CLI::PositiveNumber);
  app->add_option("--horizon", o.horizon, "MPC horizon T")
      ->check(CLI::PositiveNumber);
  app->add_option("--dt", o.dt, "sample time [s]")->check(CLI::PositiveNumber);
  app->add_option("--out", o.out, "output directory");
  app->add_option("--plot", o.plot, "plot format")
      ->check(CLI::IsMember({"off", "svg"}));
  app->add_option("--shift", o.shift, "initial position offset (di dj)")
      ->expected(2);
  app->add_option("--particles", o.particles, "particle count for pf")
      ->check(CLI::PositiveNumber);
  app->add_option("--max-steps", o.max_steps, "step budget per target")
      ->check(CLI::PositiveNumber);
  app->add_option("--config", o.config, "key=value file; flags override it")
      ->check(CLI::ExistingFile);
}

// CLI11 reads config files only for the top-level app, so subcommands apply
// theirs here: entries fill options that were not given on the command line.
void ApplyConfigFile(CLI::App* app, const std::string& path) {
  if (path.empty()) return;
  std::ifstream file(path);
  if (!file) throw CLI::FileError::Missing(path);
  for (const CLI::ConfigItem& item : CLI::ConfigINI().from_config(file)) {
    if (item.name == "++" || item.name == "--") continue;  // section markers
    CLI::Option* opt = app->get_option_no_throw("--" + item.name);
    if (opt == nullptr || item.name == "config") {
      throw CLI::ConfigError::Extras(item.fullname());
    }
    if (opt->count() > 0) continue;
    opt->add_result(item.inputs);
    opt->run_callback();
  }
}

ScenarioConfig BuildConfig(const Options& o, FilterKind filter,
                           std::uint64_t seed) {
  ScenarioConfig config = DefaultScenarioConfig();
  config.filter = filter;
  config.spline = ParseSplineMode(o.spline);
  config.cost = DefaultTrackingCost(o.horizon);
  config.dt = o.dt;
  config.tolerance = o.tolerance;
  config.max_steps_per_target = o.max_steps;
  config.noise.observation_scale = o.noise;
  config.noise.seed = seed;
  if (!o.shift.empty()) {
    config.initial_shift = Eigen::Vector2d(o.shift[0], o.shift[1]);
  }
  config.particles = o.particles;
  ValidateConfig(config);
  return config;
}

std::string Timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << content;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::vector<Vector> Positions(const std::vector<Vector>& states) {
  std::vector<Vector> out;
  out.reserve(states.size());
  for (const Vector& s : states) out.push_back(s.head<2>());
  return out;
}

std::vector<Vector> TruePath(const TrajectoryLog& log) {
  std::vector<Vector> out;
  for (const StepRecord& r : log.records) out.push_back(r.x_true.head<2>());
  if (log.final_state.size() >= 2) out.push_back(log.final_state.head<2>());
  return out;
}

const char* SeriesColor(std::size_t i) {
  static const char* kColors[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b"};
  return kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
}

json Manifest(const ScenarioConfig& config, std::uint64_t seed,
              const std::string& started, const std::vector<std::string>& files) {
  json m;
  m["library_version"] = std::string(kLibraryVersion);
  m["config"] = ConfigToJson(config);
  m["seed"] = seed;
  m["started"] = started;
  m["finished"] = Timestamp();
  m["outputs"] = files;
  return m;
}

int Run(const Options& o, std::ostream& out) {
  const std::string started = Timestamp();
  const ScenarioConfig config =
      BuildConfig(o, ParseFilterKind(o.filter), o.seed);
  const TrajectoryLog log = RunClosedLoop(config);

  const fs::path dir(o.out);
  fs::create_directories(dir);
  std::vector<std::string> files = {"trajectory.csv", "metrics.json"};
  WriteFile(dir / "trajectory.csv", SerializeTrajectory(log));
  WriteFile(dir / "metrics.json", MetricsToJson(log).dump(2) + "\n");
  if (o.plot == "svg") {
    SvgPlot plot("closed loop, filter " + o.filter);
    plot.AddPolyline("reference", ReferencePath().points, "#999999");
    plot.AddPolyline("true", TruePath(log), SeriesColor(0));
    std::vector<Vector> estimates;
    for (const StepRecord& r : log.records) {
      estimates.push_back(r.estimate.head<2>());
    }
    plot.AddPolyline("estimate", estimates, SeriesColor(1));
    plot.AddMarkers("waypoints", Positions(MakeInfinityWaypoints()), "#000000");
    WriteFile(dir / "plot.svg", plot.Render());
    files.push_back("plot.svg");
  }
  files.push_back("manifest.json");
  WriteFile(dir / "manifest.json",
            Manifest(config, o.seed, started, files).dump(2) + "\n");

  out << "steps " << log.metrics.total_steps << ", targets "
      << log.targets_reached() << "/" << log.targets.size()
      << ", estimate rmse " << log.metrics.estimate_rmse << "\n";
  return log.any_timeout() ? kExitTimeout : kExitOk;
}

json Summary(const std::vector<double>& values) {
  json j;
  j["median"] = Percentile(values, 50.0);
  j["iqr"] = Percentile(values, 75.0) - Percentile(values, 25.0);
  j["values"] = values;
  return j;
}

int Compare(const Options& o, std::ostream& out) {
  const std::string started = Timestamp();
  if (o.filters.size() < 2) {
    throw ContractViolation("--filters: at least two filters are required");
  }
  std::vector<ScenarioConfig> configs;
  std::vector<FilterKind> kinds;
  for (const std::string& name : o.filters) kinds.push_back(ParseFilterKind(name));
  const int seeds = o.seeds;
  for (FilterKind kind : kinds) {
    for (int s = 0; s < seeds; ++s) {
      configs.push_back(BuildConfig(o, kind, o.seed + static_cast<std::uint64_t>(s)));
    }
  }

  // Each run is independent and deterministic, so worker order is irrelevant.
  std::vector<TrajectoryLog> logs(configs.size());
  std::vector<std::exception_ptr> errors(configs.size());
  std::atomic<std::size_t> next{0};
  const std::size_t workers = std::clamp<std::size_t>(
      std::thread::hardware_concurrency(), 1, configs.size());
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          try {
            logs[i] = RunClosedLoop(configs[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  json entries = json::array();
  bool any_timeout = false;
  for (std::size_t f = 0; f < kinds.size(); ++f) {
    std::vector<double> est, obs, xt, reached;
    int timeouts = 0;
    for (int s = 0; s < seeds; ++s) {
      const TrajectoryLog& log = logs[f * seeds + s];
      est.push_back(log.metrics.estimate_rmse);
      obs.push_back(log.metrics.observation_rmse);
      xt.push_back(log.metrics.cross_track_rmse);
      reached.push_back(log.targets_reached());
      if (log.any_timeout()) ++timeouts;
    }
    any_timeout = any_timeout || timeouts > 0;
    json e;
    e["filter"] = o.filters[f];
    e["estimate_rmse"] = Summary(est);
    e["observation_rmse"] = Summary(obs);
    e["cross_track_rmse"] = Summary(xt);
    e["targets_reached"] = Summary(reached);
    e["runs_with_timeout"] = timeouts;
    entries.push_back(e);
  }
  json table;
  table["seeds"] = seeds;
  table["first_seed"] = o.seed;
  table["noise"] = o.noise;
  table["entries"] = entries;

  const fs::path dir(o.out);
  fs::create_directories(dir);
  std::vector<std::string> files = {"comparison.json", "comparison.svg"};
  WriteFile(dir / "comparison.json", table.dump(2) + "\n");
  SvgPlot plot("filter comparison, first seed");
  plot.AddPolyline("reference", ReferencePath().points, "#999999");
  for (std::size_t f = 0; f < kinds.size(); ++f) {
    plot.AddPolyline(o.filters[f], TruePath(logs[f * seeds]), SeriesColor(f));
  }
  WriteFile(dir / "comparison.svg", plot.Render());
  files.push_back("manifest.json");
  json manifest = Manifest(configs.front(), o.seed, started, files);
  manifest["filters"] = o.filters;
  manifest["seeds"] = seeds;
  WriteFile(dir / "manifest.json", manifest.dump(2) + "\n");

  for (const json& e : entries) {
    out << e["filter"].get<std::string>() << ": estimate rmse median "
        << e["estimate_rmse"]["median"].get<double>() << ", iqr "
        << e["estimate_rmse"]["iqr"].get<double>() << "\n";
  }
  return any_timeout ? kExitTimeout : kExitOk;
}

void ConfigureLogging() {
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("DUBINS_STACK_LOG")) {
    spdlog::cfg::helpers::load_levels(level);
  }
}

}  // namespace

double Percentile(std::vector<double> values, double p) {
  if (values.empty()) throw ContractViolation("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (rank - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err) {
  ConfigureLogging();

  CLI::App app("Dubins car estimation and MPC tracking experiments",
               "dubins_stack");
  app.require_subcommand(1);
  Options run_opts;
  Options cmp_opts;
  CLI::App* run = app.add_subcommand("run", "one closed-loop run");
  AddCommonFlags(run, run_opts);
  run->add_option("--filter", run_opts.filter, "state estimator")
      ->check(CLI::IsMember(kFilterNames));
  run->add_option("--seed", run_opts.seed, "noise seed");

  CLI::App* compare = app.add_subcommand("compare", "filters over seeds");
  AddCommonFlags(compare, cmp_opts);
  compare->add_option("--filters", cmp_opts.filters, "comma separated filters")
      ->delimiter(',')
      ->check(CLI::IsMember(kFilterNames));
  compare->add_option("--seed", cmp_opts.seed, "first seed");
  compare->add_option("--seeds", cmp_opts.seeds, "number of seeds")
      ->check(CLI::PositiveNumber);

  // CLI11 parses from the back of a reversed vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
    if (run->parsed()) ApplyConfigFile(run, run_opts.config);
    if (compare->parsed()) ApplyConfigFile(compare, cmp_opts.config);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (run->parsed()) return Run(run_opts, out);
    return Compare(cmp_opts, out);
  } catch (const ContractViolation& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ScenarioStepError& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const NumericalError& e) {
    err << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace dubins_stack::cli
