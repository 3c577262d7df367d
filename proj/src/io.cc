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

#include "dubins_stack/io.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

#include "dubins_stack/errors.h"

namespace dubins_stack {
namespace {

using nlohmann::json;

constexpr int kCsvColumns = 18;

void AppendReal(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

void AppendVector(std::string& out, const Vector& v, long expected) {
  for (long i = 0; i < expected; ++i) {
    out += ',';
    AppendReal(out, i < v.size() ? v[i] : 0.0);
  }
}

double ParseReal(const std::string& field, size_t line) {
  char* end = nullptr;
  const double v = std::strtod(field.c_str(), &end);
  if (field.empty() || end != field.c_str() + field.size()) {
    std::ostringstream msg;
    msg << "trajectory csv line " << line << ": bad number '" << field << "'";
    throw ContractViolation(msg.str());
  }
  return v;
}

json VectorToJson(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

Vector VectorFromJson(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(),
                                  static_cast<long>(values.size()));
}

json MatrixToJson(const Matrix& m) {
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    rows.push_back(VectorToJson(m.row(r).transpose()));
  }
  return rows;
}

Matrix MatrixFromJson(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<long>(rows.size()),
           static_cast<long>(rows.front().size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    CheckDimension("matrix row", m.cols(), static_cast<long>(rows[r].size()));
    for (size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<long>(r), static_cast<long>(c)) = rows[r][c];
    }
  }
  return m;
}

std::string XmlEscape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

}  // namespace

std::string SerializeTrajectory(const std::vector<StepRecord>& records) {
  std::string out(kTrajectoryCsvHeader);
  out += '\n';
  for (const StepRecord& r : records) {
    out += std::to_string(r.k);
    out += ',';
    AppendReal(out, r.t);
    AppendVector(out, r.x_true, 4);
    AppendVector(out, r.y_noisy, 4);
    AppendVector(out, r.estimate, 4);
    AppendVector(out, r.u, 2);
    out += ',';
    out += std::to_string(r.target_index);
    out += ',';
    AppendReal(out, r.stage_cost);
    out += '\n';
  }
  return out;
}

std::string SerializeTrajectory(const TrajectoryLog& log) {
  return SerializeTrajectory(log.records);
}

std::vector<StepRecord> ParseTrajectoryCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kTrajectoryCsvHeader) {
    throw ContractViolation("trajectory csv: missing or unexpected header");
  }
  std::vector<StepRecord> records;
  size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != kCsvColumns) {
      std::ostringstream msg;
      msg << "trajectory csv line " << line_no << ": expected " << kCsvColumns
          << " fields, got " << fields.size();
      throw ContractViolation(msg.str());
    }
    std::vector<double> v(kCsvColumns);
    for (int i = 0; i < kCsvColumns; ++i) {
      v[static_cast<size_t>(i)] = ParseReal(fields[static_cast<size_t>(i)], line_no);
    }
    StepRecord r;
    r.k = static_cast<int>(v[0]);
    r.t = v[1];
    r.x_true = Eigen::Map<const Vector>(v.data() + 2, 4);
    r.y_noisy = Eigen::Map<const Vector>(v.data() + 6, 4);
    r.estimate = Eigen::Map<const Vector>(v.data() + 10, 4);
    r.u = Eigen::Map<const Vector>(v.data() + 14, 2);
    r.target_index = static_cast<int>(v[16]);
    r.stage_cost = v[17];
    records.push_back(std::move(r));
  }
  return records;
}

json ConfigToJson(const ScenarioConfig& config) {
  json cost;
  cost["horizon"] = config.cost.horizon;
  cost["weights"] = json::array();
  for (const Matrix& w : config.cost.weights) {
    cost["weights"].push_back(MatrixToJson(w));
  }
  cost["linear"] = json::array();
  for (const Vector& p : config.cost.linear) {
    cost["linear"].push_back(VectorToJson(p));
  }
  cost["terminal_weight"] = config.cost.terminal_weight
                                ? MatrixToJson(*config.cost.terminal_weight)
                                : json(nullptr);
  cost["terminal_linear"] = config.cost.terminal_linear
                                ? VectorToJson(*config.cost.terminal_linear)
                                : json(nullptr);

  return json{
      {"scenario", "infinity"},
      {"filter", ToString(config.filter)},
      {"spline", ToString(config.spline)},
      {"cost", cost},
      {"dt", config.dt},
      {"tolerance", config.tolerance},
      {"max_steps_per_target", config.max_steps_per_target},
      {"noise",
       {{"observation_scale", config.noise.observation_scale},
        {"process_scale", config.noise.process_scale},
        {"seed", config.noise.seed}}},
      {"initial_state", VectorToJson(config.initial_state)},
      {"initial_shift", VectorToJson(config.initial_shift)},
      {"spline_interval", config.spline_interval},
      {"lookahead", config.lookahead},
      {"particles", config.particles},
      {"mpc",
       {{"max_iterations", config.mpc.max_iterations},
        {"input_tolerance", config.mpc.input_tolerance},
        {"max_halvings", config.mpc.max_halvings}}},
  };
}

ScenarioConfig ConfigFromJson(const json& j) {
  try {
    ScenarioConfig c;
    c.filter = ParseFilterKind(j.at("filter").get<std::string>());
    c.spline = ParseSplineMode(j.at("spline").get<std::string>());
    const json& cost = j.at("cost");
    c.cost.horizon = cost.at("horizon").get<int>();
    for (const json& w : cost.at("weights")) {
      c.cost.weights.push_back(MatrixFromJson(w));
    }
    for (const json& p : cost.at("linear")) {
      c.cost.linear.push_back(VectorFromJson(p));
    }
    if (!cost.at("terminal_weight").is_null()) {
      c.cost.terminal_weight = MatrixFromJson(cost.at("terminal_weight"));
    }
    if (!cost.at("terminal_linear").is_null()) {
      c.cost.terminal_linear = VectorFromJson(cost.at("terminal_linear"));
    }
    c.dt = j.at("dt").get<double>();
    c.tolerance = j.at("tolerance").get<double>();
    c.max_steps_per_target = j.at("max_steps_per_target").get<int>();
    const json& noise = j.at("noise");
    c.noise.observation_scale = noise.at("observation_scale").get<double>();
    c.noise.process_scale = noise.at("process_scale").get<double>();
    c.noise.seed = noise.at("seed").get<std::uint64_t>();
    c.initial_state = VectorFromJson(j.at("initial_state"));
    c.initial_shift = VectorFromJson(j.at("initial_shift"));
    c.spline_interval = j.at("spline_interval").get<double>();
    c.lookahead = j.at("lookahead").get<int>();
    c.particles = j.at("particles").get<int>();
    const json& mpc = j.at("mpc");
    c.mpc.max_iterations = mpc.at("max_iterations").get<int>();
    c.mpc.input_tolerance = mpc.at("input_tolerance").get<double>();
    c.mpc.max_halvings = mpc.at("max_halvings").get<int>();
    return c;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("scenario config json: ") + e.what());
  }
}

json MetricsToJson(const TrajectoryLog& log) {
  const Metrics& m = log.metrics;
  return json{
      {"estimate_rmse", m.estimate_rmse},
      {"observation_rmse", m.observation_rmse},
      {"cross_track_rmse", m.cross_track_rmse},
      {"cross_track_max", m.cross_track_max},
      {"total_steps", m.total_steps},
      {"targets_total", log.targets.size()},
      {"targets_reached", log.targets_reached()},
      {"any_timeout", log.any_timeout()},
      {"arrival_steps", log.arrival_steps},
      {"final_state", log.final_state.size() > 0 ? VectorToJson(log.final_state)
                                                 : json::array()},
  };
}

SvgPlot::SvgPlot(std::string title, int width, int height)
    : title_(std::move(title)), width_(width), height_(height) {}

void SvgPlot::AddPolyline(std::string label, std::vector<Vector> points,
                          std::string color) {
  series_.push_back(
      {std::move(label), std::move(points), std::move(color), false});
}

void SvgPlot::AddMarkers(std::string label, std::vector<Vector> points,
                         std::string color) {
  series_.push_back(
      {std::move(label), std::move(points), std::move(color), true});
}

std::string SvgPlot::Render() const {
  double lo_x = std::numeric_limits<double>::infinity();
  double lo_y = lo_x;
  double hi_x = -lo_x;
  double hi_y = -lo_x;
  for (const Series& s : series_) {
    for (const Vector& p : s.points) {
      lo_x = std::min(lo_x, p[0]);
      hi_x = std::max(hi_x, p[0]);
      lo_y = std::min(lo_y, p[1]);
      hi_y = std::max(hi_y, p[1]);
    }
  }
  if (!(hi_x >= lo_x)) {
    lo_x = lo_y = -1.0;
    hi_x = hi_y = 1.0;
  }
  const double margin = 30.0;
  const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
  const double scale =
      std::min(width_ - 2 * margin, height_ - 2 * margin) / span;
  const auto px = [&](double x) { return margin + (x - lo_x) * scale; };
  // SVG y grows downward.
  const auto py = [&](double y) { return height_ - margin - (y - lo_y) * scale; };

  std::ostringstream out;
  out.precision(6);
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_
      << "\" height=\"" << height_ << "\" viewBox=\"0 0 " << width_ << ' '
      << height_ << "\">\n"
      << "  <title>" << XmlEscape(title_) << "</title>\n"
      << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  int legend_row = 0;
  for (const Series& s : series_) {
    if (s.markers) {
      out << "  <g fill=\"" << XmlEscape(s.color) << "\">\n";
      for (const Vector& p : s.points) {
        out << "    <circle cx=\"" << px(p[0]) << "\" cy=\"" << py(p[1])
            << "\" r=\"3\"/>\n";
      }
      out << "  </g>\n";
    } else {
      out << "  <polyline fill=\"none\" stroke=\"" << XmlEscape(s.color)
          << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < s.points.size(); ++i) {
        if (i > 0) out << ' ';
        out << px(s.points[i][0]) << ',' << py(s.points[i][1]);
      }
      out << "\"/>\n";
    }
    out << "  <text x=\"8\" y=\"" << 16 + 14 * legend_row++
        << "\" font-size=\"12\" fill=\"" << XmlEscape(s.color) << "\">"
        << XmlEscape(s.label) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace dubins_stack
