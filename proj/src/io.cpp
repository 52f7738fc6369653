#include "trajset/io.hpp"

#include <charconv>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <vector>

namespace trajset::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& name, std::size_t line,
                       const std::string& what) {
  throw ParseError(name + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t begin = 0;
  for (;;) {
    const std::size_t end = s.find(sep, begin);
    if (end == std::string::npos) {
      out.push_back(s.substr(begin));
      return out;
    }
    out.push_back(s.substr(begin, end - begin));
    begin = end + 1;
  }
}

/// Line reader that tracks the current line number for diagnostics.
class Lines {
 public:
  Lines(std::istream& in, std::string name)
      : in_(in), name_(std::move(name)) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++number_;
    return true;
  }

  std::string require(const std::string& what) {
    std::string line;
    if (!next(line)) {
      fail(name_, number_ + 1, "unexpected end of file, expected " + what);
    }
    return line;
  }

  /// Header line of the form key=value; checks the key.
  std::string header(const std::string& key) {
    const std::string line = require(key + "=...");
    if (line.size() < key.size() + 1 || line.compare(0, key.size(), key) != 0 ||
        line[key.size()] != '=') {
      fail(name_, number_, "expected '" + key + "=...', got '" + line + "'");
    }
    return line.substr(key.size() + 1);
  }

  [[noreturn]] void error(const std::string& what) {
    fail(name_, number_, what);
  }

  std::size_t number() const { return number_; }
  const std::string& name() const { return name_; }

 private:
  std::istream& in_;
  std::string name_;
  std::size_t number_ = 0;
};

double parse_double_at(Lines& lines, const std::string& text) {
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    lines.error("invalid number '" + text + "'");
  }
  return value;
}

long parse_int_at(Lines& lines, const std::string& text) {
  long value = 0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    lines.error("invalid integer '" + text + "'");
  }
  return value;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ParseError("cannot open '" + path + "' for writing");
  }
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open '" + path + "' for reading");
  }
  return in;
}

constexpr const char* kDatasetMagic = "trajset-dataset v1";
constexpr const char* kSetMagic = "trajset-set v1";
constexpr const char* kReportMagic = "trajset-report v1";
constexpr const char* kDatasetColumns =
    "scenario_id,agent_id,role,class,t,x,y,observed";

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto result =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc{} || result.ptr != text.data() + text.size()) {
    throw ParseError("invalid number '" + text + "'");
  }
  return value;
}

void write_dataset(const Dataset& dataset, std::ostream& out) {
  out << kDatasetMagic << '\n';
  out << "dt=" << format_double(dataset.dt) << '\n';
  out << "t_past=" << dataset.t_past << '\n';
  out << "t_future=" << dataset.t_future << '\n';
  out << "frame=" << dataset.frame << '\n';
  for (const auto& [key, value] : dataset.meta) {
    out << "meta." << key << '=' << value << '\n';
  }
  std::size_t rows = 0;
  for (const Scenario& s : dataset.scenarios) {
    for (const AgentTrack& t : s.tracks) rows += t.points.size();
  }
  out << "rows=" << rows << '\n';
  out << "columns=" << kDatasetColumns << '\n';
  out << "data\n";
  for (const Scenario& s : dataset.scenarios) {
    for (const AgentTrack& track : s.tracks) {
      for (std::size_t t = 0; t < track.points.size(); ++t) {
        out << s.id << ',' << track.agent_id << ',' << to_string(track.role)
            << ',' << to_string(track.agent_class) << ',' << t << ','
            << format_double(track.points[t].x) << ','
            << format_double(track.points[t].y) << ','
            << (t < track.num_observed ? 1 : 0) << '\n';
      }
    }
  }
}

Dataset read_dataset(std::istream& in, const std::string& name) {
  Lines lines(in, name);
  const std::string magic = lines.require("format magic");
  if (magic != kDatasetMagic) {
    lines.error("unsupported format/version '" + magic + "'");
  }

  Dataset dataset;
  dataset.dt = parse_double_at(lines, lines.header("dt"));
  if (!(dataset.dt > 0.0)) {
    lines.error("dt must be positive");
  }
  dataset.t_past = static_cast<int>(parse_int_at(lines, lines.header("t_past")));
  dataset.t_future =
      static_cast<int>(parse_int_at(lines, lines.header("t_future")));
  if (dataset.t_past < 1 || dataset.t_future < 1) {
    lines.error("t_past and t_future must be at least 1");
  }
  dataset.frame = lines.header("frame");

  std::string line = lines.require("meta or rows header");
  while (line.rfind("meta.", 0) == 0) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      lines.error("malformed meta line '" + line + "'");
    }
    dataset.meta[line.substr(5, eq - 5)] = line.substr(eq + 1);
    line = lines.require("meta or rows header");
  }
  if (line.rfind("rows=", 0) != 0) {
    lines.error("expected 'rows=...', got '" + line + "'");
  }
  const long rows = parse_int_at(lines, line.substr(5));
  if (lines.header("columns") != kDatasetColumns) {
    lines.error("unexpected column list");
  }
  if (lines.require("data marker") != "data") {
    lines.error("expected 'data'");
  }

  Scenario* scenario = nullptr;
  AgentTrack* track = nullptr;
  for (long row = 0; row < rows; ++row) {
    if (!lines.next(line)) {
      fail(name, lines.number() + 1,
           "truncated file: data row " + std::to_string(row + 1) + " of " +
               std::to_string(rows) + " missing");
    }
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != 8) {
      lines.error("data row " + std::to_string(row + 1) + ": expected 8 fields, got " +
                  std::to_string(fields.size()));
    }
    const std::string& scenario_id = fields[0];
    const std::string& agent_id = fields[1];
    const long t = parse_int_at(lines, fields[4]);
    const long observed = parse_int_at(lines, fields[7]);
    if (observed != 0 && observed != 1) {
      lines.error("observed flag must be 0 or 1");
    }

    if (scenario == nullptr || scenario->id != scenario_id) {
      for (const Scenario& seen : dataset.scenarios) {
        if (seen.id == scenario_id) {
          lines.error("scenario " + scenario_id + " rows are not contiguous");
        }
      }
      dataset.scenarios.emplace_back();
      scenario = &dataset.scenarios.back();
      scenario->id = scenario_id;
      track = nullptr;
    }
    if (track == nullptr || track->agent_id != agent_id) {
      for (const AgentTrack& seen : scenario->tracks) {
        if (seen.agent_id == agent_id) {
          lines.error("agent " + agent_id + " rows are not contiguous");
        }
      }
      if (t != 0) {
        lines.error("agent " + agent_id + " must start at timestep 0");
      }
      scenario->tracks.emplace_back();
      track = &scenario->tracks.back();
      track->agent_id = agent_id;
      try {
        track->role = agent_role_from_string(fields[2]);
        track->agent_class = agent_class_from_string(fields[3]);
      } catch (const std::invalid_argument& e) {
        lines.error(e.what());
      }
    } else if (t != static_cast<long>(track->points.size())) {
      lines.error("agent " + agent_id + " timesteps are not contiguous");
    }
    if (observed == 1 &&
        track->num_observed != track->points.size()) {
      lines.error("observed rows must precede future rows");
    }
    track->points.push_back({parse_double_at(lines, fields[5]),
                             parse_double_at(lines, fields[6])});
    if (observed == 1) {
      track->num_observed = track->points.size();
    }
  }
  if (lines.next(line) && !line.empty()) {
    fail(name, lines.number(), "trailing content after last data row");
  }

  try {
    validate(dataset);
  } catch (const std::invalid_argument& e) {
    throw ParseError(name + ": " + e.what());
  }
  return dataset;
}

void write_set(const setgen::TrajectorySet& set, std::ostream& out) {
  out << kSetMagic << '\n';
  out << "horizon=" << set.horizon << '\n';
  out << "dt=" << format_double(set.dt) << '\n';
  out << "group=" << setgen::to_string(set.group) << '\n';
  out << "frame=" << set.frame << '\n';
  out << "algorithm=" << set.meta.algorithm << '\n';
  for (const auto& [key, value] : set.meta.params) {
    out << "param." << key << '=' << value << '\n';
  }
  out << "seed=" << set.meta.seed << '\n';
  out << "source=" << set.meta.source << '\n';
  out << "curve=";
  for (std::size_t i = 0; i < set.meta.achievable_curve.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(set.meta.achievable_curve[i]);
  }
  out << '\n';
  out << "size=" << set.trajectories.size() << '\n';
  out << "data\n";
  for (const Trajectory& traj : set.trajectories) {
    for (std::size_t t = 0; t < traj.points.size(); ++t) {
      if (t > 0) out << ',';
      out << format_double(traj.points[t].x) << ','
          << format_double(traj.points[t].y);
    }
    out << '\n';
  }
}

setgen::TrajectorySet read_set(std::istream& in, const std::string& name) {
  Lines lines(in, name);
  const std::string magic = lines.require("format magic");
  if (magic != kSetMagic) {
    lines.error("unsupported format/version '" + magic + "'");
  }

  setgen::TrajectorySet set;
  set.horizon = static_cast<int>(parse_int_at(lines, lines.header("horizon")));
  if (set.horizon < 1) {
    lines.error("horizon must be at least 1");
  }
  set.dt = parse_double_at(lines, lines.header("dt"));
  if (!(set.dt > 0.0)) {
    lines.error("dt must be positive");
  }
  try {
    set.group = setgen::set_group_from_string(lines.header("group"));
  } catch (const std::invalid_argument& e) {
    lines.error(e.what());
  }
  set.frame = lines.header("frame");
  set.meta.algorithm = lines.header("algorithm");

  std::string line = lines.require("param or seed header");
  while (line.rfind("param.", 0) == 0) {
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      lines.error("malformed param line '" + line + "'");
    }
    set.meta.params[line.substr(6, eq - 6)] = line.substr(eq + 1);
    line = lines.require("param or seed header");
  }
  if (line.rfind("seed=", 0) != 0) {
    lines.error("expected 'seed=...', got '" + line + "'");
  }
  set.meta.seed =
      static_cast<std::uint64_t>(parse_int_at(lines, line.substr(5)));
  set.meta.source = lines.header("source");

  const std::string curve = lines.header("curve");
  if (!curve.empty()) {
    for (const std::string& item : split(curve, ',')) {
      set.meta.achievable_curve.push_back(parse_double_at(lines, item));
    }
  }

  const long size = parse_int_at(lines, lines.header("size"));
  if (size < 1) {
    lines.error("size must be at least 1");
  }
  if (lines.require("data marker") != "data") {
    lines.error("expected 'data'");
  }

  for (long row = 0; row < size; ++row) {
    if (!lines.next(line)) {
      fail(name, lines.number() + 1,
           "truncated file: trajectory row " + std::to_string(row + 1) +
               " of " + std::to_string(size) + " missing");
    }
    const std::vector<std::string> fields = split(line, ',');
    if (fields.size() != static_cast<std::size_t>(set.horizon) * 2) {
      lines.error("trajectory row " + std::to_string(row + 1) + ": expected " +
                  std::to_string(set.horizon * 2) + " values, got " +
                  std::to_string(fields.size()));
    }
    Trajectory traj;
    traj.dt = set.dt;
    traj.points.reserve(set.horizon);
    for (int t = 0; t < set.horizon; ++t) {
      traj.points.push_back({parse_double_at(lines, fields[2 * t]),
                             parse_double_at(lines, fields[2 * t + 1])});
    }
    set.trajectories.push_back(std::move(traj));
  }
  if (lines.next(line) && !line.empty()) {
    fail(name, lines.number(), "trailing content after last trajectory row");
  }
  return set;
}

void write_checkpoint(const model::ClassifierModel& m, std::ostream& out) {
  json doc;
  doc["format"] = "trajset-checkpoint";
  doc["version"] = 1;
  doc["config"] = {
      {"t_past", m.config.t_past},
      {"t_future", m.config.t_future},
      {"feature_size", m.config.feature_size},
      {"decoder_hidden", m.config.decoder_hidden},
      {"set_size", m.config.set_size},
      {"conditional", m.config.conditional},
      {"seed", m.config.seed},
  };
  json layers = json::array();
  for (const model::LinearLayer& layer : m.layers) {
    json entry;
    entry["name"] = layer.name;
    entry["stage"] = model::to_string(layer.stage);
    entry["rows"] = layer.w.rows();
    entry["cols"] = layer.w.cols();
    json w = json::array();
    for (Eigen::Index r = 0; r < layer.w.rows(); ++r) {
      for (Eigen::Index c = 0; c < layer.w.cols(); ++c) {
        w.push_back(layer.w(r, c));
      }
    }
    entry["w"] = std::move(w);
    json b = json::array();
    for (Eigen::Index r = 0; r < layer.b.size(); ++r) {
      b.push_back(layer.b(r));
    }
    entry["b"] = std::move(b);
    layers.push_back(std::move(entry));
  }
  doc["layers"] = std::move(layers);
  out << doc.dump(2) << '\n';
}

model::ClassifierModel read_checkpoint(std::istream& in,
                                       const std::string& name) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
  try {
    if (doc.at("format") != "trajset-checkpoint") {
      throw ParseError(name + ": not a checkpoint file");
    }
    if (doc.at("version") != 1) {
      throw ParseError(name + ": unsupported checkpoint version");
    }
    const json& cfg = doc.at("config");
    model::ModelConfig config;
    config.t_past = cfg.at("t_past").get<int>();
    config.t_future = cfg.at("t_future").get<int>();
    config.feature_size = cfg.at("feature_size").get<int>();
    config.decoder_hidden = cfg.at("decoder_hidden").get<int>();
    config.set_size = cfg.at("set_size").get<int>();
    config.conditional = cfg.at("conditional").get<bool>();
    config.seed = cfg.at("seed").get<std::uint64_t>();

    // Build the reference topology, then overwrite parameters; this checks
    // layer count, order, names and shapes against the config.
    model::ClassifierModel m = model::init_model(config);
    const json& layers = doc.at("layers");
    if (layers.size() != m.layers.size()) {
      throw ParseError(name + ": expected " +
                       std::to_string(m.layers.size()) + " layers, got " +
                       std::to_string(layers.size()));
    }
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
      const json& entry = layers.at(i);
      model::LinearLayer& layer = m.layers[i];
      const std::string layer_name = entry.at("name").get<std::string>();
      if (layer_name != layer.name) {
        throw ParseError(name + ": layer " + std::to_string(i) +
                         " expected '" + layer.name + "', got '" +
                         layer_name + "'");
      }
      try {
        layer.stage =
            model::fusion_stage_from_string(entry.at("stage").get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ParseError(name + ": layer '" + layer_name + "': " + e.what());
      }
      const auto rows = entry.at("rows").get<Eigen::Index>();
      const auto cols = entry.at("cols").get<Eigen::Index>();
      if (rows != layer.w.rows() || cols != layer.w.cols()) {
        throw ParseError(name + ": layer '" + layer_name +
                         "' has unexpected shape");
      }
      const json& w = entry.at("w");
      if (w.size() != static_cast<std::size_t>(rows * cols)) {
        throw ParseError(name + ": layer '" + layer_name +
                         "' weight count does not match shape");
      }
      std::size_t idx = 0;
      for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
          layer.w(r, c) = w.at(idx++).get<double>();
        }
      }
      const json& b = entry.at("b");
      if (b.size() != static_cast<std::size_t>(rows)) {
        throw ParseError(name + ": layer '" + layer_name +
                         "' bias count does not match shape");
      }
      for (Eigen::Index r = 0; r < rows; ++r) {
        layer.b(r) = b.at(static_cast<std::size_t>(r)).get<double>();
      }
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(name + ": " + e.what());
  }
}

void write_report(const metrics::MetricReport& report, std::ostream& out) {
  out << kReportMagic << '\n';
  out << "k=" << report.k << '\n';
  out << "n_sequences=" << report.n_sequences << '\n';
  out << "min_ade=" << format_double(report.min_ade) << '\n';
  out << "min_fde=" << format_double(report.min_fde) << '\n';
  out << "miss_rate=" << format_double(report.miss_rate) << '\n';
  out << "tri=" << format_double(report.tri) << '\n';
}

metrics::MetricReport read_report(std::istream& in, const std::string& name) {
  Lines lines(in, name);
  const std::string magic = lines.require("format magic");
  if (magic != kReportMagic) {
    lines.error("unsupported format/version '" + magic + "'");
  }
  metrics::MetricReport report;
  report.k = static_cast<int>(parse_int_at(lines, lines.header("k")));
  report.n_sequences = static_cast<std::size_t>(
      parse_int_at(lines, lines.header("n_sequences")));
  report.min_ade = parse_double_at(lines, lines.header("min_ade"));
  report.min_fde = parse_double_at(lines, lines.header("min_fde"));
  report.miss_rate = parse_double_at(lines, lines.header("miss_rate"));
  report.tri = parse_double_at(lines, lines.header("tri"));
  return report;
}

void write_dataset(const Dataset& dataset, const std::string& path) {
  auto out = open_out(path);
  write_dataset(dataset, out);
}

Dataset read_dataset(const std::string& path) {
  auto in = open_in(path);
  return read_dataset(in, path);
}

void write_set(const setgen::TrajectorySet& set, const std::string& path) {
  auto out = open_out(path);
  write_set(set, out);
}

setgen::TrajectorySet read_set(const std::string& path) {
  auto in = open_in(path);
  return read_set(in, path);
}

void write_checkpoint(const model::ClassifierModel& m,
                      const std::string& path) {
  auto out = open_out(path);
  write_checkpoint(m, out);
}

model::ClassifierModel read_checkpoint(const std::string& path) {
  auto in = open_in(path);
  return read_checkpoint(in, path);
}

void write_report(const metrics::MetricReport& report,
                  const std::string& path) {
  auto out = open_out(path);
  write_report(report, out);
}

metrics::MetricReport read_report(const std::string& path) {
  auto in = open_in(path);
  return read_report(in, path);
}

}  // namespace trajset::io
