#include <doctest.h>

#include <stdexcept>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "trajset/io.hpp"
#include "trajset/synth.hpp"

using namespace trajset;
using trajset::io::ParseError;

namespace {

std::string dump_dataset(const Dataset& d) {
  std::ostringstream out;
  io::write_dataset(d, out);
  return out.str();
}

std::string dump_set(const setgen::TrajectorySet& s) {
  std::ostringstream out;
  io::write_set(s, out);
  return out.str();
}

bool equal_datasets(const Dataset& a, const Dataset& b) {
  if (a.dt != b.dt || a.t_past != b.t_past || a.t_future != b.t_future ||
      a.frame != b.frame || a.meta != b.meta ||
      a.scenarios.size() != b.scenarios.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.scenarios.size(); ++i) {
    const Scenario& sa = a.scenarios[i];
    const Scenario& sb = b.scenarios[i];
    if (sa.id != sb.id || sa.tracks.size() != sb.tracks.size()) return false;
    for (std::size_t t = 0; t < sa.tracks.size(); ++t) {
      const AgentTrack& ta = sa.tracks[t];
      const AgentTrack& tb = sb.tracks[t];
      if (ta.agent_id != tb.agent_id || ta.role != tb.role ||
          ta.agent_class != tb.agent_class ||
          ta.num_observed != tb.num_observed ||
          ta.points.size() != tb.points.size()) {
        return false;
      }
      for (std::size_t p = 0; p < ta.points.size(); ++p) {
        if (ta.points[p].x != tb.points[p].x ||
            ta.points[p].y != tb.points[p].y) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("double formatting round-trips exactly") {
  Rng rng(1);
  for (int trial = 0; trial < 2000; ++trial) {
    const double value = rng.normal(0.0, 1e3) * std::pow(10.0, rng.uniform(-9, 9));
    CHECK(io::parse_double(io::format_double(value)) == value);
  }
  CHECK(io::format_double(0.25) == "0.25");
  CHECK_THROWS_AS(io::parse_double("1.2x"), ParseError);
}

TEST_CASE("dataset round-trip is value-identical and byte-deterministic") {
  synth::DatasetProfile profile;
  profile.n_vehicles = 15;
  profile.n_pedestrians = 10;
  profile.seed = 4;
  const Dataset original = make_dataset(profile);

  const std::string bytes = dump_dataset(original);
  CHECK(bytes == dump_dataset(original));

  std::istringstream in(bytes);
  const Dataset restored = io::read_dataset(in, "roundtrip");
  CHECK(equal_datasets(original, restored));
  CHECK(dump_dataset(restored) == bytes);
}

TEST_CASE("interaction dataset with av tracks round-trips") {
  const Dataset original = synth::make_interaction_dataset(12, 9);
  std::istringstream in(dump_dataset(original));
  const Dataset restored = io::read_dataset(in, "roundtrip");
  CHECK(equal_datasets(original, restored));
}

TEST_CASE("truncated dataset names the missing row") {
  synth::DatasetProfile profile;
  profile.n_vehicles = 2;
  profile.n_pedestrians = 0;
  const Dataset original = make_dataset(profile);
  std::string bytes = dump_dataset(original);
  // Drop the last two lines.
  bytes.pop_back();
  bytes.erase(bytes.find_last_of('\n'));
  bytes.erase(bytes.find_last_of('\n') + 1);

  std::istringstream in(bytes);
  CHECK_THROWS_WITH_AS(io::read_dataset(in, "cut"),
                       doctest::Contains("truncated"), ParseError);
}

TEST_CASE("dataset rejects bad headers and classes") {
  SUBCASE("wrong magic") {
    std::istringstream in("trajset-dataset v9\n");
    CHECK_THROWS_WITH_AS(io::read_dataset(in, "bad"),
                         doctest::Contains("unsupported"), ParseError);
  }
  SUBCASE("unknown class") {
    synth::DatasetProfile profile;
    profile.n_vehicles = 1;
    profile.n_pedestrians = 0;
    std::string bytes = dump_dataset(make_dataset(profile));
    const std::size_t pos = bytes.find("vehicle");
    bytes.replace(pos, 7, "tricycl");
    std::istringstream in(bytes);
    CHECK_THROWS_WITH_AS(io::read_dataset(in, "bad"),
                         doctest::Contains("tricycl"), ParseError);
  }
}

TEST_CASE("set round-trip preserves metadata and trajectories") {
  Rng rng(6);
  const std::vector<Trajectory> dataset = testing::random_dataset(rng, 30, 8);
  setgen::GenOptions opts;
  opts.seed = 77;
  setgen::GenerationResult gen =
      setgen::generate_set_metric_driven(dataset, 6, opts);
  gen.set.group = setgen::SetGroup::Vulnerable;
  gen.set.meta.source = "unit-test";

  const std::string bytes = dump_set(gen.set);
  CHECK(bytes == dump_set(gen.set));
  std::istringstream in(bytes);
  const setgen::TrajectorySet restored = io::read_set(in, "roundtrip");

  CHECK(restored.horizon == gen.set.horizon);
  CHECK(restored.dt == gen.set.dt);
  CHECK(restored.group == gen.set.group);
  CHECK(restored.frame == gen.set.frame);
  CHECK(restored.meta.algorithm == gen.set.meta.algorithm);
  CHECK(restored.meta.params == gen.set.meta.params);
  CHECK(restored.meta.seed == gen.set.meta.seed);
  CHECK(restored.meta.source == gen.set.meta.source);
  CHECK(restored.meta.achievable_curve == gen.set.meta.achievable_curve);
  REQUIRE(restored.size() == gen.set.size());
  for (std::size_t i = 0; i < restored.size(); ++i) {
    CHECK(testing::same_points(restored.trajectories[i],
                               gen.set.trajectories[i]));
  }
  CHECK(dump_set(restored) == bytes);
}

TEST_CASE("set file with fewer rows than the header is rejected") {
  Rng rng(8);
  const std::vector<Trajectory> dataset = testing::random_dataset(rng, 12, 3);
  setgen::TrajectorySet set =
      setgen::generate_set_metric_driven(dataset, 10).set;
  std::string bytes = dump_set(set);
  bytes.pop_back();
  bytes.erase(bytes.find_last_of('\n') + 1);  // drop row 10 of 10
  std::istringstream in(bytes);
  CHECK_THROWS_WITH_AS(io::read_set(in, "short"),
                       doctest::Contains("row 10 of 10"), ParseError);
}

TEST_CASE("checkpoint round-trip restores the exact model") {
  model::ModelConfig config;
  config.t_past = 5;
  config.t_future = 8;
  config.feature_size = 12;
  config.decoder_hidden = 24;
  config.set_size = 10;
  config.conditional = true;
  config.seed = 3;
  const model::ClassifierModel original = model::init_model(config);

  std::ostringstream out;
  io::write_checkpoint(original, out);
  const std::string bytes = out.str();

  std::ostringstream again;
  io::write_checkpoint(original, again);
  CHECK(bytes == again.str());

  std::istringstream in(bytes);
  const model::ClassifierModel restored = io::read_checkpoint(in, "ckpt");
  CHECK(restored.config.conditional == original.config.conditional);
  CHECK(restored.config.seed == original.config.seed);
  REQUIRE(restored.layers.size() == original.layers.size());
  for (std::size_t l = 0; l < restored.layers.size(); ++l) {
    CHECK(restored.layers[l].name == original.layers[l].name);
    CHECK(restored.layers[l].stage == original.layers[l].stage);
    CHECK(restored.layers[l].w == original.layers[l].w);
    CHECK(restored.layers[l].b == original.layers[l].b);
  }
}

TEST_CASE("checkpoint rejects unknown fusion labels and versions") {
  model::ModelConfig config;
  config.t_past = 4;
  config.t_future = 4;
  config.feature_size = 6;
  config.decoder_hidden = 8;
  config.set_size = 4;
  const model::ClassifierModel m = model::init_model(config);
  std::ostringstream out;
  io::write_checkpoint(m, out);

  SUBCASE("unknown stage label names the layer") {
    std::string bytes = out.str();
    bytes.replace(bytes.find("pre_fusion"), 10, "mid_fusion");
    std::istringstream in(bytes);
    CHECK_THROWS_WITH_AS(io::read_checkpoint(in, "ckpt"),
                         doctest::Contains("enc.0"), ParseError);
  }
  SUBCASE("version mismatch is rejected") {
    std::string bytes = out.str();
    bytes.replace(bytes.find("\"version\": 1"), 12, "\"version\": 2");
    std::istringstream in(bytes);
    CHECK_THROWS_WITH_AS(io::read_checkpoint(in, "ckpt"),
                         doctest::Contains("version"), ParseError);
  }
}

TEST_CASE("golden sample files parse and re-serialize byte-identically") {
  const char* root = std::getenv("TRAJSET_SOURCE_DIR");
  const std::string dir =
      (root != nullptr ? std::string(root) : std::string(".")) +
      "/docs/golden/";
  const auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };

  CHECK(dump_dataset(io::read_dataset(dir + "sample.dataset")) ==
        slurp(dir + "sample.dataset"));
  CHECK(dump_set(io::read_set(dir + "sample.set")) ==
        slurp(dir + "sample.set"));
  {
    std::ostringstream out;
    io::write_checkpoint(io::read_checkpoint(dir + "sample.checkpoint"), out);
    CHECK(out.str() == slurp(dir + "sample.checkpoint"));
  }
  {
    std::ostringstream out;
    io::write_report(io::read_report(dir + "sample.report"), out);
    CHECK(out.str() == slurp(dir + "sample.report"));
  }
}

TEST_CASE("report round-trip") {
  metrics::MetricReport report;
  report.k = 6;
  report.n_sequences = 123;
  report.min_ade = 1.25;
  report.min_fde = 2.5;
  report.miss_rate = 31.25;
  report.tri = 2.75;

  std::ostringstream out;
  io::write_report(report, out);
  std::istringstream in(out.str());
  const metrics::MetricReport restored = io::read_report(in, "report");
  CHECK(restored.k == report.k);
  CHECK(restored.n_sequences == report.n_sequences);
  CHECK(restored.min_ade == report.min_ade);
  CHECK(restored.min_fde == report.min_fde);
  CHECK(restored.miss_rate == report.miss_rate);
  CHECK(restored.tri == report.tri);
}
