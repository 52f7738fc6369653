#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "trajset/io.hpp"
#include "trajset/metrics.hpp"
#include "trajset/model.hpp"
#include "trajset/nms.hpp"
#include "trajset/setgen.hpp"
#include "trajset/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace trajset;

namespace {

std::string with_suffix(const std::string& path, const std::string& tag,
                        const std::string& new_ext = "") {
  fs::path p(path);
  const std::string ext = new_ext.empty() ? p.extension().string() : new_ext;
  fs::path out = p.parent_path() / p.stem();
  return out.string() + tag + ext;
}

void write_curve_csv(const std::vector<double>& curve,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << "iteration,achievable\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << io::format_double(curve[i]) << '\n';
  }
}

/// Loads one or more set files and concatenates them into the classification
/// set, in command-line order. Horizons and sampling must agree.
setgen::TrajectorySet load_union_set(const std::vector<std::string>& paths) {
  setgen::TrajectorySet merged;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    setgen::TrajectorySet part = io::read_set(paths[i]);
    if (i == 0) {
      merged = std::move(part);
      continue;
    }
    if (part.horizon != merged.horizon || part.dt != merged.dt) {
      throw std::runtime_error("set '" + paths[i] +
                               "' horizon/dt does not match the first set");
    }
    merged.group = setgen::SetGroup::Mixed;
    merged.meta.algorithm = "union";
    merged.trajectories.insert(merged.trajectories.end(),
                               part.trajectories.begin(),
                               part.trajectories.end());
  }
  return merged;
}

void check_compatible(const Dataset& dataset,
                      const setgen::TrajectorySet& set) {
  if (set.horizon != dataset.t_future) {
    throw std::runtime_error("set horizon " + std::to_string(set.horizon) +
                             " does not match dataset t_future " +
                             std::to_string(dataset.t_future));
  }
}

json report_to_json(const metrics::MetricReport& report) {
  return json{{"k", report.k},
              {"n_sequences", report.n_sequences},
              {"min_ade", report.min_ade},
              {"min_fde", report.min_fde},
              {"miss_rate", report.miss_rate},
              {"tri", report.tri}};
}

void print_report(const metrics::MetricReport& report) {
  std::ostringstream out;
  io::write_report(report, out);
  std::cout << out.str();
}

struct SynthArgs {
  std::string out;
  std::uint64_t seed = 0;
  std::size_t interaction = 0;
  synth::DatasetProfile profile;
  bool json_out = false;
};

int run_synth(const SynthArgs& args) {
  Dataset dataset;
  if (args.interaction > 0) {
    dataset = synth::make_interaction_dataset(
        args.interaction, args.seed, args.profile.t_past,
        args.profile.t_future, args.profile.dt);
  } else {
    synth::DatasetProfile profile = args.profile;
    profile.seed = args.seed;
    dataset = synth::make_dataset(profile);
  }
  io::write_dataset(dataset, args.out);
  if (args.json_out) {
    std::cout << json{{"out", args.out},
                      {"scenarios", dataset.scenarios.size()},
                      {"t_past", dataset.t_past},
                      {"t_future", dataset.t_future},
                      {"generator", dataset.meta.at("generator")}}
                     .dump()
              << '\n';
  } else {
    std::cout << "wrote " << dataset.scenarios.size() << " scenarios to "
              << args.out << '\n';
  }
  return 0;
}

struct GenerateArgs {
  std::string dataset_path;
  std::string out;
  std::size_t size = 0;
  std::string algorithm = "metric";
  std::string metric = "ade";
  double epsilon = 2.0;
  bool class_specific = false;
  std::size_t subsample_n = 0;
  std::uint64_t seed = 0;
  std::size_t matrix_threshold = 20000;
  unsigned threads = 0;
  bool json_out = false;
};

int run_generate_set(const GenerateArgs& args) {
  const Dataset dataset = io::read_dataset(args.dataset_path);
  std::vector<LabeledTrajectory> labeled = labeled_futures(dataset);
  if (args.subsample_n > 0) {
    const auto idx =
        setgen::sample_indices(labeled.size(), args.subsample_n, args.seed);
    std::vector<LabeledTrajectory> sampled;
    sampled.reserve(idx.size());
    for (std::size_t i : idx) sampled.push_back(labeled[i]);
    labeled = std::move(sampled);
  }

  setgen::GenOptions opts;
  opts.metric = args.metric == "fde" ? setgen::SetMetric::Fde
                                     : setgen::SetMetric::Ade;
  opts.matrix_threshold = args.matrix_threshold;
  opts.threads = args.threads;
  opts.seed = args.seed;

  json out_json = json::array();
  if (args.algorithm == "bagging") {
    std::vector<Trajectory> futures;
    futures.reserve(labeled.size());
    for (const LabeledTrajectory& item : labeled) {
      futures.push_back(item.trajectory);
    }
    setgen::TrajectorySet set =
        setgen::generate_set_bagging(futures, args.epsilon);
    set.frame = dataset.frame;
    set.meta.source = args.dataset_path;
    io::write_set(set, args.out);
    out_json.push_back({{"out", args.out}, {"size", set.size()}});
    if (!args.json_out) {
      std::cout << "bagging set: size " << set.size() << " -> " << args.out
                << '\n';
    }
  } else if (args.class_specific) {
    const auto results =
        setgen::generate_class_specific(labeled, args.size, opts);
    for (const auto& [group, gen] : results) {
      const std::string tag = "." + to_string(group);
      const std::string path = with_suffix(args.out, tag);
      setgen::TrajectorySet set = gen.set;
      set.frame = dataset.frame;
      set.meta.source = args.dataset_path;
      io::write_set(set, path);
      const std::string curve_path = with_suffix(args.out, tag, ".curve.csv");
      write_curve_csv(gen.trace.achievable, curve_path);
      out_json.push_back({{"out", path},
                          {"group", to_string(group)},
                          {"size", set.size()},
                          {"achievable", gen.trace.achievable.back()},
                          {"curve", curve_path}});
      if (!args.json_out) {
        std::cout << to_string(group) << " set: size " << set.size()
                  << ", achievable minADE "
                  << io::format_double(gen.trace.achievable.back()) << " -> "
                  << path << '\n';
      }
    }
  } else {
    std::vector<Trajectory> futures;
    futures.reserve(labeled.size());
    for (const LabeledTrajectory& item : labeled) {
      futures.push_back(item.trajectory);
    }
    setgen::GenerationResult gen =
        setgen::generate_set_metric_driven(futures, args.size, opts);
    gen.set.frame = dataset.frame;
    gen.set.meta.source = args.dataset_path;
    io::write_set(gen.set, args.out);
    const std::string curve_path = with_suffix(args.out, "", ".curve.csv");
    write_curve_csv(gen.trace.achievable, curve_path);
    out_json.push_back(
        {{"out", args.out},
         {"size", gen.set.size()},
         {"achievable", gen.trace.achievable.back()},
         {"strategy", gen.set.meta.params.at("strategy")},
         {"curve", curve_path}});
    if (!args.json_out) {
      std::cout << "metric-driven set: size " << gen.set.size()
                << ", achievable minADE "
                << io::format_double(gen.trace.achievable.back()) << " -> "
                << args.out << '\n';
    }
  }
  if (args.json_out) {
    std::cout << out_json.dump() << '\n';
  }
  return 0;
}

struct EvalSetArgs {
  std::string dataset_path;
  std::vector<std::string> set_paths;
  bool json_out = false;
};

int run_eval_set(const EvalSetArgs& args) {
  const Dataset dataset = io::read_dataset(args.dataset_path);
  const std::vector<LabeledTrajectory> labeled = labeled_futures(dataset);
  json out_json = json::array();
  for (const std::string& path : args.set_paths) {
    const setgen::TrajectorySet set = io::read_set(path);
    check_compatible(dataset, set);
    // Group-tagged sets are scored on their own group's futures.
    std::vector<Trajectory> futures;
    for (const LabeledTrajectory& item : labeled) {
      if (set.group == setgen::SetGroup::Mixed ||
          setgen::set_group_of(group_of(item.agent_class)) == set.group) {
        futures.push_back(item.trajectory);
      }
    }
    if (futures.empty()) {
      throw std::runtime_error("no futures in dataset for group '" +
                               setgen::to_string(set.group) + "'");
    }
    const double lb = metrics::lb_minade(futures, set);
    out_json.push_back({{"set", path},
                        {"group", setgen::to_string(set.group)},
                        {"size", set.size()},
                        {"n_futures", futures.size()},
                        {"lb_minade", lb}});
    if (!args.json_out) {
      std::cout << path << ": LB minADE " << io::format_double(lb) << " ("
                << setgen::to_string(set.group) << ", size " << set.size()
                << ", " << futures.size() << " futures)\n";
    }
  }
  if (args.json_out) {
    std::cout << out_json.dump() << '\n';
  }
  return 0;
}

struct TrainArgs {
  std::string dataset_path;
  std::vector<std::string> set_paths;
  std::string out;
  bool conditional = false;
  int feature_size = 128;
  int hidden = 4096;
  model::TrainConfig config;
  bool json_out = false;
};

int run_train(const TrainArgs& args) {
  const Dataset dataset = io::read_dataset(args.dataset_path);
  const setgen::TrajectorySet set = load_union_set(args.set_paths);
  check_compatible(dataset, set);

  model::ModelConfig config;
  config.t_past = dataset.t_past;
  config.t_future = dataset.t_future;
  config.feature_size = args.feature_size;
  config.decoder_hidden = args.hidden;
  config.set_size = static_cast<int>(set.size());
  config.conditional = args.conditional;
  config.seed = args.config.seed;

  model::ClassifierModel m = model::init_model(config);
  const std::vector<model::TrainSample> samples =
      model::build_training_samples(dataset, set, args.conditional);
  const model::TrainResult result = train(m, samples, args.config);
  io::write_checkpoint(m, args.out);

  if (args.json_out) {
    std::cout << json{{"out", args.out},
                      {"epoch_loss", result.epoch_loss},
                      {"samples", samples.size()},
                      {"set_size", set.size()},
                      {"conditional", args.conditional}}
                     .dump()
              << '\n';
  } else {
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      std::cout << "epoch " << (e + 1) << " loss "
                << io::format_double(result.epoch_loss[e]) << '\n';
    }
    std::cout << "wrote checkpoint " << args.out << '\n';
  }
  return 0;
}

struct PredictArgs {
  std::string checkpoint_path;
  std::string dataset_path;
  std::vector<std::string> set_paths;
  std::size_t k = 6;
  double r_nms = 1.8;
  bool no_nms = false;
  std::string out_csv;
  std::string out_report;
  bool json_out = false;
};

int run_predict(const PredictArgs& args) {
  const model::ClassifierModel m = io::read_checkpoint(args.checkpoint_path);
  const Dataset dataset = io::read_dataset(args.dataset_path);
  const setgen::TrajectorySet set = load_union_set(args.set_paths);
  check_compatible(dataset, set);
  if (static_cast<int>(set.size()) != m.config.set_size) {
    throw std::runtime_error(
        "checkpoint expects set size " + std::to_string(m.config.set_size) +
        ", loaded " + std::to_string(set.size()));
  }
  const double r_nms = args.no_nms ? 0.0 : args.r_nms;

  const std::vector<model::TrainSample> samples =
      model::build_training_samples(dataset, set, m.config.conditional);

  std::vector<std::vector<Trajectory>> predictions;
  std::vector<Trajectory> ground_truth;
  std::vector<AgentClass> classes;
  std::vector<Point2> last_observed;
  std::ofstream csv;
  if (!args.out_csv.empty()) {
    csv.open(args.out_csv, std::ios::binary);
    if (!csv) {
      throw std::runtime_error("cannot open '" + args.out_csv + "'");
    }
    csv << "scenario_id,rank,set_index,probability,endpoint_x,endpoint_y,"
           "fde,gt_endpoint_x,gt_endpoint_y\n";
  }

  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i) {
    const Scenario& scenario = dataset.scenarios[i];
    const model::PredictionResult result = model::predict(
        m, samples[i].features, samples[i].av_features, set, args.k, r_nms);
    std::vector<Trajectory> ranked;
    ranked.reserve(result.selected.size());
    for (const nms::Selection& sel : result.selected) {
      ranked.push_back(set.trajectories[sel.index]);
    }
    const Trajectory gt = dataset.focal_future(scenario);
    if (csv.is_open()) {
      for (std::size_t r = 0; r < result.selected.size(); ++r) {
        const Point2 end = ranked[r].points.back();
        csv << scenario.id << ',' << r << ',' << result.selected[r].index
            << ',' << io::format_double(result.selected[r].probability) << ','
            << io::format_double(end.x) << ',' << io::format_double(end.y)
            << ',' << io::format_double(fde(ranked[r], gt)) << ','
            << io::format_double(gt.points.back().x) << ','
            << io::format_double(gt.points.back().y) << '\n';
      }
    }
    const AgentTrack& focal = scenario.focal();
    predictions.push_back(std::move(ranked));
    ground_truth.push_back(gt);
    classes.push_back(focal.agent_class);
    last_observed.push_back(focal.points[focal.num_observed - 1]);
  }

  metrics::MetricReport report = metrics::eval_multimodal(
      predictions, ground_truth, static_cast<int>(args.k));
  report.tri = metrics::tri(predictions, classes, last_observed,
                            static_cast<int>(args.k));
  if (!args.out_report.empty()) {
    io::write_report(report, args.out_report);
  }
  if (args.json_out) {
    std::cout << report_to_json(report).dump() << '\n';
  } else {
    print_report(report);
  }
  return 0;
}

struct RccArgs {
  std::string checkpoint_path;
  bool json_out = false;
};

int run_report_rcc(const RccArgs& args) {
  const model::ClassifierModel m = io::read_checkpoint(args.checkpoint_path);
  const double value = metrics::rcc(m);
  if (args.json_out) {
    std::cout << json{{"rcc", value}}.dump() << '\n';
  } else {
    std::cout << "RCC " << io::format_double(value) << " %\n";
  }
  return 0;
}

struct BenchArgs {
  std::string dataset_path;
  std::vector<std::size_t> sizes;
  std::size_t subsample_n = 0;
  std::uint64_t seed = 0;
  std::size_t matrix_threshold = 20000;
  unsigned threads = 0;
  bool json_out = false;
};

int run_bench(const BenchArgs& args) {
  const Dataset dataset = io::read_dataset(args.dataset_path);
  std::vector<Trajectory> futures = dataset.futures();
  if (args.subsample_n > 0) {
    futures = setgen::subsample(futures, args.subsample_n, args.seed);
  }
  setgen::GenOptions opts;
  opts.matrix_threshold = args.matrix_threshold;
  opts.threads = args.threads;
  opts.seed = args.seed;

  json out_json = json::array();
  for (std::size_t s : args.sizes) {
    const auto start = std::chrono::steady_clock::now();
    const setgen::GenerationResult gen =
        setgen::generate_set_metric_driven(futures, s, opts);
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    const std::string strategy = gen.set.meta.params.at("strategy");
    out_json.push_back({{"k", futures.size()},
                        {"size", s},
                        {"ms", elapsed},
                        {"strategy", strategy},
                        {"achievable", gen.trace.achievable.back()}});
    if (!args.json_out) {
      std::cout << "k=" << futures.size() << " s=" << s << ": " << elapsed
                << " ms, " << strategy << " strategy, achievable minADE "
                << io::format_double(gen.trace.achievable.back()) << '\n';
    }
  }
  if (args.json_out) {
    std::cout << out_json.dump() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Set-based trajectory prediction toolkit"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth_cmd =
      app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", synth_args.out, "Output dataset path")
      ->required();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed");
  synth_cmd->add_option("--n-vehicles", synth_args.profile.n_vehicles,
                        "Vehicle scenarios");
  synth_cmd->add_option("--n-pedestrians", synth_args.profile.n_pedestrians,
                        "Pedestrian scenarios");
  synth_cmd->add_option("--n-buses", synth_args.profile.n_buses,
                        "Bus scenarios");
  synth_cmd->add_option("--n-motorcyclists",
                        synth_args.profile.n_motorcyclists,
                        "Motorcyclist scenarios");
  synth_cmd->add_option("--n-cyclists", synth_args.profile.n_cyclists,
                        "Cyclist scenarios");
  synth_cmd->add_option("--t-past", synth_args.profile.t_past,
                        "Observed timesteps");
  synth_cmd->add_option("--t-future", synth_args.profile.t_future,
                        "Future timesteps");
  synth_cmd->add_option("--dt", synth_args.profile.dt, "Seconds per step");
  synth_cmd->add_option("--vehicle-speed-min",
                        synth_args.profile.vehicle_speed_min,
                        "Vehicle speed range lower bound, m/s");
  synth_cmd->add_option("--vehicle-speed-max",
                        synth_args.profile.vehicle_speed_max,
                        "Vehicle speed range upper bound, m/s");
  synth_cmd->add_option("--w-straight", synth_args.profile.w_straight,
                        "Maneuver weight: straight");
  synth_cmd->add_option("--w-turn", synth_args.profile.w_turn,
                        "Maneuver weight: turn");
  synth_cmd->add_option("--w-stop", synth_args.profile.w_stop,
                        "Maneuver weight: stop");
  synth_cmd->add_option("--w-lane-change", synth_args.profile.w_lane_change,
                        "Maneuver weight: lane change");
  synth_cmd->add_option(
      "--interaction", synth_args.interaction,
      "Generate this many AV-interaction scenarios instead of the profile");
  synth_cmd->add_flag("--json", synth_args.json_out, "JSON output");

  GenerateArgs gen_args;
  CLI::App* gen_cmd =
      app.add_subcommand("generate-set", "Build a trajectory set");
  gen_cmd->add_option("--dataset", gen_args.dataset_path, "Input dataset")
      ->required();
  gen_cmd->add_option("--out", gen_args.out, "Output set path")->required();
  gen_cmd->add_option("--size", gen_args.size,
                      "Set size (metric algorithm)");
  gen_cmd->add_option("--algorithm", gen_args.algorithm, "metric | bagging")
      ->check(CLI::IsMember({"metric", "bagging"}));
  gen_cmd->add_option("--metric", gen_args.metric,
                      "Driving metric for the greedy algorithm: ade | fde")
      ->check(CLI::IsMember({"ade", "fde"}));
  gen_cmd->add_option("--epsilon", gen_args.epsilon,
                      "Coverage tolerance (bagging)");
  gen_cmd->add_flag("--class-specific", gen_args.class_specific,
                    "One set per class group");
  gen_cmd->add_option("--subsample", gen_args.subsample_n,
                      "Subsample this many futures first");
  gen_cmd->add_option("--seed", gen_args.seed, "Subsample seed");
  gen_cmd->add_option("--matrix-threshold", gen_args.matrix_threshold,
                      "Materialize the pairwise matrix up to this k");
  gen_cmd->add_option("--threads", gen_args.threads,
                      "Worker threads (0 = hardware)");
  gen_cmd->add_flag("--json", gen_args.json_out, "JSON output");

  EvalSetArgs eval_args;
  CLI::App* eval_cmd =
      app.add_subcommand("eval-set", "Lower-bound minADE of sets");
  eval_cmd->add_option("--dataset", eval_args.dataset_path, "Input dataset")
      ->required();
  eval_cmd->add_option("--set", eval_args.set_paths, "Set file(s)")
      ->required();
  eval_cmd->add_flag("--json", eval_args.json_out, "JSON output");

  TrainArgs train_args;
  CLI::App* train_cmd =
      app.add_subcommand("train", "Train the set classifier");
  train_cmd->add_option("--dataset", train_args.dataset_path, "Training dataset")
      ->required();
  train_cmd
      ->add_option("--set", train_args.set_paths,
                   "Set file(s); multiple files form one classification set")
      ->required();
  train_cmd->add_option("--out", train_args.out, "Output checkpoint")
      ->required();
  train_cmd->add_flag("--conditional", train_args.conditional,
                      "Late-fusion conditioning on the AV future");
  train_cmd->add_option("--feature-size", train_args.feature_size,
                        "Encoder feature width");
  train_cmd->add_option("--hidden", train_args.hidden,
                        "Decoder hidden width");
  train_cmd->add_option("--epochs1", train_args.config.epochs_initial,
                        "Epochs at the initial learning rate");
  train_cmd->add_option("--epochs2", train_args.config.epochs_reduced,
                        "Epochs at the reduced learning rate");
  train_cmd->add_option("--lr1", train_args.config.lr_initial,
                        "Initial learning rate");
  train_cmd->add_option("--lr2", train_args.config.lr_reduced,
                        "Reduced learning rate");
  train_cmd->add_option("--batch", train_args.config.batch_size,
                        "Batch size");
  train_cmd->add_option("--seed", train_args.config.seed,
                        "Init/shuffle seed");
  train_cmd->add_flag("--json", train_args.json_out, "JSON output");

  PredictArgs predict_args;
  CLI::App* predict_cmd =
      app.add_subcommand("predict", "Predict and evaluate");
  predict_cmd
      ->add_option("--checkpoint", predict_args.checkpoint_path, "Checkpoint")
      ->required();
  predict_cmd->add_option("--dataset", predict_args.dataset_path, "Dataset")
      ->required();
  predict_cmd
      ->add_option("--set", predict_args.set_paths,
                   "Set file(s), same order as at training time")
      ->required();
  predict_cmd->add_option("--k", predict_args.k, "Number of modes");
  predict_cmd->add_option("--r-nms", predict_args.r_nms,
                          "Suppression radius in meters");
  predict_cmd->add_flag("--no-nms", predict_args.no_nms,
                        "Disable suppression (r_nms = 0)");
  predict_cmd->add_option("--out-csv", predict_args.out_csv,
                          "Per-scenario prediction CSV");
  predict_cmd->add_option("--out-report", predict_args.out_report,
                          "Write the metric report to this path");
  predict_cmd->add_flag("--json", predict_args.json_out, "JSON output");

  RccArgs rcc_args;
  CLI::App* rcc_cmd = app.add_subcommand(
      "report-rcc", "Remaining conditional capacity of a checkpoint");
  rcc_cmd->add_option("--checkpoint", rcc_args.checkpoint_path, "Checkpoint")
      ->required();
  rcc_cmd->add_flag("--json", rcc_args.json_out, "JSON output");

  BenchArgs bench_args;
  CLI::App* bench_cmd =
      app.add_subcommand("bench", "Set-generation benchmark sweep");
  bench_cmd->add_option("--dataset", bench_args.dataset_path, "Dataset")
      ->required();
  bench_cmd->add_option("--sizes", bench_args.sizes, "Set sizes to sweep")
      ->required();
  bench_cmd->add_option("--subsample", bench_args.subsample_n,
                        "Subsample this many futures first");
  bench_cmd->add_option("--seed", bench_args.seed, "Subsample seed");
  bench_cmd->add_option("--matrix-threshold", bench_args.matrix_threshold,
                        "Materialize the pairwise matrix up to this k");
  bench_cmd->add_option("--threads", bench_args.threads,
                        "Worker threads (0 = hardware)");
  bench_cmd->add_flag("--json", bench_args.json_out, "JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed()) return run_synth(synth_args);
    if (gen_cmd->parsed()) return run_generate_set(gen_args);
    if (eval_cmd->parsed()) return run_eval_set(eval_args);
    if (train_cmd->parsed()) return run_train(train_args);
    if (predict_cmd->parsed()) return run_predict(predict_args);
    if (rcc_cmd->parsed()) return run_report_rcc(rcc_args);
    if (bench_cmd->parsed()) return run_bench(bench_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
