#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajset/dataset.hpp"
#include "trajset/nms.hpp"
#include "trajset/setgen.hpp"

namespace trajset::model {

/// Where a parameter block sits relative to the fusion point. Pre-fusion
/// blocks can be reused across planned AV futures; conditional blocks must
/// be re-executed per plan.
enum class FusionStage { PreFusion, Conditional };

std::string to_string(FusionStage stage);
FusionStage fusion_stage_from_string(const std::string& s);

struct LinearLayer {
  std::string name;
  FusionStage stage = FusionStage::PreFusion;
  Eigen::MatrixXd w;
  Eigen::VectorXd b;

  std::size_t parameter_count() const {
    return static_cast<std::size_t>(w.size() + b.size());
  }
};

struct ModelConfig {
  int t_past = 20;
  int t_future = 60;
  int feature_size = 128;   // encoder output width F
  int decoder_hidden = 512; // hidden width of the classification head
  int set_size = 0;         // decoder output width s
  bool conditional = false; // late-fusion AV-future branch present
  std::uint64_t seed = 0;

  int agent_input_width() const { return (t_past - 1) * 2 + 5; }
  int av_input_width() const { return t_future * 2; }
  int decoder_input_width() const {
    return conditional ? 2 * feature_size : feature_size;
  }
};

/// Set-classification network: an agent-feature encoder, an optional
/// AV-future encoder whose output is concatenated just before the decoder
/// (late fusion), and an MLP decoder with a softmax over the trajectory set.
struct ClassifierModel {
  ModelConfig config;
  // enc.0, enc.1, [avenc.0, avenc.1,] dec.0, dec.1
  std::vector<LinearLayer> layers;

  std::size_t decoder_begin() const { return config.conditional ? 4 : 2; }
};

/// Seeded initialization: weights uniform in +-(fan_in)^(-1/2), zero biases.
ClassifierModel init_model(const ModelConfig& config);

/// Multiply-accumulate counter used to assert that prediction cost does not
/// depend on k.
struct OpCounts {
  std::uint64_t fma = 0;
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Pre-fusion pass: agent features -> reusable scene encoding.
Eigen::VectorXd encode(const ClassifierModel& model,
                       const Eigen::VectorXd& features,
                       OpCounts* ops = nullptr);

/// Conditional pass: scene encoding (+ AV-future features for conditional
/// models) -> probability vector over the set.
Eigen::VectorXd condition(const ClassifierModel& model,
                          const Eigen::VectorXd& encoded,
                          const std::optional<Eigen::VectorXd>& av_features,
                          OpCounts* ops = nullptr);

/// Single-pass forward; identical to condition(encode(features), av).
Eigen::VectorXd forward(const ClassifierModel& model,
                        const Eigen::VectorXd& features,
                        const std::optional<Eigen::VectorXd>& av_features = {},
                        OpCounts* ops = nullptr);

/// Index of the set member closest to the ground truth in average
/// displacement; ties go to the lowest index.
std::size_t assign_target(const Trajectory& gt_future,
                          const setgen::TrajectorySet& set);

/// Flattened past displacement vectors plus a one-hot agent class.
Eigen::VectorXd agent_features(std::span<const Point2> observed_past,
                               AgentClass agent_class);

/// Flattened displacement series of the planned AV future, including the
/// step from the last observed AV position so first-step speed is visible.
Eigen::VectorXd av_future_features(const Point2& av_last_observed,
                                   const Trajectory& av_future);

struct TrainSample {
  Eigen::VectorXd features;
  std::optional<Eigen::VectorXd> av_features;
  int target = 0;
};

/// One training sample per scenario (the focal agent only). Requires AV
/// future tracks when `conditional` is set.
std::vector<TrainSample> build_training_samples(
    const Dataset& dataset, const setgen::TrajectorySet& set,
    bool conditional);

struct TrainConfig {
  double lr_initial = 1e-3;
  double lr_reduced = 1e-4;
  int epochs_initial = 4;
  int epochs_reduced = 4;
  int batch_size = 32;
  std::uint64_t seed = 0;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

/// Mini-batch cross-entropy training with Adam (beta1 0.9, beta2 0.999,
/// eps 1e-8); the learning rate switches from lr_initial to lr_reduced after
/// epochs_initial epochs. Deterministic given seed and sample order.
TrainResult train(ClassifierModel& model,
                  const std::vector<TrainSample>& samples,
                  const TrainConfig& config);

/// Mean cross-entropy of the batch under the current parameters.
double batch_loss(const ClassifierModel& model,
                  std::span<const TrainSample> batch);

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
};

/// Analytic gradients of batch_loss, in layer order. Exposed for the
/// finite-difference oracle.
Gradients batch_gradients(const ClassifierModel& model,
                          std::span<const TrainSample> batch,
                          double* loss_out = nullptr);

struct PredictionResult {
  Eigen::VectorXd probabilities;          // full vector over the set
  std::vector<nms::Selection> selected;   // k members after NMS
};

/// forward + select_nms. One forward pass serves any k <= s; `ops` counts
/// only the forward part.
PredictionResult predict(const ClassifierModel& model,
                         const Eigen::VectorXd& features,
                         const std::optional<Eigen::VectorXd>& av_features,
                         const setgen::TrajectorySet& set, std::size_t k,
                         double r_nms, OpCounts* ops = nullptr);

}  // namespace trajset::model
