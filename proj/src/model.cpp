#include "trajset/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trajset/rng.hpp"

namespace trajset::model {

namespace {

Eigen::VectorXd relu(const Eigen::VectorXd& z) {
  return z.cwiseMax(0.0);
}

Eigen::VectorXd apply(const LinearLayer& layer, const Eigen::VectorXd& x,
                      OpCounts* ops) {
  if (x.size() != layer.w.cols()) {
    throw std::invalid_argument("layer " + layer.name + " expects width " +
                                std::to_string(layer.w.cols()) + ", got " +
                                std::to_string(x.size()));
  }
  if (ops != nullptr) {
    ops->fma += static_cast<std::uint64_t>(layer.w.rows()) *
                static_cast<std::uint64_t>(layer.w.cols());
  }
  return layer.w * x + layer.b;
}

LinearLayer make_layer(std::string name, FusionStage stage, int rows,
                       int cols, Rng& rng) {
  LinearLayer layer;
  layer.name = std::move(name);
  layer.stage = stage;
  layer.w.resize(rows, cols);
  layer.b = Eigen::VectorXd::Zero(rows);
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      layer.w(r, c) = rng.uniform(-bound, bound);
    }
  }
  return layer;
}

/// Cached activations of one forward pass, for backprop.
struct Activations {
  Eigen::VectorXd x;                   // agent input
  Eigen::VectorXd z1, h1, z2, f;       // encoder
  Eigen::VectorXd a, za1, ha1, za2, g; // av branch (conditional only)
  Eigen::VectorXd u;                   // decoder input
  Eigen::VectorXd zd1, hd, logits, p;
};

Activations run_forward(const ClassifierModel& m, const TrainSample& sample) {
  Activations act;
  const auto& L = m.layers;
  act.x = sample.features;
  act.z1 = L[0].w * act.x + L[0].b;
  act.h1 = relu(act.z1);
  act.z2 = L[1].w * act.h1 + L[1].b;
  act.f = relu(act.z2);
  if (m.config.conditional) {
    if (!sample.av_features.has_value()) {
      throw std::invalid_argument("conditional model requires av features");
    }
    act.a = *sample.av_features;
    act.za1 = L[2].w * act.a + L[2].b;
    act.ha1 = relu(act.za1);
    act.za2 = L[3].w * act.ha1 + L[3].b;
    act.g = relu(act.za2);
    act.u.resize(act.f.size() + act.g.size());
    act.u << act.f, act.g;
  } else {
    act.u = act.f;
  }
  const std::size_t d = m.decoder_begin();
  act.zd1 = L[d].w * act.u + L[d].b;
  act.hd = relu(act.zd1);
  act.logits = L[d + 1].w * act.hd + L[d + 1].b;
  act.p = softmax(act.logits);
  return act;
}

void check_sample(const ClassifierModel& m, const TrainSample& sample) {
  if (sample.features.size() != m.config.agent_input_width()) {
    throw std::invalid_argument("agent feature width mismatch");
  }
  if (m.config.conditional != sample.av_features.has_value()) {
    throw std::invalid_argument(
        m.config.conditional
            ? "conditional model requires av features"
            : "unconditional model must not receive av features");
  }
  if (sample.av_features.has_value() &&
      sample.av_features->size() != m.config.av_input_width()) {
    throw std::invalid_argument("av feature width mismatch");
  }
  if (sample.target < 0 || sample.target >= m.config.set_size) {
    throw std::invalid_argument("target index out of range");
  }
}

}  // namespace

std::string to_string(FusionStage stage) {
  return stage == FusionStage::PreFusion ? "pre_fusion" : "conditional";
}

FusionStage fusion_stage_from_string(const std::string& s) {
  if (s == "pre_fusion") return FusionStage::PreFusion;
  if (s == "conditional") return FusionStage::Conditional;
  throw std::invalid_argument("unknown fusion stage label: " + s);
}

ClassifierModel init_model(const ModelConfig& config) {
  if (config.set_size <= 0) {
    throw std::invalid_argument("set_size must be positive");
  }
  if (config.t_past < 2 || config.t_future < 1 || config.feature_size < 1 ||
      config.decoder_hidden < 1) {
    throw std::invalid_argument("invalid model dimensions");
  }
  ClassifierModel m;
  m.config = config;
  Rng rng(config.seed);
  const int F = config.feature_size;
  m.layers.push_back(make_layer("enc.0", FusionStage::PreFusion, F,
                                config.agent_input_width(), rng));
  m.layers.push_back(make_layer("enc.1", FusionStage::PreFusion, F, F, rng));
  if (config.conditional) {
    m.layers.push_back(make_layer("avenc.0", FusionStage::Conditional, F,
                                  config.av_input_width(), rng));
    m.layers.push_back(
        make_layer("avenc.1", FusionStage::Conditional, F, F, rng));
  }
  // The decoder sees concatenated AV features in the conditional model, so
  // it sits at or after the fusion point.
  const FusionStage dec_stage = config.conditional ? FusionStage::Conditional
                                                   : FusionStage::PreFusion;
  m.layers.push_back(make_layer("dec.0", dec_stage, config.decoder_hidden,
                                config.decoder_input_width(), rng));
  m.layers.push_back(make_layer("dec.1", dec_stage, config.set_size,
                                config.decoder_hidden, rng));
  return m;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const double max_logit = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - max_logit).exp();
  return e / e.sum();
}

Eigen::VectorXd encode(const ClassifierModel& model,
                       const Eigen::VectorXd& features, OpCounts* ops) {
  const Eigen::VectorXd h1 = relu(apply(model.layers[0], features, ops));
  return relu(apply(model.layers[1], h1, ops));
}

Eigen::VectorXd condition(const ClassifierModel& model,
                          const Eigen::VectorXd& encoded,
                          const std::optional<Eigen::VectorXd>& av_features,
                          OpCounts* ops) {
  if (model.config.conditional != av_features.has_value()) {
    throw std::invalid_argument(
        model.config.conditional
            ? "conditional model requires av features"
            : "unconditional model must not receive av features");
  }
  Eigen::VectorXd u;
  if (model.config.conditional) {
    const Eigen::VectorXd ha =
        relu(apply(model.layers[2], *av_features, ops));
    const Eigen::VectorXd g = relu(apply(model.layers[3], ha, ops));
    u.resize(encoded.size() + g.size());
    u << encoded, g;
  } else {
    u = encoded;
  }
  const std::size_t d = model.decoder_begin();
  const Eigen::VectorXd hd = relu(apply(model.layers[d], u, ops));
  return softmax(apply(model.layers[d + 1], hd, ops));
}

Eigen::VectorXd forward(const ClassifierModel& model,
                        const Eigen::VectorXd& features,
                        const std::optional<Eigen::VectorXd>& av_features,
                        OpCounts* ops) {
  return condition(model, encode(model, features, ops), av_features, ops);
}

std::size_t assign_target(const Trajectory& gt_future,
                          const setgen::TrajectorySet& set) {
  if (set.trajectories.empty()) {
    throw std::invalid_argument("trajectory set is empty");
  }
  std::size_t best = 0;
  double best_ade = ade(set.trajectories[0], gt_future);
  for (std::size_t i = 1; i < set.trajectories.size(); ++i) {
    const double d = ade(set.trajectories[i], gt_future);
    if (d < best_ade) {
      best_ade = d;
      best = i;
    }
  }
  return best;
}

Eigen::VectorXd agent_features(std::span<const Point2> observed_past,
                               AgentClass agent_class) {
  if (observed_past.size() < 2) {
    throw std::invalid_argument("need at least two observed points");
  }
  const std::size_t n_disp = observed_past.size() - 1;
  Eigen::VectorXd out(static_cast<int>(n_disp * 2 + 5));
  for (std::size_t i = 0; i < n_disp; ++i) {
    out[static_cast<int>(2 * i)] =
        observed_past[i + 1].x - observed_past[i].x;
    out[static_cast<int>(2 * i + 1)] =
        observed_past[i + 1].y - observed_past[i].y;
  }
  for (int c = 0; c < 5; ++c) {
    out[static_cast<int>(2 * n_disp) + c] =
        c == static_cast<int>(agent_class) ? 1.0 : 0.0;
  }
  return out;
}

Eigen::VectorXd av_future_features(const Point2& av_last_observed,
                                   const Trajectory& av_future) {
  if (av_future.points.empty()) {
    throw std::invalid_argument("av future must not be empty");
  }
  Eigen::VectorXd out(static_cast<int>(av_future.points.size() * 2));
  Point2 prev = av_last_observed;
  for (std::size_t i = 0; i < av_future.points.size(); ++i) {
    out[static_cast<int>(2 * i)] = av_future.points[i].x - prev.x;
    out[static_cast<int>(2 * i + 1)] = av_future.points[i].y - prev.y;
    prev = av_future.points[i];
  }
  return out;
}

std::vector<TrainSample> build_training_samples(
    const Dataset& dataset, const setgen::TrajectorySet& set,
    bool conditional) {
  std::vector<TrainSample> samples;
  samples.reserve(dataset.scenarios.size());
  for (const Scenario& s : dataset.scenarios) {
    const AgentTrack& focal = s.focal();
    TrainSample sample;
    sample.features = agent_features(
        std::span<const Point2>(focal.points.data(), focal.num_observed),
        focal.agent_class);
    if (conditional) {
      const AgentTrack* av = s.av();
      const auto av_future = dataset.av_future(s);
      if (av == nullptr || !av_future.has_value()) {
        throw std::invalid_argument("scenario " + s.id +
                                    " lacks an av future track");
      }
      sample.av_features = av_future_features(
          av->points[av->num_observed - 1], *av_future);
    }
    sample.target =
        static_cast<int>(assign_target(dataset.focal_future(s), set));
    samples.push_back(std::move(sample));
  }
  return samples;
}

double batch_loss(const ClassifierModel& model,
                  std::span<const TrainSample> batch) {
  if (batch.empty()) {
    throw std::invalid_argument("batch must not be empty");
  }
  double sum = 0.0;
  for (const TrainSample& sample : batch) {
    check_sample(model, sample);
    const Activations act = run_forward(model, sample);
    sum += -std::log(std::max(act.p[sample.target], 1e-300));
  }
  return sum / static_cast<double>(batch.size());
}

Gradients batch_gradients(const ClassifierModel& model,
                          std::span<const TrainSample> batch,
                          double* loss_out) {
  if (batch.empty()) {
    throw std::invalid_argument("batch must not be empty");
  }
  const auto& L = model.layers;
  Gradients grads;
  grads.dw.reserve(L.size());
  grads.db.reserve(L.size());
  for (const LinearLayer& layer : L) {
    grads.dw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    grads.db.push_back(Eigen::VectorXd::Zero(layer.b.size()));
  }

  const std::size_t d = model.decoder_begin();
  double loss_sum = 0.0;
  for (const TrainSample& sample : batch) {
    check_sample(model, sample);
    const Activations act = run_forward(model, sample);
    loss_sum += -std::log(std::max(act.p[sample.target], 1e-300));

    Eigen::VectorXd dlogits = act.p;
    dlogits[sample.target] -= 1.0;

    grads.dw[d + 1] += dlogits * act.hd.transpose();
    grads.db[d + 1] += dlogits;
    const Eigen::VectorXd dhd = L[d + 1].w.transpose() * dlogits;
    const Eigen::VectorXd dzd1 =
        dhd.cwiseProduct((act.zd1.array() > 0.0).cast<double>().matrix());
    grads.dw[d] += dzd1 * act.u.transpose();
    grads.db[d] += dzd1;
    const Eigen::VectorXd du = L[d].w.transpose() * dzd1;

    const int F = model.config.feature_size;
    const Eigen::VectorXd df = du.head(F);
    const Eigen::VectorXd dz2 =
        df.cwiseProduct((act.z2.array() > 0.0).cast<double>().matrix());
    grads.dw[1] += dz2 * act.h1.transpose();
    grads.db[1] += dz2;
    const Eigen::VectorXd dh1 = L[1].w.transpose() * dz2;
    const Eigen::VectorXd dz1 =
        dh1.cwiseProduct((act.z1.array() > 0.0).cast<double>().matrix());
    grads.dw[0] += dz1 * act.x.transpose();
    grads.db[0] += dz1;

    if (model.config.conditional) {
      const Eigen::VectorXd dg = du.tail(F);
      const Eigen::VectorXd dza2 =
          dg.cwiseProduct((act.za2.array() > 0.0).cast<double>().matrix());
      grads.dw[3] += dza2 * act.ha1.transpose();
      grads.db[3] += dza2;
      const Eigen::VectorXd dha1 = L[3].w.transpose() * dza2;
      const Eigen::VectorXd dza1 =
          dha1.cwiseProduct((act.za1.array() > 0.0).cast<double>().matrix());
      grads.dw[2] += dza1 * act.a.transpose();
      grads.db[2] += dza1;
    }
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < L.size(); ++i) {
    grads.dw[i] *= inv_n;
    grads.db[i] *= inv_n;
  }
  if (loss_out != nullptr) {
    *loss_out = loss_sum * inv_n;
  }
  return grads;
}

TrainResult train(ClassifierModel& model,
                  const std::vector<TrainSample>& samples,
                  const TrainConfig& config) {
  if (samples.empty()) {
    throw std::invalid_argument("training dataset must not be empty");
  }
  if (config.batch_size < 1 || config.epochs_initial < 0 ||
      config.epochs_reduced < 0 || config.lr_initial <= 0.0 ||
      config.lr_reduced <= 0.0) {
    throw std::invalid_argument("invalid training configuration");
  }

  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  for (const LinearLayer& layer : model.layers) {
    mw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    vw.push_back(Eigen::MatrixXd::Zero(layer.w.rows(), layer.w.cols()));
    mb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    vb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
  }

  Rng rng(config.seed);
  const std::size_t n = samples.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  TrainResult result;
  const int total_epochs = config.epochs_initial + config.epochs_reduced;
  long step = 0;
  std::vector<TrainSample> batch;
  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    const double lr =
        epoch < config.epochs_initial ? config.lr_initial : config.lr_reduced;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const std::size_t j = i + rng.bounded(n - i);
      std::swap(order[i], order[j]);
    }

    double epoch_loss_sum = 0.0;
    for (std::size_t begin = 0; begin < n;
         begin += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end =
          std::min(n, begin + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = begin; i < end; ++i) {
        batch.push_back(samples[order[i]]);
      }
      double loss = 0.0;
      const Gradients grads = batch_gradients(model, batch, &loss);
      epoch_loss_sum += loss * static_cast<double>(end - begin);

      ++step;
      const double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        mw[l] = kBeta1 * mw[l] + (1.0 - kBeta1) * grads.dw[l];
        vw[l] = kBeta2 * vw[l].array().matrix() +
                (1.0 - kBeta2) * grads.dw[l].array().square().matrix();
        model.layers[l].w.array() -=
            lr * (mw[l].array() / bias1) /
            ((vw[l].array() / bias2).sqrt() + kEps);

        mb[l] = kBeta1 * mb[l] + (1.0 - kBeta1) * grads.db[l];
        vb[l] = kBeta2 * vb[l].array().matrix() +
                (1.0 - kBeta2) * grads.db[l].array().square().matrix();
        model.layers[l].b.array() -=
            lr * (mb[l].array() / bias1) /
            ((vb[l].array() / bias2).sqrt() + kEps);
      }
    }
    result.epoch_loss.push_back(epoch_loss_sum / static_cast<double>(n));
  }
  return result;
}

PredictionResult predict(const ClassifierModel& model,
                         const Eigen::VectorXd& features,
                         const std::optional<Eigen::VectorXd>& av_features,
                         const setgen::TrajectorySet& set, std::size_t k,
                         double r_nms, OpCounts* ops) {
  if (static_cast<int>(set.size()) != model.config.set_size) {
    throw std::invalid_argument("trajectory set size does not match model");
  }
  PredictionResult result;
  result.probabilities = forward(model, features, av_features, ops);
  const nms::ScoredSet scored{
      set, std::span<const double>(result.probabilities.data(),
                                   static_cast<std::size_t>(
                                       result.probabilities.size()))};
  result.selected = nms::select_nms(scored, k, r_nms);
  return result;
}

}  // namespace trajset::model
