#include "oswa/nn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "oswa/data/pipeline.hpp"

namespace oswa::nn {

using data::LabeledDataset;
using nlohmann::json;

namespace {

template <typename T>
void frame_to_input(const IQFrame& f, T* buf) {
  for (int n = 0; n < kFrameLen; ++n) {
    buf[n] = static_cast<T>(f.samples[n].real());
    buf[kFrameLen + n] = static_cast<T>(f.samples[n].imag());
  }
}

template <typename T>
double stable_bce(T logit, double target) {
  const double x = static_cast<double>(logit);
  return std::max(x, 0.0) - x * target + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

}  // namespace

template <typename T>
double loss_and_dlogits(Arch arch, const T* logits, int out_dim, int label,
                        double weight, double scale, T* dlogits) {
  double loss = 0.0;
  switch (arch) {
    case Arch::kDisc: {
      const double y = label == 0 ? 0.0 : 1.0;
      loss = stable_bce(logits[0], y);
      dlogits[0] = static_cast<T>(weight * scale *
                                  (sigmoid(static_cast<double>(logits[0])) - y));
      break;
    }
    case Arch::kDClass: {
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < out_dim; ++i)
        mx = std::max(mx, static_cast<double>(logits[i]));
      double denom = 0.0;
      for (int i = 0; i < out_dim; ++i)
        denom += std::exp(static_cast<double>(logits[i]) - mx);
      const double log_denom = std::log(denom);
      loss = -(static_cast<double>(logits[label]) - mx - log_denom);
      for (int i = 0; i < out_dim; ++i) {
        const double p =
            std::exp(static_cast<double>(logits[i]) - mx - log_denom);
        dlogits[i] =
            static_cast<T>(weight * scale * (p - (i == label ? 1.0 : 0.0)));
      }
      break;
    }
    case Arch::kOvA: {
      for (int i = 0; i < out_dim; ++i) {
        const double y = label == i ? 1.0 : 0.0;
        loss += stable_bce(logits[i], y);
        dlogits[i] = static_cast<T>(
            weight * scale * (sigmoid(static_cast<double>(logits[i])) - y));
      }
      break;
    }
  }
  return weight * loss;
}

template double loss_and_dlogits<float>(Arch, const float*, int, int, double,
                                        double, float*);
template double loss_and_dlogits<double>(Arch, const double*, int, int, double,
                                         double, double*);

std::int64_t param_count(const ExtractorConfig& ec, const HeadConfig& hc) {
  return Model<float>(ec, hc).param_count();
}

namespace {

double class_weight_of(const std::map<int, double>& weights, int label) {
  auto it = weights.find(label);
  return it == weights.end() ? 1.0 : it->second;
}

// Weighted mean data loss plus the L2 penalty, over a full dataset.
double evaluate_loss(Model<float>& model, Workspace<float>& ws,
                     const LabeledDataset& ds,
                     const std::map<int, double>& weights) {
  std::vector<float> input(2 * kFrameLen);
  std::vector<float> logits(model.output_dim());
  std::vector<float> dlogits(model.output_dim());
  double total = 0.0;
  for (std::size_t i = 0; i < ds.frames.size(); ++i) {
    frame_to_input(ds.frames[i], input.data());
    model.forward(input.data(), ws, logits.data());
    total += loss_and_dlogits(ds.scheme, logits.data(), model.output_dim(),
                              ds.labels[i], class_weight_of(weights, ds.labels[i]),
                              0.0, dlogits.data());
  }
  return total / static_cast<double>(ds.frames.size()) + model.l2_penalty();
}

}  // namespace

TrainedModel train(const LabeledDataset& train_ds, const LabeledDataset& val_ds,
                   const ExtractorConfig& ec, const HeadConfig& hc,
                   const Hyper& hyper) {
  if (train_ds.frames.empty() || val_ds.frames.empty())
    throw std::invalid_argument("train/val datasets must be nonempty");
  if (train_ds.scheme != hc.arch || val_ds.scheme != hc.arch)
    throw std::invalid_argument("dataset scheme does not match head arch");
  if (hc.arch != Arch::kDisc && train_ds.n_authorized != hc.n_authorized)
    throw std::invalid_argument("dataset |A| does not match head config");
  if (hyper.epochs < 0 || hyper.batch_size <= 0 || hyper.lr <= 0.0)
    throw std::invalid_argument("invalid hyperparameters");

  Model<float> model(ec, hc);
  model.init_params(hyper.seed);
  Workspace<float> ws = model.make_workspace();

  TrainedModel out;
  out.extractor = ec;
  out.head = hc;
  out.best_val_loss = std::numeric_limits<double>::infinity();
  out.weights = model.params();

  const auto& weights = train_ds.class_weights;
  const std::size_t n = train_ds.frames.size();
  const std::int64_t n_params = model.param_count();
  std::vector<float> adam_m(n_params, 0.0f), adam_v(n_params, 0.0f);
  const float beta1 = 0.9f, beta2 = 0.999f, eps = 1e-8f;
  float b1t = 1.0f, b2t = 1.0f;

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::vector<float> input(2 * kFrameLen);
  std::vector<float> logits(model.output_dim());
  std::vector<float> dlogits(model.output_dim());

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    Rng shuffle_rng(seed_mix({hyper.seed, static_cast<std::uint64_t>(epoch),
                              0x73687566ULL}));
    for (std::size_t i = n; i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double epoch_loss = 0.0;
    std::size_t pos = 0;
    while (pos < n) {
      const std::size_t batch =
          std::min<std::size_t>(hyper.batch_size, n - pos);
      const double scale = 1.0 / static_cast<double>(batch);
      model.zero_grads();
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t idx = order[pos + b];
        if (hyper.augment_train) {
          const IQFrame aug = data::augment(
              train_ds.frames[idx],
              seed_mix({hyper.seed, static_cast<std::uint64_t>(epoch),
                        static_cast<std::uint64_t>(pos + b), 0x61756773ULL}),
              hyper.aug_noise_var);
          frame_to_input(aug, input.data());
        } else {
          frame_to_input(train_ds.frames[idx], input.data());
        }
        model.forward(input.data(), ws, logits.data());
        epoch_loss += loss_and_dlogits(
            hc.arch, logits.data(), model.output_dim(), train_ds.labels[idx],
            class_weight_of(weights, train_ds.labels[idx]), scale,
            dlogits.data());
        model.backward(ws, dlogits.data());
      }
      model.add_l2_gradients();
      b1t *= beta1;
      b2t *= beta2;
      kernels::adam_step(model.params().data(), model.grads().data(),
                         adam_m.data(), adam_v.data(), n_params,
                         static_cast<float>(hyper.lr), beta1, beta2, eps, b1t,
                         b2t);
      pos += batch;
    }

    const double train_loss =
        epoch_loss / static_cast<double>(n) + model.l2_penalty();
    const double val_loss = evaluate_loss(model, ws, val_ds, weights);
    out.history.emplace_back(train_loss, val_loss);
    if (val_loss < out.best_val_loss) {
      out.best_val_loss = val_loss;
      out.weights = model.params();
    }
  }
  return out;
}

struct Scorer::Impl {
  Model<float> model;
  Workspace<float> ws;
  bool strict;
  std::vector<float> input, logits;

  Impl(const TrainedModel& tm, bool strict_)
      : model(tm.extractor, tm.head), ws(model.make_workspace()), strict(strict_) {
    if (static_cast<std::int64_t>(tm.weights.size()) != model.param_count())
      throw std::invalid_argument("checkpoint weight count mismatch");
    model.params() = tm.weights;
    input.resize(2 * kFrameLen);
    logits.resize(model.output_dim());
  }
};

Scorer::Scorer(const TrainedModel& tm, bool strict)
    : impl_(std::make_unique<Impl>(tm, strict)) {}
Scorer::~Scorer() = default;
Scorer::Scorer(Scorer&&) noexcept = default;
Scorer& Scorer::operator=(Scorer&&) noexcept = default;

ScoreVector Scorer::score(const IQFrame& frame) {
  if (static_cast<int>(frame.samples.size()) != kFrameLen)
    throw std::invalid_argument("frame must have 256 samples");
  if (impl_->strict) {
    double p = 0.0;
    for (const auto& v : frame.samples) p += static_cast<double>(std::norm(v));
    p /= kFrameLen;
    if (std::abs(p - 1.0) > 0.05)
      throw std::invalid_argument("frame is not normalized to unit RMS");
  }
  frame_to_input(frame, impl_->input.data());
  impl_->model.forward(impl_->input.data(), impl_->ws, impl_->logits.data());

  const Arch arch = impl_->model.head_config().arch;
  ScoreVector sv;
  sv.arch = arch;
  const int dim = impl_->model.output_dim();
  sv.values.resize(dim);
  if (arch == Arch::kDClass) {
    double mx = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i)
      mx = std::max(mx, static_cast<double>(impl_->logits[i]));
    double denom = 0.0;
    for (int i = 0; i < dim; ++i)
      denom += std::exp(static_cast<double>(impl_->logits[i]) - mx);
    for (int i = 0; i < dim; ++i)
      sv.values[i] = std::exp(static_cast<double>(impl_->logits[i]) - mx) / denom;
  } else {
    for (int i = 0; i < dim; ++i)
      sv.values[i] = sigmoid(static_cast<double>(impl_->logits[i]));
  }
  return sv;
}

std::vector<ScoreVector> Scorer::score_batch(const std::vector<IQFrame>& frames) {
  std::vector<ScoreVector> out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(score(f));
  return out;
}

void save_checkpoint(const TrainedModel& tm, const std::string& path) {
  json hdr{{"format", "oswa-ckpt-v1"},
           {"arch", data::to_string(tm.head.arch)},
           {"extractor",
            {{"block_filters", tm.extractor.block_filters},
             {"kernel_size", tm.extractor.kernel_size},
             {"feature_dim", tm.extractor.feature_dim}}},
           {"head",
            {{"n_authorized", tm.head.n_authorized},
             {"hidden_width", tm.head.hidden_width},
             {"l2_weight", tm.head.l2_weight}}},
           {"best_val_loss", tm.best_val_loss},
           {"history", tm.history},
           {"n_weights", tm.weights.size()}};
  const std::string hdr_str = hdr.dump();
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  const char magic[8] = {'O', 'S', 'W', 'A', 'C', 'K', 'P', '1'};
  f.write(magic, 8);
  const std::uint64_t hlen = hdr_str.size();
  f.write(reinterpret_cast<const char*>(&hlen), sizeof(hlen));
  f.write(hdr_str.data(), static_cast<std::streamsize>(hlen));
  f.write(reinterpret_cast<const char*>(tm.weights.data()),
          static_cast<std::streamsize>(tm.weights.size() * sizeof(float)));
  if (!f) throw std::runtime_error("checkpoint write failed: " + path);
}

TrainedModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("missing checkpoint: " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, "OSWACKP1", 8) != 0)
    throw std::runtime_error("not a checkpoint file: " + path);
  std::uint64_t hlen = 0;
  f.read(reinterpret_cast<char*>(&hlen), sizeof(hlen));
  std::string hdr_str(hlen, '\0');
  f.read(hdr_str.data(), static_cast<std::streamsize>(hlen));
  const json hdr = json::parse(hdr_str);

  TrainedModel tm;
  tm.head.arch = data::scheme_from_string(hdr.at("arch").get<std::string>());
  tm.extractor.block_filters =
      hdr.at("extractor").at("block_filters").get<std::vector<int>>();
  tm.extractor.kernel_size = hdr.at("extractor").at("kernel_size").get<int>();
  tm.extractor.feature_dim = hdr.at("extractor").at("feature_dim").get<int>();
  tm.head.n_authorized = hdr.at("head").at("n_authorized").get<int>();
  tm.head.hidden_width = hdr.at("head").at("hidden_width").get<int>();
  tm.head.l2_weight = hdr.at("head").at("l2_weight").get<double>();
  tm.best_val_loss = hdr.at("best_val_loss").get<double>();
  tm.history =
      hdr.at("history").get<std::vector<std::pair<double, double>>>();

  const std::uint64_t n_weights = hdr.at("n_weights").get<std::uint64_t>();
  tm.weights.resize(n_weights);
  f.read(reinterpret_cast<char*>(tm.weights.data()),
         static_cast<std::streamsize>(n_weights * sizeof(float)));
  if (!f) throw std::runtime_error("truncated checkpoint: " + path);
  return tm;
}

}  // namespace oswa::nn
