#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "oswa/nn/model.hpp"

namespace oswa::nn {

// Model outputs after the output nonlinearity.
// disc: 1 value in [0,1]; dclass: |A|+1 probabilities summing to 1;
// ova: |A| independent per-class scores in [0,1].
struct ScoreVector {
  Arch arch = Arch::kDisc;
  std::vector<double> values;
};

struct Hyper {
  int epochs = 10;
  double lr = 0.001;
  int batch_size = 64;
  std::uint64_t seed = 0;
  double aug_noise_var = 0.01;  // total complex variance per sample
  bool augment_train = true;
};

struct TrainedModel {
  ExtractorConfig extractor;
  HeadConfig head;
  std::vector<float> weights;
  double best_val_loss = 0.0;
  // per-epoch (train_loss, val_loss)
  std::vector<std::pair<double, double>> history;
};

// Per-sample loss and logit gradient for the given architecture.
// label is the class index convention of data::LabeledDataset. Returns the
// weighted loss; writes weight*scale*(dL/dlogit) into dlogits.
template <typename T>
double loss_and_dlogits(Arch arch, const T* logits, int out_dim, int label,
                        double weight, double scale, T* dlogits);

// Class-weighted cross-entropy training with the adaptive-moment optimizer.
// Single-threaded and deterministic given hyper.seed. Augmentation (noise +
// random phase) is applied to train batches only. The returned weights are
// from the epoch with the lowest validation loss.
TrainedModel train(const data::LabeledDataset& train_ds,
                   const data::LabeledDataset& val_ds,
                   const ExtractorConfig& ec, const HeadConfig& hc,
                   const Hyper& hyper);

// Exact learnable-parameter count for a given configuration.
std::int64_t param_count(const ExtractorConfig& ec, const HeadConfig& hc);

// Read-only inference wrapper; reusable across frames.
class Scorer {
 public:
  explicit Scorer(const TrainedModel& tm, bool strict = true);
  ~Scorer();
  Scorer(Scorer&&) noexcept;
  Scorer& operator=(Scorer&&) noexcept;

  ScoreVector score(const IQFrame& frame);
  std::vector<ScoreVector> score_batch(const std::vector<IQFrame>& frames);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

inline ScoreVector score(const TrainedModel& tm, const IQFrame& frame) {
  Scorer s(tm);
  return s.score(frame);
}

// Checkpoint: JSON header (configs + training metadata) followed by the raw
// float32 weights. save -> load -> identical scores.
void save_checkpoint(const TrainedModel& tm, const std::string& path);
TrainedModel load_checkpoint(const std::string& path);

}  // namespace oswa::nn
