#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "oswa/sim/corpus.hpp"

namespace oswa::data {

enum class Scheme { kDisc, kDClass, kOvA };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

// Disjoint transmitter-ID sets: authorized (A), known outliers (K) seen in
// training, unseen outliers (O) reserved for the test set.
struct SetPartition {
  std::vector<int> authorized;  // ordered; index = class index
  std::set<int> known_outliers;
  std::set<int> unseen_outliers;

  int authorized_index(int tx_id) const;  // -1 if not authorized
};

// Uniform random disjoint draw of (|A|, |K|, |O|) from the pool.
SetPartition partition_transmitters(const std::vector<int>& pool,
                                    int n_authorized, int n_known,
                                    int n_unseen, std::uint64_t rng_seed);

// Frames with per-frame class indices.
// Class index convention: 0..|A|-1 are the authorized transmitters in
// partition order; |A| is the outlier class. For scheme disc the stored
// label is 0 (authorized) or 1 (outlier). For OvA the length-|A| binary
// label vector is derived from the class index (outliers -> all zeros).
struct LabeledDataset {
  std::vector<IQFrame> frames;
  std::vector<int> labels;
  Scheme scheme = Scheme::kDisc;
  int n_authorized = 0;
  std::map<int, double> class_weights;

  std::vector<int> ova_label_vector(std::size_t i) const;
};

// Train/val/test division. Frames are normalized to unit RMS.
struct SplitBundle {
  std::vector<IQFrame> train_frames;
  std::vector<IQFrame> val_frames;
  std::vector<IQFrame> test_frames;
  std::vector<bool> test_is_outlier;  // truth of H1, parallel to test_frames
};

// Per authorized transmitter: shuffle, 70% to the train/val pool, 30% to
// test. All known-outlier frames join the pool. The pool is shuffled and
// split 80/20 into train/val. All unseen-outlier frames go to test.
SplitBundle make_splits(const sim::Corpus& corpus, const SetPartition& part,
                        std::uint64_t rng_seed);

// Unit RMS power (mean |s|^2 == 1), phase preserved. Throws on an all-zero
// frame. Idempotent within 1e-6.
IQFrame normalize_frame(const IQFrame& f);

// Adds circular complex Gaussian noise of total per-sample variance
// noise_var, then rotates the whole frame by a uniform random phase.
// noise_var = 0 disables the noise term (rotation only).
IQFrame augment(const IQFrame& f, std::uint64_t rng_seed,
                double noise_var = 0.01);

// Labels frames per the scheme and fills class weights. Every frame must
// come from A or K; frames from elsewhere are an error.
LabeledDataset label_frames(const std::vector<IQFrame>& frames,
                            const SetPartition& part, Scheme scheme);

// weight_c = N_total / (n_classes * N_c) over the classes present in ds.
std::map<int, double> class_weights(const std::vector<int>& labels);

}  // namespace oswa::data
