#include "oswa/data/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oswa/rng.hpp"

namespace oswa::data {

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kDisc: return "disc";
    case Scheme::kDClass: return "dclass";
    case Scheme::kOvA: return "ova";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "disc") return Scheme::kDisc;
  if (s == "dclass") return Scheme::kDClass;
  if (s == "ova") return Scheme::kOvA;
  throw std::invalid_argument("unknown scheme: " + s);
}

int SetPartition::authorized_index(int tx_id) const {
  for (std::size_t i = 0; i < authorized.size(); ++i)
    if (authorized[i] == tx_id) return static_cast<int>(i);
  return -1;
}

namespace {

// Fisher-Yates with our own rng so draws are platform-stable.
template <typename T>
void shuffle_vec(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace

SetPartition partition_transmitters(const std::vector<int>& pool,
                                    int n_authorized, int n_known, int n_unseen,
                                    std::uint64_t rng_seed) {
  if (n_authorized < 1) throw std::invalid_argument("|A| must be >= 1");
  if (n_known < 0 || n_unseen < 0)
    throw std::invalid_argument("set sizes must be >= 0");
  const std::size_t need = static_cast<std::size_t>(n_authorized) + n_known +
                           n_unseen;
  if (need > pool.size())
    throw std::invalid_argument("requested set sizes exceed the pool");

  std::vector<int> ids = pool;
  Rng rng(seed_mix({rng_seed, 0x70617274ULL}));
  shuffle_vec(ids, rng);

  SetPartition part;
  std::size_t i = 0;
  for (int a = 0; a < n_authorized; ++a) part.authorized.push_back(ids[i++]);
  for (int k = 0; k < n_known; ++k) part.known_outliers.insert(ids[i++]);
  for (int o = 0; o < n_unseen; ++o) part.unseen_outliers.insert(ids[i++]);
  return part;
}

IQFrame normalize_frame(const IQFrame& f) {
  double p = 0.0;
  for (const auto& v : f.samples) p += static_cast<double>(std::norm(v));
  p /= static_cast<double>(f.samples.size());
  if (p <= 0.0) throw std::invalid_argument("cannot normalize an all-zero frame");
  const float scale = static_cast<float>(1.0 / std::sqrt(p));
  IQFrame out = f;
  for (auto& v : out.samples) v *= scale;
  return out;
}

IQFrame augment(const IQFrame& f, std::uint64_t rng_seed, double noise_var) {
  Rng rng(seed_mix({rng_seed, 0x61756766ULL}));
  IQFrame out = f;
  if (noise_var > 0.0) {
    const double amp = std::sqrt(noise_var);
    for (auto& v : out.samples) {
      const cxd n = amp * rng.cnormal();
      v += cxf{static_cast<float>(n.real()), static_cast<float>(n.imag())};
    }
  }
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const cxf rot{static_cast<float>(std::cos(theta)),
                static_cast<float>(std::sin(theta))};
  for (auto& v : out.samples) v *= rot;
  return out;
}

SplitBundle make_splits(const sim::Corpus& corpus, const SetPartition& part,
                        std::uint64_t rng_seed) {
  auto require_tx = [&](int tx) -> const std::vector<IQFrame>& {
    auto it = corpus.frames.find(tx);
    if (it == corpus.frames.end() || it->second.empty())
      throw std::invalid_argument("corpus has no frames for tx_id " +
                                  std::to_string(tx));
    return it->second;
  };

  SplitBundle b;
  std::vector<IQFrame> pool;

  for (int tx : part.authorized) {
    const auto& frames = require_tx(tx);
    std::vector<std::size_t> idx(frames.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(seed_mix({rng_seed, static_cast<std::uint64_t>(tx), 0x73706c74ULL}));
    shuffle_vec(idx, rng);
    const std::size_t n_trainval =
        static_cast<std::size_t>(std::floor(0.7 * frames.size()));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const IQFrame norm = normalize_frame(frames[idx[i]]);
      if (i < n_trainval) {
        pool.push_back(norm);
      } else {
        b.test_frames.push_back(norm);
        b.test_is_outlier.push_back(false);
      }
    }
  }

  for (int tx : part.known_outliers) {
    for (const auto& f : require_tx(tx)) pool.push_back(normalize_frame(f));
  }

  Rng pool_rng(seed_mix({rng_seed, 0x706f6f6cULL}));
  shuffle_vec(pool, pool_rng);
  const std::size_t n_train =
      static_cast<std::size_t>(std::floor(0.8 * pool.size()));
  b.train_frames.assign(pool.begin(), pool.begin() + n_train);
  b.val_frames.assign(pool.begin() + n_train, pool.end());

  for (int tx : part.unseen_outliers) {
    for (const auto& f : require_tx(tx)) {
      b.test_frames.push_back(normalize_frame(f));
      b.test_is_outlier.push_back(true);
    }
  }
  return b;
}

LabeledDataset label_frames(const std::vector<IQFrame>& frames,
                            const SetPartition& part, Scheme scheme) {
  const int n_auth = static_cast<int>(part.authorized.size());
  LabeledDataset ds;
  ds.scheme = scheme;
  ds.n_authorized = n_auth;
  ds.frames = frames;
  ds.labels.reserve(frames.size());
  for (const auto& f : frames) {
    const int a = part.authorized_index(f.tx_id);
    const bool known = part.known_outliers.contains(f.tx_id);
    if (a < 0 && !known)
      throw std::invalid_argument(
          "frame from tx_id " + std::to_string(f.tx_id) +
          " is neither authorized nor a known outlier");
    switch (scheme) {
      case Scheme::kDisc:
        ds.labels.push_back(a >= 0 ? 0 : 1);
        break;
      case Scheme::kDClass:
      case Scheme::kOvA:
        ds.labels.push_back(a >= 0 ? a : n_auth);
        break;
    }
  }
  ds.class_weights = class_weights(ds.labels);
  return ds;
}

std::vector<int> LabeledDataset::ova_label_vector(std::size_t i) const {
  std::vector<int> v(n_authorized, 0);
  if (labels[i] < n_authorized) v[labels[i]] = 1;
  return v;
}

std::map<int, double> class_weights(const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("empty label set");
  std::map<int, std::int64_t> counts;
  for (int l : labels) ++counts[l];
  const double n_total = static_cast<double>(labels.size());
  const double n_classes = static_cast<double>(counts.size());
  std::map<int, double> w;
  for (const auto& [c, n] : counts)
    w[c] = n_total / (n_classes * static_cast<double>(n));
  return w;
}

}  // namespace oswa::data
