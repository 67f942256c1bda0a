#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <set>
#include <vector>

#include "oswa/data/pipeline.hpp"

using namespace oswa;
using namespace oswa::data;

namespace {

sim::Corpus tiny_corpus(int n_tx, int frames_per_tx, std::uint64_t seed = 5) {
  sim::CorpusParams cp;
  cp.n_tx = n_tx;
  cp.frames_per_tx_min = cp.frames_per_tx_max = frames_per_tx;
  cp.seed = seed;
  return sim::generate_corpus(cp);
}

double frame_power(const IQFrame& f) {
  double p = 0.0;
  for (auto s : f.samples) p += std::norm(std::complex<double>(s));
  return p / static_cast<double>(f.samples.size());
}

}  // namespace

TEST_CASE("partition draws disjoint sets of the requested sizes") {
  std::vector<int> pool(71);
  std::iota(pool.begin(), pool.end(), 0);
  const auto part = partition_transmitters(pool, 10, 25, 30, 42);
  CHECK(part.authorized.size() == 10);
  CHECK(part.known_outliers.size() == 25);
  CHECK(part.unseen_outliers.size() == 30);
  std::set<int> all(part.authorized.begin(), part.authorized.end());
  for (int t : part.known_outliers) CHECK(all.insert(t).second);
  for (int t : part.unseen_outliers) CHECK(all.insert(t).second);
  CHECK(all.size() == 65);

  // determinism and singleton degenerate case
  const auto again = partition_transmitters(pool, 10, 25, 30, 42);
  CHECK(again.authorized == part.authorized);
  CHECK(again.known_outliers == part.known_outliers);
  const auto solo = partition_transmitters(pool, 1, 0, 0, 3);
  CHECK(solo.authorized.size() == 1);
  CHECK(solo.known_outliers.empty());
  CHECK(solo.unseen_outliers.empty());
  CHECK(solo.authorized_index(solo.authorized[0]) == 0);
  CHECK(solo.authorized_index(-5) == -1);

  CHECK_THROWS(partition_transmitters(pool, 40, 20, 20, 1));  // exceeds pool
}

TEST_CASE("splits follow the 70/30 then 80/20 rule without leakage") {
  const auto corpus = tiny_corpus(6, 100);
  SetPartition part;
  part.authorized = {0, 1};
  part.known_outliers = {2, 3};
  part.unseen_outliers = {4, 5};
  const auto sb = make_splits(corpus, part, 7);

  // A: 2x100 -> 140 to pool, 60 to test. K: 200 to pool. pool=340 -> 272/68.
  CHECK(sb.train_frames.size() == 272);
  CHECK(sb.val_frames.size() == 68);
  CHECK(sb.test_frames.size() == 60 + 200);

  // per-transmitter counts and leakage-freedom
  std::map<int, int> train_ct, val_ct, test_ct;
  for (const auto& f : sb.train_frames) train_ct[f.tx_id]++;
  for (const auto& f : sb.val_frames) val_ct[f.tx_id]++;
  for (const auto& f : sb.test_frames) test_ct[f.tx_id]++;
  for (int tx : {0, 1}) {
    CHECK(train_ct[tx] + val_ct[tx] == 70);
    CHECK(test_ct[tx] == 30);
  }
  for (int tx : {2, 3}) {
    CHECK(train_ct[tx] + val_ct[tx] == 100);
    CHECK(test_ct[tx] == 0);
  }
  for (int tx : {4, 5}) {
    CHECK(train_ct[tx] + val_ct[tx] == 0);
    CHECK(test_ct[tx] == 100);
  }

  // test_is_outlier marks exactly the O frames
  REQUIRE(sb.test_is_outlier.size() == sb.test_frames.size());
  for (std::size_t i = 0; i < sb.test_frames.size(); ++i)
    CHECK(sb.test_is_outlier[i] ==
          (part.unseen_outliers.count(sb.test_frames[i].tx_id) > 0));

  // all split frames are normalized
  for (const auto& f : sb.train_frames)
    CHECK(frame_power(f) == doctest::Approx(1.0).epsilon(1e-5));
  for (const auto& f : sb.test_frames)
    CHECK(frame_power(f) == doctest::Approx(1.0).epsilon(1e-5));

  // determinism
  const auto sb2 = make_splits(corpus, part, 7);
  REQUIRE(sb2.train_frames.size() == sb.train_frames.size());
  for (std::size_t i = 0; i < sb.train_frames.size(); ++i)
    CHECK(sb2.train_frames[i].samples == sb.train_frames[i].samples);

  SetPartition missing = part;
  missing.unseen_outliers.insert(99);  // not in the corpus
  CHECK_THROWS(make_splits(corpus, missing, 7));
}

TEST_CASE("normalize_frame: scaling, idempotence, zero error") {
  IQFrame f;
  f.samples.assign(kFrameLen, cxf{2.0f, 0.0f});
  const auto n = normalize_frame(f);
  for (auto s : n.samples) CHECK(std::abs(std::complex<double>(s) - cxd{1.0, 0.0}) < 1e-6);
  const auto nn = normalize_frame(n);
  for (std::size_t i = 0; i < n.samples.size(); ++i)
    CHECK(std::abs(std::complex<double>(nn.samples[i]) - std::complex<double>(n.samples[i])) < 1e-6);
  IQFrame z;
  z.samples.assign(kFrameLen, cxf{0.0f, 0.0f});
  CHECK_THROWS(normalize_frame(z));
}

TEST_CASE("augment adds calibrated noise then a pure rotation") {
  const auto corpus = tiny_corpus(1, 1);
  const auto base = normalize_frame(corpus.frames.at(0)[0]);

  // noise disabled: magnitudes preserved, global rotation only
  const auto rot = augment(base, 11, 0.0);
  for (std::size_t n = 0; n < base.samples.size(); ++n)
    CHECK(std::abs(rot.samples[n]) ==
          doctest::Approx(std::abs(base.samples[n])).epsilon(1e-5));
  const auto q0 = std::complex<double>(rot.samples[0]) /
                  std::complex<double>(base.samples[0]);
  const auto q1 = std::complex<double>(rot.samples[1]) /
                  std::complex<double>(base.samples[1]);
  CHECK(std::abs(q0 - q1) < 1e-5);
  CHECK(std::abs(std::abs(q0) - 1.0) < 1e-6);

  // determinism
  const auto a1 = augment(base, 123);
  const auto a2 = augment(base, 123);
  CHECK(a1.samples == a2.samples);

  // monte-carlo added-noise variance: rotate-back trick won't work (the
  // rotation is applied after the noise), so measure |y|^2 growth instead:
  // E|x + n|^2 = E|x|^2 + var  for independent zero-mean noise
  double p = 0.0;
  const int reps = 4000;  // ~1e6 samples
  for (int k = 0; k < reps; ++k) {
    const auto y = augment(base, 100000 + k);
    p += frame_power(y);
  }
  p /= reps;
  const double var_hat = p - frame_power(base);
  CHECK(var_hat == doctest::Approx(0.01).epsilon(0.05));
}

TEST_CASE("label schemes per architecture") {
  const auto corpus = tiny_corpus(4, 10);
  SetPartition part;
  part.authorized = {2, 0, 1};  // deliberate non-sorted order
  part.known_outliers = {3};
  std::vector<IQFrame> frames;
  for (int tx : {0, 1, 2, 3})
    for (const auto& f : corpus.frames.at(tx)) frames.push_back(f);

  const auto disc = label_frames(frames, part, Scheme::kDisc);
  REQUIRE(disc.labels.size() == frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    CHECK(disc.labels[i] == (frames[i].tx_id == 3 ? 1 : 0));

  const auto dc = label_frames(frames, part, Scheme::kDClass);
  CHECK(dc.n_authorized == 3);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const int tx = frames[i].tx_id;
    const int expect = tx == 3 ? 3 : part.authorized_index(tx);
    CHECK(dc.labels[i] == expect);
  }

  const auto ova = label_frames(frames, part, Scheme::kOvA);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto v = ova.ova_label_vector(i);
    REQUIRE(v.size() == 3);
    const int tx = frames[i].tx_id;
    for (int j = 0; j < 3; ++j)
      CHECK(v[j] == (part.authorized_index(tx) == j ? 1 : 0));
    if (tx == 3) CHECK(std::count(v.begin(), v.end(), 0) == 3);
  }

  // O frame offered for training labels is an error
  SetPartition p2 = part;
  p2.known_outliers.clear();
  p2.unseen_outliers = {3};
  CHECK_THROWS(label_frames(frames, p2, Scheme::kDisc));
}

TEST_CASE("class weights follow N/(n_classes * N_c)") {
  // 50/50 -> symmetric
  std::vector<int> l(100, 0);
  std::fill(l.begin() + 50, l.end(), 1);
  auto w = class_weights(l);
  CHECK(w.at(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w.at(1) == doctest::Approx(1.0).epsilon(1e-12));

  // 25/75 -> (2.0, 2/3)
  std::fill(l.begin(), l.begin() + 25, 0);
  std::fill(l.begin() + 25, l.end(), 1);
  w = class_weights(l);
  CHECK(w.at(0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(w.at(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // 10/10/80 -> (10/3, 10/3, 5/12)
  l.assign(10, 0);
  l.insert(l.end(), 10, 1);
  l.insert(l.end(), 80, 2);
  w = class_weights(l);
  CHECK(w.at(0) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(w.at(1) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(w.at(2) == doctest::Approx(5.0 / 12.0).epsilon(1e-12));

  // mean of weight_c * N_c equals N / n_classes
  double s = 0.0;
  for (auto [c, wc] : w) s += wc * std::count(l.begin(), l.end(), c);
  CHECK(s / 3.0 == doctest::Approx(100.0 / 3.0).epsilon(1e-12));

  // single observed class still yields a weight (|K|=0 training)
  w = class_weights(std::vector<int>(40, 0));
  CHECK(w.size() == 1);
  CHECK(w.at(0) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS(class_weights({}));
}
