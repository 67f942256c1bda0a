#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#include "oswa/data/pipeline.hpp"
#include "oswa/nn/model.hpp"
#include "oswa/nn/train.hpp"
#include "oswa/rng.hpp"

using namespace oswa;
using namespace oswa::nn;

namespace {

// small enough to train in seconds, deep enough to actually learn the toy
// problems (shallow two-block trunks stall on phase-randomized frames)
ExtractorConfig small_extractor() {
  ExtractorConfig ec;
  ec.block_filters = {16, 16, 32, 32};
  ec.feature_dim = 32;
  return ec;
}

// toy two-transmitter corpus with exaggerated impairments, split for a disc
// problem: tx0 authorized, tx1 known outlier
struct ToyData {
  data::LabeledDataset train, val;
};

ToyData toy_data(std::uint64_t seed, data::Scheme scheme = data::Scheme::kDisc,
                 int frames_per_tx = 120) {
  sim::CorpusParams cp;
  cp.n_tx = 2;
  cp.frames_per_tx_min = cp.frames_per_tx_max = frames_per_tx;
  cp.seed = seed;
  cp.ranges = sim::widely_separated_ranges();
  const auto corpus = sim::generate_corpus(cp);
  data::SetPartition part;
  part.authorized = {0};
  part.known_outliers = {1};
  const auto sb = data::make_splits(corpus, part, seed);
  ToyData td;
  td.train = data::label_frames(sb.train_frames, part, scheme);
  td.val = data::label_frames(sb.val_frames, part, scheme);
  return td;
}

}  // namespace

TEST_CASE("parameter count: dclass grows by 81 per transmitter, disc flat") {
  const ExtractorConfig ec;  // full-size trunk
  HeadConfig hd{Arch::kDClass, 1, 80, 0.001};
  std::int64_t prev = param_count(ec, hd);
  for (int a = 2; a <= 50; ++a) {
    hd.n_authorized = a;
    const std::int64_t now = param_count(ec, hd);
    CHECK(now - prev == 81);  // one more output row: 80 weights + 1 bias
    prev = now;
  }
  HeadConfig hs{Arch::kDisc, 1, 80, 0.001};
  const std::int64_t disc1 = param_count(ec, hs);
  for (int a = 2; a <= 50; ++a) {
    hs.n_authorized = a;
    CHECK(param_count(ec, hs) == disc1);
  }
  // ova replicates the whole head per authorized transmitter
  HeadConfig ho{Arch::kOvA, 1, 80, 0.001};
  const std::int64_t ova1 = param_count(ec, ho);
  ho.n_authorized = 2;
  const std::int64_t per_head = ova1 - param_count(ec, HeadConfig{Arch::kOvA, 1, 80, 0.001}) +
                                (param_count(ec, ho) - ova1);
  CHECK(param_count(ec, ho) - ova1 == 64 * 80 + 80 + 80 + 1);
  (void)per_head;

  // param_count agrees with the actual allocation
  Model<float> m(ec, HeadConfig{Arch::kDClass, 7, 80, 0.001});
  hd.n_authorized = 7;
  CHECK(m.param_count() == param_count(ec, hd));
}

TEST_CASE("output dimensions and score conventions per architecture") {
  const auto ec = small_extractor();
  const auto td = toy_data(3);
  TrainedModel tm;
  tm.extractor = ec;

  for (auto arch : {Arch::kDisc, Arch::kDClass, Arch::kOvA}) {
    tm.head = HeadConfig{arch, 3, 16, 0.0};
    Model<float> m(ec, tm.head);
    m.init_params(5);
    tm.weights = m.params();
    Scorer sc(tm);
    const auto z = sc.score(td.train.frames[0]);
    CHECK(z.arch == arch);
    const int expect = arch == Arch::kDisc ? 1 : arch == Arch::kDClass ? 4 : 3;
    REQUIRE(static_cast<int>(z.values.size()) == expect);
    for (double v : z.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    if (arch == Arch::kDClass) {
      const double s = std::accumulate(z.values.begin(), z.values.end(), 0.0);
      CHECK(s == doctest::Approx(1.0).epsilon(1e-5));
    }
  }
}

TEST_CASE("training reduces validation loss on a separable toy problem") {
  const auto td = toy_data(11);
  Hyper hy;
  hy.epochs = 25;
  hy.seed = 2;
  hy.batch_size = 16;  // 163 toy frames need small batches for enough steps
  const auto tm = train(td.train, td.val, small_extractor(),
                        HeadConfig{Arch::kDisc, 1, 80, 0.001}, hy);
  REQUIRE(tm.history.size() == 25);
  CHECK(tm.history.back().second < tm.history.front().second);
  CHECK(tm.best_val_loss <= tm.history.front().second);
  // best_val_loss is the minimum of the recorded history
  double mn = tm.history.front().second;
  for (const auto& [tr, va] : tm.history) mn = std::min(mn, va);
  CHECK(tm.best_val_loss == doctest::Approx(mn).epsilon(1e-12));

  // trained scorer separates the toy classes decently
  Scorer sc(tm);
  int ok = 0, n = 0;
  for (std::size_t i = 0; i < td.val.frames.size(); ++i) {
    const double z = sc.score(td.val.frames[i]).values[0];
    ok += (z > 0.5) == (td.val.labels[i] == 1);
    ++n;
  }
  CHECK(static_cast<double>(ok) / n > 0.9);
}

TEST_CASE("training is deterministic in the seed") {
  const auto td = toy_data(13);
  Hyper hy;
  hy.epochs = 2;
  hy.seed = 77;
  const auto a = train(td.train, td.val, small_extractor(),
                       HeadConfig{Arch::kDisc, 1, 16, 0.001}, hy);
  const auto b = train(td.train, td.val, small_extractor(),
                       HeadConfig{Arch::kDisc, 1, 16, 0.001}, hy);
  CHECK(a.weights == b.weights);
  CHECK(a.history == b.history);
  hy.seed = 78;
  const auto c = train(td.train, td.val, small_extractor(),
                       HeadConfig{Arch::kDisc, 1, 16, 0.001}, hy);
  CHECK(a.weights != c.weights);
}

TEST_CASE("epochs=0 returns the untouched initialization") {
  const auto td = toy_data(3);
  Hyper hy;
  hy.epochs = 0;
  hy.seed = 9;
  const auto tm = train(td.train, td.val, small_extractor(),
                        HeadConfig{Arch::kDisc, 1, 16, 0.001}, hy);
  CHECK(tm.history.empty());
  Model<float> m(small_extractor(), HeadConfig{Arch::kDisc, 1, 16, 0.001});
  m.init_params(hy.seed);
  CHECK(tm.weights == m.params());
}

TEST_CASE("checkpoint round trip reproduces scores exactly") {
  const auto td = toy_data(5, data::Scheme::kDClass);
  Hyper hy;
  hy.epochs = 1;
  hy.seed = 4;
  const auto tm = train(td.train, td.val, small_extractor(),
                        HeadConfig{Arch::kDClass, 1, 16, 0.001}, hy);
  const std::string path = "/tmp/oswa_test_ckpt.bin";
  save_checkpoint(tm, path);
  const auto back = load_checkpoint(path);
  CHECK(back.weights == tm.weights);
  CHECK(back.best_val_loss == tm.best_val_loss);
  CHECK(back.head.arch == tm.head.arch);
  CHECK(back.extractor.block_filters == tm.extractor.block_filters);
  Scorer s1(tm), s2(back);
  for (int i = 0; i < 5; ++i) {
    const auto za = s1.score(td.val.frames[i]);
    const auto zb = s2.score(td.val.frames[i]);
    CHECK(za.values == zb.values);
  }
  std::remove(path.c_str());
}

TEST_CASE("analytic gradients match finite differences in double") {
  ExtractorConfig ec;
  ec.block_filters = {4, 6};  // includes a projection skip (2->4, 4->6)
  ec.feature_dim = 6;

  Rng rng(321);
  std::vector<double> input(2 * kFrameLen);
  for (auto& v : input) v = rng.normal();

  for (auto arch : {Arch::kDisc, Arch::kDClass, Arch::kOvA}) {
    HeadConfig hc{arch, 3, 8, 0.0};  // no l2: checking the data term alone
    Model<double> m(ec, hc);
    m.init_params(8);
    auto ws = m.make_workspace();
    const int out = m.output_dim();
    std::vector<double> logits(out), dlogits(out);
    const int label = arch == Arch::kDisc ? 1 : 2;

    auto loss_at = [&]() {
      m.forward(input.data(), ws, logits.data());
      return loss_and_dlogits(arch, logits.data(), out, label, 1.3, 1.0,
                              dlogits.data());
    };

    m.zero_grads();
    const double l0 = loss_at();
    (void)l0;
    m.backward(ws, dlogits.data());
    const auto analytic = m.grads();

    const double eps = 1e-6;
    int checked = 0;
    double max_rel = 0.0;
    Rng pick(arch == Arch::kDisc ? 1u : arch == Arch::kDClass ? 2u : 3u);
    while (checked < 100) {
      const std::size_t i = pick.below(m.params().size());
      const double save = m.params()[i];
      m.params()[i] = save + eps;
      const double lp = loss_at();
      m.params()[i] = save - eps;
      const double lm = loss_at();
      m.params()[i] = save;
      const double fd = (lp - lm) / (2 * eps);
      const double denom = std::max({std::abs(fd), std::abs(analytic[i]), 1e-8});
      const double rel = std::abs(fd - analytic[i]) / denom;
      max_rel = std::max(max_rel, rel);
      CHECK(rel < 1e-3);
      ++checked;
    }
    MESSAGE("arch " << static_cast<int>(arch) << " max rel err " << max_rel);
  }
}

TEST_CASE("per-sample loss values match hand-computed cross entropies") {
  // disc: BCE with logit x and label y, weighted
  double dl[1];
  const double x = 0.7;
  double loss = loss_and_dlogits(Arch::kDisc, &x, 1, 1, 2.0, 1.0, dl);
  const double p = 1.0 / (1.0 + std::exp(-x));
  CHECK(loss == doctest::Approx(-2.0 * std::log(p)).epsilon(1e-12));
  CHECK(dl[0] == doctest::Approx(2.0 * (p - 1.0)).epsilon(1e-12));

  // dclass: softmax cross entropy
  const double lg[3] = {0.2, -0.1, 0.5};
  double dg[3];
  loss = loss_and_dlogits(Arch::kDClass, lg, 3, 2, 1.0, 1.0, dg);
  double zsum = 0.0;
  for (double v : lg) zsum += std::exp(v);
  CHECK(loss == doctest::Approx(-std::log(std::exp(0.5) / zsum)).epsilon(1e-12));
  CHECK(dg[2] == doctest::Approx(std::exp(0.5) / zsum - 1.0).epsilon(1e-12));
  CHECK(dg[0] == doctest::Approx(std::exp(0.2) / zsum).epsilon(1e-12));

  // ova: independent BCE per head; outlier label (class index 3) -> all zeros
  const double lo[3] = {0.3, -0.4, 1.1};
  double dov[3];
  loss = loss_and_dlogits(Arch::kOvA, lo, 3, 3, 1.0, 1.0, dov);
  double expect = 0.0;
  for (double v : lo) expect += std::log(1.0 + std::exp(v));
  CHECK(loss == doctest::Approx(expect).epsilon(1e-10));
  for (int i = 0; i < 3; ++i)
    CHECK(dov[i] == doctest::Approx(1.0 / (1.0 + std::exp(-lo[i]))).epsilon(1e-12));
}
