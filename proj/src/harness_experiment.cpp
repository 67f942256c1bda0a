#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "oswa/harness/experiment.hpp"
#include "oswa/rng.hpp"

namespace oswa::harness {

namespace fs = std::filesystem;
using data::Scheme;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTagPartition = 0x70617274ULL;
constexpr std::uint64_t kTagSplit = 0x73706c74ULL;
constexpr std::uint64_t kTagTrain = 0x7472616eULL;

std::uint64_t arch_tag(Scheme s) { return static_cast<std::uint64_t>(s) + 1; }

void save_scores_csv(const std::string& path,
                     const std::vector<nn::ScoreVector>& scores,
                     const std::vector<bool>& is_outlier) {
  std::ofstream f(path, std::ios::trunc);
  f << "is_outlier,outlier_score\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%d,%.17g\n", is_outlier[i] ? 1 : 0,
                  decide::outlier_score(scores[i]));
    f << buf;
  }
}

}  // namespace

RealizationResult run_realization(const ExperimentConfig& cfg,
                                  const sim::Corpus& corpus,
                                  const SizeSpec& sizes, int sweep_value,
                                  int realization_index) {
  const std::vector<int> pool = corpus.tx_ids();
  if (static_cast<std::size_t>(sizes.n_authorized) + sizes.n_known +
          sizes.n_unseen >
      pool.size())
    throw InfeasibleError("|A|+|K|+|O| exceeds the corpus transmitter pool");

  const std::uint64_t sv = static_cast<std::uint64_t>(sweep_value);
  const std::uint64_t ri = static_cast<std::uint64_t>(realization_index);

  RealizationResult res;
  res.realization = realization_index;
  res.sweep_value = sweep_value;
  res.partition = data::partition_transmitters(
      pool, sizes.n_authorized, sizes.n_known, sizes.n_unseen,
      seed_mix({cfg.base_seed, sv, ri, kTagPartition}));
  const data::SplitBundle splits = data::make_splits(
      corpus, res.partition, seed_mix({cfg.base_seed, sv, ri, kTagSplit}));

  for (Scheme arch : cfg.archs) {
    const data::LabeledDataset train_ds =
        data::label_frames(splits.train_frames, res.partition, arch);
    const data::LabeledDataset val_ds =
        data::label_frames(splits.val_frames, res.partition, arch);

    nn::HeadConfig hc;
    hc.arch = arch;
    hc.n_authorized = sizes.n_authorized;
    hc.hidden_width = cfg.hidden_width;
    hc.l2_weight = cfg.l2_weight;

    nn::Hyper hyper = cfg.train;
    hyper.seed = seed_mix({cfg.base_seed, sv, ri, arch_tag(arch), kTagTrain});

    nn::TrainedModel tm;
    try {
      tm = nn::train(train_ds, val_ds, cfg.extractor, hc, hyper);
    } catch (const std::exception& e) {
      throw std::runtime_error("training failed (sweep=" +
                               std::to_string(sweep_value) + ", realization=" +
                               std::to_string(realization_index) + ", arch=" +
                               data::to_string(arch) + "): " + e.what());
    }

    nn::Scorer scorer(tm);
    ArchResult ar;
    ar.n_params = nn::param_count(cfg.extractor, hc);

    // thresholds from training scores of authorized frames (no augmentation)
    decide::ThresholdSpec thr;
    thr.arch = arch;
    if (arch == Scheme::kDisc) {
      std::vector<double> auth_scores;
      for (std::size_t i = 0; i < train_ds.frames.size(); ++i)
        if (train_ds.labels[i] == 0)
          auth_scores.push_back(scorer.score(train_ds.frames[i]).values[0]);
      thr = decide::fit_threshold_disc(auth_scores);
    } else if (arch == Scheme::kOvA) {
      std::map<int, std::vector<double>> per_class;
      for (std::size_t i = 0; i < train_ds.frames.size(); ++i) {
        const int label = train_ds.labels[i];
        if (label < sizes.n_authorized)
          per_class[label].push_back(
              scorer.score(train_ds.frames[i]).values[label]);
      }
      thr = decide::fit_threshold_ova(per_class, sizes.n_authorized);
    }
    ar.gamma = thr.gamma;
    ar.sigma = thr.sigma;

    // test evaluation
    std::vector<nn::ScoreVector> test_scores =
        scorer.score_batch(splits.test_frames);
    std::vector<decide::Decision> decisions;
    decisions.reserve(test_scores.size());
    std::vector<std::pair<double, bool>> roc_input;
    roc_input.reserve(test_scores.size());
    for (std::size_t i = 0; i < test_scores.size(); ++i) {
      decisions.push_back(arch == Scheme::kDClass
                              ? decide::decide_dclass(test_scores[i])
                              : decide::decide(test_scores[i], thr));
      roc_input.emplace_back(decide::outlier_score(test_scores[i]),
                             splits.test_is_outlier[i]);
    }
    ar.balanced_accuracy =
        decide::balanced_accuracy(decisions, splits.test_is_outlier);
    ar.auc = decide::roc_curve(roc_input).auc;

    if (arch == Scheme::kDisc) {
      ar.closed_set_accuracy = std::numeric_limits<double>::quiet_NaN();
    } else {
      std::int64_t n_auth = 0, correct = 0;
      for (std::size_t i = 0; i < test_scores.size(); ++i) {
        if (splits.test_is_outlier[i]) continue;
        ++n_auth;
        const int truth =
            res.partition.authorized_index(splits.test_frames[i].tx_id);
        if (decide::classify_authorized(test_scores[i]) == truth) ++correct;
      }
      ar.closed_set_accuracy =
          n_auth > 0 ? static_cast<double>(correct) / static_cast<double>(n_auth)
                     : std::numeric_limits<double>::quiet_NaN();
    }

    if (cfg.save_artifacts && !cfg.output_dir.empty()) {
      const fs::path dir = fs::path(cfg.output_dir) / "artifacts" /
                           ("sweep_" + std::to_string(sweep_value)) /
                           ("real_" + std::to_string(realization_index)) /
                           data::to_string(arch);
      fs::create_directories(dir);
      nn::save_checkpoint(tm, (dir / "checkpoint.bin").string());
      json tj{{"arch", data::to_string(arch)},
              {"gamma", thr.gamma},
              {"sigma", thr.sigma}};
      std::ofstream tf(dir / "thresholds.json", std::ios::trunc);
      tf << tj.dump(2) << "\n";
      save_scores_csv((dir / "test_scores.csv").string(), test_scores,
                      splits.test_is_outlier);
    }

    res.archs[data::to_string(arch)] = ar;
  }
  return res;
}

void write_result_file(const RealizationResult& r, const std::string& path) {
  json archs = json::object();
  for (const auto& [name, ar] : r.archs) {
    json a{{"auc", ar.auc},
           {"balanced_accuracy", ar.balanced_accuracy},
           {"gamma", ar.gamma},
           {"sigma", ar.sigma},
           {"n_params", ar.n_params}};
    if (std::isnan(ar.closed_set_accuracy))
      a["closed_set_accuracy"] = nullptr;
    else
      a["closed_set_accuracy"] = ar.closed_set_accuracy;
    archs[name] = a;
  }
  json j{{"realization", r.realization},
         {"sweep_value", r.sweep_value},
         {"partition",
          {{"authorized", r.partition.authorized},
           {"known", std::vector<int>(r.partition.known_outliers.begin(),
                                      r.partition.known_outliers.end())},
           {"unseen", std::vector<int>(r.partition.unseen_outliers.begin(),
                                       r.partition.unseen_outliers.end())}}},
         {"archs", archs}};
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write result file: " + tmp);
    f << j.dump(2) << "\n";
  }
  fs::rename(tmp, path);
}

RealizationResult read_result_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw MissingDataError("missing result file: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw MissingDataError("corrupt result file " + path + ": " + e.what());
  }
  RealizationResult r;
  r.realization = j.at("realization").get<int>();
  r.sweep_value = j.at("sweep_value").get<int>();
  r.partition.authorized = j.at("partition").at("authorized").get<std::vector<int>>();
  for (int tx : j.at("partition").at("known").get<std::vector<int>>())
    r.partition.known_outliers.insert(tx);
  for (int tx : j.at("partition").at("unseen").get<std::vector<int>>())
    r.partition.unseen_outliers.insert(tx);
  for (const auto& [name, a] : j.at("archs").items()) {
    ArchResult ar;
    ar.auc = a.at("auc").get<double>();
    ar.balanced_accuracy = a.at("balanced_accuracy").get<double>();
    ar.closed_set_accuracy = a.at("closed_set_accuracy").is_null()
                                 ? std::numeric_limits<double>::quiet_NaN()
                                 : a.at("closed_set_accuracy").get<double>();
    ar.gamma = a.at("gamma").get<std::vector<double>>();
    ar.sigma = a.at("sigma").get<std::vector<double>>();
    ar.n_params = a.at("n_params").get<std::int64_t>();
    r.archs[name] = ar;
  }
  return r;
}

namespace {

SweepOutput run_sweep(const ExperimentConfig& cfg,
                      const std::vector<int>& sweep_values,
                      const std::vector<Scheme>& archs,
                      bool sweep_is_authorized) {
  if (sweep_values.empty()) throw ConfigError("sweep list must be nonempty");

  // feasibility guard before any training starts
  ExperimentConfig run_cfg = cfg;
  run_cfg.archs = archs;
  sim::Corpus corpus = load_or_generate_corpus(cfg);
  const std::size_t pool = corpus.tx_ids().size();
  for (int v : sweep_values) {
    const SizeSpec s = sweep_is_authorized
                           ? SizeSpec{v, cfg.n_known, cfg.n_unseen}
                           : SizeSpec{cfg.n_authorized, v, cfg.n_unseen};
    if (static_cast<std::size_t>(s.n_authorized) + s.n_known + s.n_unseen > pool)
      throw InfeasibleError(
          "sweep point " + std::to_string(v) +
          ": |A|+|K|+|O| exceeds the corpus pool of " + std::to_string(pool));
  }

  const fs::path results_dir = fs::path(cfg.output_dir) / "results";
  fs::create_directories(results_dir);

  SweepOutput out;
  for (int v : sweep_values) {
    const SizeSpec sizes = sweep_is_authorized
                               ? SizeSpec{v, cfg.n_known, cfg.n_unseen}
                               : SizeSpec{cfg.n_authorized, v, cfg.n_unseen};
    for (int r = 0; r < cfg.n_realizations; ++r) {
      const fs::path rf =
          results_dir /
          ("r_" + std::to_string(v) + "_" + std::to_string(r) + ".json");
      if (fs::exists(rf)) {
        out.results.push_back(read_result_file(rf.string()));
        continue;  // resume: finished realizations are not recomputed
      }
      RealizationResult res = run_realization(run_cfg, corpus, sizes, v, r);
      write_result_file(res, rf.string());
      out.results.push_back(std::move(res));
    }
  }

  report(results_dir.string());
  out.summary = summarize(out.results);
  return out;
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<RealizationResult>& results) {
  std::map<std::pair<int, std::string>, std::vector<const ArchResult*>> groups;
  for (const auto& r : results)
    for (const auto& [arch, ar] : r.archs)
      groups[{r.sweep_value, arch}].push_back(&ar);

  std::vector<SummaryRow> rows;
  for (const auto& [key, list] : groups) {
    SummaryRow row;
    row.sweep_value = key.first;
    row.arch = key.second;
    row.n_realizations = static_cast<int>(list.size());
    auto mean_std = [&](auto get) {
      double m = 0.0;
      for (const auto* ar : list) m += get(*ar);
      m /= static_cast<double>(list.size());
      double s = 0.0;
      if (list.size() > 1) {
        for (const auto* ar : list) {
          const double d = get(*ar) - m;
          s += d * d;
        }
        s = std::sqrt(s / static_cast<double>(list.size() - 1));
      }
      return std::make_pair(m, s);
    };
    std::tie(row.auc_mean, row.auc_std) =
        mean_std([](const ArchResult& a) { return a.auc; });
    std::tie(row.acc_mean, row.acc_std) =
        mean_std([](const ArchResult& a) { return a.balanced_accuracy; });
    rows.push_back(row);
  }
  std::sort(rows.begin(), rows.end(), [](const SummaryRow& a, const SummaryRow& b) {
    return std::tie(a.sweep_value, a.arch) < std::tie(b.sweep_value, b.arch);
  });
  return rows;
}

SweepOutput sweep_authorized(const ExperimentConfig& cfg) {
  // OvA (optionally Disc) only; dclass is not part of the |A| sweep protocol
  std::vector<Scheme> archs;
  for (Scheme s : cfg.archs)
    if (s != Scheme::kDClass) archs.push_back(s);
  if (archs.empty()) archs.push_back(Scheme::kOvA);
  return run_sweep(cfg, cfg.sweep_authorized, archs, /*sweep_is_authorized=*/true);
}

SweepOutput sweep_known(const ExperimentConfig& cfg) {
  return run_sweep(cfg, cfg.sweep_known, cfg.archs, /*sweep_is_authorized=*/false);
}

}  // namespace oswa::harness
