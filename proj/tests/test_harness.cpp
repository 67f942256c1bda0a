#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oswa/harness/experiment.hpp"

using namespace oswa;
using namespace oswa::harness;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::trunc);
  f << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// small but trainable-in-milliseconds configuration
ExperimentConfig fast_config(const fs::path& out_dir) {
  ExperimentConfig cfg;
  sim::CorpusParams cp;
  cp.n_tx = 6;
  cp.frames_per_tx_min = cp.frames_per_tx_max = 40;
  cp.seed = 21;
  cp.ranges = sim::widely_separated_ranges();
  cfg.generate = cp;
  cfg.n_authorized = 2;
  cfg.n_known = 1;
  cfg.n_unseen = 2;
  cfg.archs = {data::Scheme::kDisc};
  cfg.n_realizations = 2;
  cfg.base_seed = 3;
  cfg.train.epochs = 1;
  cfg.extractor.block_filters = {8, 8};
  cfg.extractor.feature_dim = 8;
  cfg.hidden_width = 16;
  cfg.output_dir = out_dir.string();
  cfg.save_artifacts = false;
  return cfg;
}

}  // namespace

TEST_CASE("config loading validates and reports errors as ConfigError") {
  TempDir td("oswa_harness_cfg");
  const fs::path cfg_path = td.path / "cfg.json";

  write_file(cfg_path, "{ not json");
  CHECK_THROWS_AS(load_config(cfg_path.string()), ConfigError);

  write_file(cfg_path, R"({"sizes": {"n_authorized": 3}})");
  CHECK_THROWS_AS(load_config(cfg_path.string()), ConfigError);  // no corpus

  write_file(cfg_path, R"({
    "corpus": {"generate": {"n_tx": 8, "frames_per_tx": [30, 30], "seed": 5,
                "impairment_ranges": {"scale": 1.5}}},
    "sizes": {"n_authorized": 3, "n_known": 2, "n_unseen": 3},
    "archs": ["disc", "ova"],
    "n_realizations": 4,
    "train": {"epochs": 2, "batch_size": 32},
    "extractor": {"block_filters": [8, 8]},
    "head": {"hidden_width": 24},
    "output_dir": "/tmp/x"
  })");
  const auto cfg = load_config(cfg_path.string());
  CHECK(cfg.generate.has_value());
  CHECK(cfg.generate->n_tx == 8);
  CHECK(cfg.generate->frames_per_tx_min == 30);
  // scale=1.5 stretches the default ranges
  CHECK(cfg.generate->ranges.iq_gain_imbalance_db.hi ==
        doctest::Approx(sim::ImpairmentRanges{}.iq_gain_imbalance_db.hi * 1.5));
  CHECK(cfg.n_authorized == 3);
  CHECK(cfg.archs == std::vector<data::Scheme>{data::Scheme::kDisc,
                                               data::Scheme::kOvA});
  CHECK(cfg.n_realizations == 4);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.extractor.feature_dim == 8);  // defaulted to last block
  CHECK(cfg.hidden_width == 24);

  write_file(cfg_path, R"({"corpus": {"generate": {}}, "n_realizations": 0})");
  CHECK_THROWS_AS(load_config(cfg_path.string()), ConfigError);

  CHECK_THROWS_AS(load_config((td.path / "nope.json").string()), ConfigError);
}

TEST_CASE("missing corpus files surface as MissingDataError") {
  ExperimentConfig cfg;
  cfg.corpus_bin = "/tmp/definitely_missing_oswa.bin";
  cfg.corpus_manifest = "/tmp/definitely_missing_oswa.json";
  CHECK_THROWS_AS(load_or_generate_corpus(cfg), MissingDataError);
}

TEST_CASE("run_realization is deterministic and guards feasibility") {
  TempDir td("oswa_harness_real");
  const auto cfg = fast_config(td.path);
  const auto corpus = load_or_generate_corpus(cfg);

  const SizeSpec sizes{2, 1, 2};
  const auto a = run_realization(cfg, corpus, sizes, 1, 0);
  const auto b = run_realization(cfg, corpus, sizes, 1, 0);
  CHECK(a.partition.authorized == b.partition.authorized);
  REQUIRE(a.archs.count("disc") == 1);
  CHECK(a.archs.at("disc").auc == b.archs.at("disc").auc);
  CHECK(a.archs.at("disc").gamma == b.archs.at("disc").gamma);
  CHECK(a.archs.at("disc").balanced_accuracy ==
        b.archs.at("disc").balanced_accuracy);
  CHECK(std::isnan(a.archs.at("disc").closed_set_accuracy));

  // different realization index gives a different partition draw
  const auto c = run_realization(cfg, corpus, sizes, 1, 1);
  CHECK(c.partition.authorized != a.partition.authorized);

  CHECK_THROWS_AS(run_realization(cfg, corpus, SizeSpec{4, 2, 2}, 0, 0),
                  InfeasibleError);
}

TEST_CASE("result files round-trip including the NaN column") {
  TempDir td("oswa_harness_rt");
  RealizationResult r;
  r.realization = 3;
  r.sweep_value = 7;
  r.partition.authorized = {4, 1};
  r.partition.known_outliers = {2};
  r.partition.unseen_outliers = {0, 5};
  ArchResult ar;
  ar.auc = 0.875;
  ar.balanced_accuracy = 0.8125;
  ar.closed_set_accuracy = std::numeric_limits<double>::quiet_NaN();
  ar.gamma = {0.25};
  ar.sigma = {0.0833333333333333};
  ar.n_params = 12345;
  r.archs["disc"] = ar;

  const std::string path = (td.path / "r_7_3.json").string();
  write_result_file(r, path);
  const auto back = read_result_file(path);
  CHECK(back.realization == 3);
  CHECK(back.sweep_value == 7);
  CHECK(back.partition.authorized == r.partition.authorized);
  CHECK(back.partition.unseen_outliers == r.partition.unseen_outliers);
  CHECK(back.archs.at("disc").auc == ar.auc);
  CHECK(back.archs.at("disc").gamma == ar.gamma);
  CHECK(std::isnan(back.archs.at("disc").closed_set_accuracy));
  CHECK(back.archs.at("disc").n_params == 12345);

  CHECK_THROWS_AS(read_result_file((td.path / "missing.json").string()),
                  MissingDataError);
}

TEST_CASE("sweep produces complete outputs and resumes from disk") {
  TempDir td("oswa_harness_sweep");
  auto cfg = fast_config(td.path);
  cfg.sweep_known = {0, 1};

  const auto out = sweep_known(cfg);
  // 2 sweep points x 2 realizations, one arch each
  CHECK(out.results.size() == 4);
  CHECK(out.summary.size() == 2);
  for (const auto& row : out.summary) CHECK(row.n_realizations == 2);

  const fs::path csv_path = td.path / "realizations.csv";
  REQUIRE(fs::exists(csv_path));
  REQUIRE(fs::exists(td.path / "summary.json"));
  REQUIRE(fs::exists(td.path / "fig_auc.svg"));
  REQUIRE(fs::exists(td.path / "fig_acc.svg"));

  const std::string csv = read_file(csv_path);
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line ==
        "sweep_value,arch,realization,auc,balanced_accuracy,"
        "closed_set_accuracy,gamma_summary,n_params");
  int rows = 0;
  while (std::getline(lines, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 4);

  // |K|=0 sweep point trains disc with authorized-only data; its result file
  // exists and parses
  CHECK(fs::exists(td.path / "results" / "r_0_0.json"));

  // resume: rerunning recomputes nothing and reproduces the csv byte for byte
  const auto t0 = fs::last_write_time(td.path / "results" / "r_1_1.json");
  const auto out2 = sweep_known(cfg);
  CHECK(fs::last_write_time(td.path / "results" / "r_1_1.json") == t0);
  CHECK(read_file(csv_path) == csv);
  CHECK(out2.results.size() == 4);

  // infeasible sweep point rejected before any training
  auto bad = fast_config(td.path / "bad");
  bad.sweep_known = {0, 5};  // 2+5+2 > 6 transmitters
  CHECK_THROWS_AS(sweep_known(bad), InfeasibleError);

  // report on a directory with no result files is a missing-data error
  fs::create_directories(td.path / "empty");
  CHECK_THROWS_AS(report((td.path / "empty").string()), MissingDataError);
}

TEST_CASE("summary statistics recompute from the raw results") {
  std::vector<RealizationResult> rs(3);
  const double aucs[3] = {0.8, 0.9, 0.7};
  const double accs[3] = {0.75, 0.85, 0.65};
  for (int i = 0; i < 3; ++i) {
    rs[i].realization = i;
    rs[i].sweep_value = 10;
    ArchResult ar;
    ar.auc = aucs[i];
    ar.balanced_accuracy = accs[i];
    rs[i].archs["ova"] = ar;
  }
  const auto rows = summarize(rs);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].sweep_value == 10);
  CHECK(rows[0].arch == "ova");
  CHECK(rows[0].auc_mean == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(rows[0].auc_std == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rows[0].acc_mean == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rows[0].acc_std == doctest::Approx(0.1).epsilon(1e-9));
}
