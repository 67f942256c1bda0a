#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oswa/data/pipeline.hpp"
#include "oswa/decide/decision.hpp"
#include "oswa/nn/train.hpp"
#include "oswa/sim/corpus.hpp"

namespace oswa::harness {

// CLI exit codes: 2 config error, 3 infeasible sizes, 4 missing data.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingDataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  // corpus: either a dataset file pair on disk or generation parameters
  std::string corpus_bin, corpus_manifest;
  std::optional<sim::CorpusParams> generate;

  int n_authorized = 10;
  int n_known = 25;
  int n_unseen = 30;
  std::vector<int> sweep_authorized;  // |A| grid for sweep-auth
  std::vector<int> sweep_known;       // |K| grid for sweep-known

  std::vector<data::Scheme> archs{data::Scheme::kDisc, data::Scheme::kDClass,
                                  data::Scheme::kOvA};
  int n_realizations = 10;
  std::uint64_t base_seed = 1;

  nn::Hyper train;
  nn::ExtractorConfig extractor;
  int hidden_width = 80;
  double l2_weight = 0.001;

  std::string output_dir = "results";
  bool save_artifacts = true;  // per-realization checkpoints and scores
};

ExperimentConfig load_config(const std::string& path);
sim::Corpus load_or_generate_corpus(const ExperimentConfig& cfg);

struct ArchResult {
  double auc = 0.0;
  double balanced_accuracy = 0.0;
  double closed_set_accuracy = 0.0;  // NaN for disc
  std::vector<double> gamma, sigma;  // empty for dclass
  std::int64_t n_params = 0;
};

struct RealizationResult {
  int realization = 0;
  int sweep_value = 0;
  data::SetPartition partition;
  std::map<std::string, ArchResult> archs;
};

struct SizeSpec {
  int n_authorized, n_known, n_unseen;
};

// One end-to-end realization: partition -> splits -> per-arch train ->
// threshold fit on training authorized scores -> test evaluation.
// Deterministic given (cfg.base_seed, sweep_value, realization_index).
RealizationResult run_realization(const ExperimentConfig& cfg,
                                  const sim::Corpus& corpus,
                                  const SizeSpec& sizes, int sweep_value,
                                  int realization_index);

// Per-(sweep point, arch) mean/std over realizations.
struct SummaryRow {
  int sweep_value = 0;
  std::string arch;
  int n_realizations = 0;
  double auc_mean = 0.0, auc_std = 0.0;
  double acc_mean = 0.0, acc_std = 0.0;
};

struct SweepOutput {
  std::vector<RealizationResult> results;
  std::vector<SummaryRow> summary;
};

std::vector<SummaryRow> summarize(const std::vector<RealizationResult>& results);

// |A| sweep at fixed |K| and |O| (dclass is skipped).
SweepOutput sweep_authorized(const ExperimentConfig& cfg);
// |K| sweep at fixed |A| and |O|, all configured archs.
SweepOutput sweep_known(const ExperimentConfig& cfg);

// Reads per-realization result files under dir and emits realizations.csv,
// summary.json, fig_auc.svg and fig_acc.svg. Errors when dir holds no
// results.
void report(const std::string& results_dir);

// Serialization of per-realization results (atomic write via tmp+rename).
void write_result_file(const RealizationResult& r, const std::string& path);
RealizationResult read_result_file(const std::string& path);

}  // namespace oswa::harness
