// Command-line front end: corpus generation, single realizations, the |A|
// and |K| sweeps, and report rendering.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>

#include <CLI11.hpp>

#include "oswa/harness/experiment.hpp"

namespace fs = std::filesystem;
using oswa::harness::ConfigError;
using oswa::harness::ExperimentConfig;
using oswa::harness::InfeasibleError;
using oswa::harness::MissingDataError;

namespace {

int guarded(const std::function<void()>& fn) {
  try {
    fn();
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible sizes: " << e.what() << "\n";
    return 3;
  } catch (const MissingDataError& e) {
    std::cerr << "missing data: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

void print_summary(const std::vector<oswa::harness::SummaryRow>& rows) {
  std::printf("%12s %8s %6s %10s %10s %10s %10s\n", "sweep_value", "arch", "n",
              "auc_mean", "auc_std", "acc_mean", "acc_std");
  for (const auto& r : rows)
    std::printf("%12d %8s %6d %10.4f %10.4f %10.4f %10.4f\n", r.sweep_value,
                r.arch.c_str(), r.n_realizations, r.auc_mean, r.auc_std,
                r.acc_mean, r.acc_std);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"open-set wireless transmitter authorization experiments"};
  app.require_subcommand(1);

  std::string config_path, results_dir, out_prefix;
  int realization_index = 0;

  auto* gen = app.add_subcommand("generate", "generate a synthetic IQ corpus");
  gen->add_option("--config", config_path, "experiment config (JSON)")->required();
  gen->add_option("--out", out_prefix,
                  "output prefix; writes <prefix>.bin and <prefix>.json")
      ->required();

  auto* run = app.add_subcommand("run", "run a single realization");
  run->add_option("--config", config_path)->required();
  run->add_option("--realization", realization_index, "realization index");

  auto* sa = app.add_subcommand("sweep-auth", "sweep the authorized-set size |A|");
  sa->add_option("--config", config_path)->required();

  auto* sk = app.add_subcommand("sweep-known", "sweep the known-outlier count |K|");
  sk->add_option("--config", config_path)->required();

  auto* rep = app.add_subcommand("report", "render CSV/summary/plots from results");
  rep->add_option("--results", results_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (gen->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = oswa::harness::load_config(config_path);
      if (!cfg.generate)
        throw ConfigError("config has no corpus.generate section");
      oswa::sim::Corpus corpus = oswa::sim::generate_corpus(*cfg.generate);
      oswa::sim::write_corpus(corpus, out_prefix + ".bin", out_prefix + ".json");
      std::printf("wrote %lld frames for %d transmitters to %s.bin\n",
                  static_cast<long long>(corpus.total_frames()),
                  corpus.params.n_tx, out_prefix.c_str());
    });
  }
  if (run->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = oswa::harness::load_config(config_path);
      oswa::sim::Corpus corpus = oswa::harness::load_or_generate_corpus(cfg);
      const oswa::harness::SizeSpec sizes{cfg.n_authorized, cfg.n_known,
                                          cfg.n_unseen};
      auto res = oswa::harness::run_realization(cfg, corpus, sizes,
                                                cfg.n_known, realization_index);
      for (const auto& [arch, ar] : res.archs)
        std::printf(
            "%8s  auc=%.4f  balanced_acc=%.4f  closed_set=%.4f  params=%lld\n",
            arch.c_str(), ar.auc, ar.balanced_accuracy, ar.closed_set_accuracy,
            static_cast<long long>(ar.n_params));
      fs::create_directories(fs::path(cfg.output_dir) / "results");
      oswa::harness::write_result_file(
          res, (fs::path(cfg.output_dir) / "results" /
                ("r_" + std::to_string(res.sweep_value) + "_" +
                 std::to_string(realization_index) + ".json"))
                   .string());
    });
  }
  if (sa->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = oswa::harness::load_config(config_path);
      if (cfg.sweep_authorized.empty())
        throw ConfigError("config has no sweep.authorized list");
      print_summary(oswa::harness::sweep_authorized(cfg).summary);
    });
  }
  if (sk->parsed()) {
    return guarded([&] {
      ExperimentConfig cfg = oswa::harness::load_config(config_path);
      if (cfg.sweep_known.empty())
        throw ConfigError("config has no sweep.known list");
      print_summary(oswa::harness::sweep_known(cfg).summary);
    });
  }
  if (rep->parsed()) {
    return guarded([&] { oswa::harness::report(results_dir); });
  }
  return 1;
}
