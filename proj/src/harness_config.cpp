#include <fstream>

#include <json.hpp>

#include "oswa/harness/experiment.hpp"

namespace oswa::harness {

using nlohmann::json;

namespace {

sim::Interval interval_from_json(const json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

void ranges_from_json(const json& j, sim::ImpairmentRanges& r) {
  if (j.contains("iq_gain_imbalance_db"))
    r.iq_gain_imbalance_db = interval_from_json(j["iq_gain_imbalance_db"]);
  if (j.contains("iq_phase_imbalance_rad"))
    r.iq_phase_imbalance_rad = interval_from_json(j["iq_phase_imbalance_rad"]);
  if (j.contains("dc_offset_re"))
    r.dc_offset_re = interval_from_json(j["dc_offset_re"]);
  if (j.contains("dc_offset_im"))
    r.dc_offset_im = interval_from_json(j["dc_offset_im"]);
  if (j.contains("cfo_normalized"))
    r.cfo_normalized = interval_from_json(j["cfo_normalized"]);
  if (j.contains("phase_noise_std_rad"))
    r.phase_noise_std_rad = interval_from_json(j["phase_noise_std_rad"]);
  if (j.contains("nonlinearity_coeff"))
    r.nonlinearity_coeff = interval_from_json(j["nonlinearity_coeff"]);
  if (j.contains("scale")) r = r.scaled(j["scale"].get<double>());
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config: " + path);
  json j;
  try {
    j = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }

  ExperimentConfig cfg;
  try {
    if (j.contains("corpus")) {
      const auto& c = j["corpus"];
      if (c.contains("bin") && c.contains("manifest")) {
        cfg.corpus_bin = c["bin"].get<std::string>();
        cfg.corpus_manifest = c["manifest"].get<std::string>();
      } else if (c.contains("generate")) {
        const auto& g = c["generate"];
        sim::CorpusParams p;
        if (g.contains("n_tx")) p.n_tx = g["n_tx"].get<int>();
        if (g.contains("frames_per_tx")) {
          p.frames_per_tx_min = g["frames_per_tx"].at(0).get<int>();
          p.frames_per_tx_max = g["frames_per_tx"].at(1).get<int>();
        }
        if (g.contains("snr_db")) p.snr_db = g["snr_db"].get<double>();
        if (g.contains("seed")) p.seed = g["seed"].get<std::uint64_t>();
        if (g.contains("waveform"))
          p.waveform =
              sim::waveform_kind_from_string(g["waveform"].get<std::string>());
        if (g.contains("impairment_ranges"))
          ranges_from_json(g["impairment_ranges"], p.ranges);
        if (g.contains("widely_separated") && g["widely_separated"].get<bool>())
          p.ranges = sim::widely_separated_ranges();
        cfg.generate = p;
      } else {
        throw ConfigError("corpus must provide bin+manifest or generate");
      }
    } else {
      throw ConfigError("config missing corpus section");
    }

    if (j.contains("sizes")) {
      const auto& s = j["sizes"];
      if (s.contains("n_authorized")) cfg.n_authorized = s["n_authorized"].get<int>();
      if (s.contains("n_known")) cfg.n_known = s["n_known"].get<int>();
      if (s.contains("n_unseen")) cfg.n_unseen = s["n_unseen"].get<int>();
    }
    if (j.contains("sweep")) {
      const auto& s = j["sweep"];
      if (s.contains("authorized"))
        cfg.sweep_authorized = s["authorized"].get<std::vector<int>>();
      if (s.contains("known"))
        cfg.sweep_known = s["known"].get<std::vector<int>>();
    }
    if (j.contains("archs")) {
      cfg.archs.clear();
      for (const auto& a : j["archs"])
        cfg.archs.push_back(data::scheme_from_string(a.get<std::string>()));
      if (cfg.archs.empty()) throw ConfigError("archs list must be nonempty");
    }
    if (j.contains("n_realizations"))
      cfg.n_realizations = j["n_realizations"].get<int>();
    if (j.contains("base_seed")) cfg.base_seed = j["base_seed"].get<std::uint64_t>();

    if (j.contains("train")) {
      const auto& t = j["train"];
      if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
      if (t.contains("lr")) cfg.train.lr = t["lr"].get<double>();
      if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<int>();
      if (t.contains("aug_noise_var"))
        cfg.train.aug_noise_var = t["aug_noise_var"].get<double>();
    }
    if (j.contains("extractor")) {
      const auto& e = j["extractor"];
      if (e.contains("block_filters"))
        cfg.extractor.block_filters = e["block_filters"].get<std::vector<int>>();
      if (e.contains("kernel_size"))
        cfg.extractor.kernel_size = e["kernel_size"].get<int>();
      if (e.contains("feature_dim"))
        cfg.extractor.feature_dim = e["feature_dim"].get<int>();
      else
        cfg.extractor.feature_dim = cfg.extractor.block_filters.back();
    }
    if (j.contains("head")) {
      const auto& h = j["head"];
      if (h.contains("hidden_width")) cfg.hidden_width = h["hidden_width"].get<int>();
      if (h.contains("l2_weight")) cfg.l2_weight = h["l2_weight"].get<double>();
    }
    if (j.contains("output_dir")) cfg.output_dir = j["output_dir"].get<std::string>();
    if (j.contains("save_artifacts"))
      cfg.save_artifacts = j["save_artifacts"].get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError("invalid config " + path + ": " + e.what());
  }

  if (cfg.n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
  try {
    cfg.extractor.validate();
    nn::HeadConfig hc;
    hc.n_authorized = std::max(1, cfg.n_authorized);
    hc.hidden_width = cfg.hidden_width;
    hc.l2_weight = cfg.l2_weight;
    hc.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return cfg;
}

sim::Corpus load_or_generate_corpus(const ExperimentConfig& cfg) {
  if (!cfg.corpus_bin.empty()) {
    try {
      return sim::read_corpus(cfg.corpus_bin, cfg.corpus_manifest);
    } catch (const std::exception& e) {
      throw MissingDataError(e.what());
    }
  }
  return sim::generate_corpus(*cfg.generate);
}

}  // namespace oswa::harness
