#include "oswa/sim/corpus.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "oswa/rng.hpp"

namespace oswa::sim {

using nlohmann::json;

std::vector<int> Corpus::tx_ids() const {
  std::vector<int> ids;
  ids.reserve(profiles.size());
  for (const auto& [id, _] : profiles) ids.push_back(id);
  return ids;
}

std::int64_t Corpus::total_frames() const {
  std::int64_t n = 0;
  for (const auto& [_, f] : frames) n += static_cast<std::int64_t>(f.size());
  return n;
}

Corpus generate_corpus(const CorpusParams& params) {
  if (params.n_tx <= 0) throw std::invalid_argument("n_tx must be > 0");
  // [200, 1500] is the default production interval; smaller counts are
  // allowed for desk-scale experiments.
  if (params.frames_per_tx_min < 1 || params.frames_per_tx_max > 1500 ||
      params.frames_per_tx_min > params.frames_per_tx_max)
    throw std::invalid_argument(
        "frames_per_tx interval must satisfy 1 <= min <= max <= 1500");
  params.ranges.validate();

  const SymbolFrame ref = make_reference_waveform(params.waveform, kFrameLen);

  Corpus c;
  c.params = params;
  for (int tx = 0; tx < params.n_tx; ++tx) {
    c.profiles[tx] = sample_profile(params.seed, tx, params.ranges);
    Rng count_rng(seed_mix({params.seed, static_cast<std::uint64_t>(tx),
                            0x636e7463ULL}));
    const int span = params.frames_per_tx_max - params.frames_per_tx_min + 1;
    const int count = params.frames_per_tx_min +
                      static_cast<int>(count_rng.below(span));
    auto& list = c.frames[tx];
    list.reserve(count);
    for (int i = 0; i < count; ++i) {
      const std::uint64_t frame_seed = seed_mix(
          {params.seed, static_cast<std::uint64_t>(tx),
           static_cast<std::uint64_t>(i), 0x6672616dULL});
      list.push_back(
          apply_fingerprint(ref, c.profiles[tx], params.snr_db, frame_seed));
    }
  }
  return c;
}

namespace {

json interval_to_json(const Interval& iv) { return json{iv.lo, iv.hi}; }
Interval interval_from_json(const json& j) {
  return Interval{j.at(0).get<double>(), j.at(1).get<double>()};
}

json ranges_to_json(const ImpairmentRanges& r) {
  return json{{"iq_gain_imbalance_db", interval_to_json(r.iq_gain_imbalance_db)},
              {"iq_phase_imbalance_rad", interval_to_json(r.iq_phase_imbalance_rad)},
              {"dc_offset_re", interval_to_json(r.dc_offset_re)},
              {"dc_offset_im", interval_to_json(r.dc_offset_im)},
              {"cfo_normalized", interval_to_json(r.cfo_normalized)},
              {"phase_noise_std_rad", interval_to_json(r.phase_noise_std_rad)},
              {"nonlinearity_coeff", interval_to_json(r.nonlinearity_coeff)}};
}

ImpairmentRanges ranges_from_json(const json& j) {
  ImpairmentRanges r;
  r.iq_gain_imbalance_db = interval_from_json(j.at("iq_gain_imbalance_db"));
  r.iq_phase_imbalance_rad = interval_from_json(j.at("iq_phase_imbalance_rad"));
  r.dc_offset_re = interval_from_json(j.at("dc_offset_re"));
  r.dc_offset_im = interval_from_json(j.at("dc_offset_im"));
  r.cfo_normalized = interval_from_json(j.at("cfo_normalized"));
  r.phase_noise_std_rad = interval_from_json(j.at("phase_noise_std_rad"));
  r.nonlinearity_coeff = interval_from_json(j.at("nonlinearity_coeff"));
  return r;
}

static_assert(std::endian::native == std::endian::little,
              "dataset writer assumes a little-endian host");

}  // namespace

void write_corpus(const Corpus& corpus, const std::string& bin_path,
                  const std::string& manifest_path) {
  std::ofstream bin(bin_path, std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("cannot open for writing: " + bin_path);

  json tx_list = json::array();
  std::int64_t offset = 0;
  for (const auto& [tx, frames] : corpus.frames) {
    const auto& prof = corpus.profiles.at(tx);
    tx_list.push_back(
        {{"tx_id", tx},
         {"frame_count", frames.size()},
         {"byte_offset", offset},
         {"profile",
          {{"iq_gain_imbalance_db", prof.iq_gain_imbalance_db},
           {"iq_phase_imbalance_rad", prof.iq_phase_imbalance_rad},
           {"dc_offset_re", prof.dc_offset.real()},
           {"dc_offset_im", prof.dc_offset.imag()},
           {"cfo_normalized", prof.cfo_normalized},
           {"phase_noise_std_rad", prof.phase_noise_std_rad},
           {"nonlinearity_coeff", prof.nonlinearity_coeff}}}});
    for (const auto& f : frames) {
      bin.write(reinterpret_cast<const char*>(f.samples.data()),
                kFrameLen * 2 * sizeof(float));
      offset += kFrameLen * 2 * sizeof(float);
    }
  }
  if (!bin) throw std::runtime_error("write failed: " + bin_path);
  bin.close();

  json manifest{{"format", "oswa-iq-v1"},
                {"frame_len", kFrameLen},
                {"seed", corpus.params.seed},
                {"snr_db", corpus.params.snr_db},
                {"waveform", to_string(corpus.params.waveform)},
                {"impairment_ranges", ranges_to_json(corpus.params.ranges)},
                {"frames_per_tx_min", corpus.params.frames_per_tx_min},
                {"frames_per_tx_max", corpus.params.frames_per_tx_max},
                {"transmitters", tx_list}};
  std::ofstream mf(manifest_path, std::ios::trunc);
  if (!mf) throw std::runtime_error("cannot open for writing: " + manifest_path);
  mf << manifest.dump(2) << "\n";
}

Corpus read_corpus(const std::string& bin_path,
                   const std::string& manifest_path) {
  std::ifstream mf(manifest_path);
  if (!mf) throw std::runtime_error("missing manifest: " + manifest_path);
  json manifest = json::parse(mf);
  if (manifest.at("format") != "oswa-iq-v1")
    throw std::runtime_error("unknown dataset format in " + manifest_path);

  std::ifstream bin(bin_path, std::ios::binary);
  if (!bin) throw std::runtime_error("missing frame file: " + bin_path);

  Corpus c;
  c.params.seed = manifest.at("seed").get<std::uint64_t>();
  c.params.snr_db = manifest.at("snr_db").get<double>();
  c.params.waveform =
      waveform_kind_from_string(manifest.at("waveform").get<std::string>());
  c.params.ranges = ranges_from_json(manifest.at("impairment_ranges"));
  c.params.frames_per_tx_min = manifest.at("frames_per_tx_min").get<int>();
  c.params.frames_per_tx_max = manifest.at("frames_per_tx_max").get<int>();
  c.params.n_tx = static_cast<int>(manifest.at("transmitters").size());

  for (const auto& txj : manifest.at("transmitters")) {
    const int tx = txj.at("tx_id").get<int>();
    const auto& pj = txj.at("profile");
    TransmitterProfile prof;
    prof.tx_id = tx;
    prof.iq_gain_imbalance_db = pj.at("iq_gain_imbalance_db").get<double>();
    prof.iq_phase_imbalance_rad = pj.at("iq_phase_imbalance_rad").get<double>();
    prof.dc_offset = cxd{pj.at("dc_offset_re").get<double>(),
                         pj.at("dc_offset_im").get<double>()};
    prof.cfo_normalized = pj.at("cfo_normalized").get<double>();
    prof.phase_noise_std_rad = pj.at("phase_noise_std_rad").get<double>();
    prof.nonlinearity_coeff = pj.at("nonlinearity_coeff").get<double>();
    c.profiles[tx] = prof;

    const std::int64_t count = txj.at("frame_count").get<std::int64_t>();
    const std::int64_t byte_offset = txj.at("byte_offset").get<std::int64_t>();
    bin.seekg(byte_offset);
    auto& list = c.frames[tx];
    list.resize(count);
    for (auto& f : list) {
      f.samples.resize(kFrameLen);
      f.tx_id = tx;
      f.snr_db = c.params.snr_db;
      bin.read(reinterpret_cast<char*>(f.samples.data()),
               kFrameLen * 2 * sizeof(float));
      if (!bin) throw std::runtime_error("truncated frame file: " + bin_path);
    }
  }
  return c;
}

}  // namespace oswa::sim
