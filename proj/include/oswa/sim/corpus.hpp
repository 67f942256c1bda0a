#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "oswa/sim/fingerprint.hpp"

namespace oswa::sim {

struct CorpusParams {
  int n_tx = 71;
  int frames_per_tx_min = 200;
  int frames_per_tx_max = 1500;
  double snr_db = 20.0;
  std::uint64_t seed = 1;
  ImpairmentRanges ranges;
  WaveformKind waveform = WaveformKind::kQpskPreamble;
};

struct Corpus {
  std::map<int, TransmitterProfile> profiles;
  std::map<int, std::vector<IQFrame>> frames;
  CorpusParams params;

  std::vector<int> tx_ids() const;
  std::int64_t total_frames() const;
};

// Builds the synthetic capture: per transmitter, a uniformly drawn frame
// count in [min, max], every frame fingerprinted by that transmitter's
// profile. Reproducible from params.seed.
Corpus generate_corpus(const CorpusParams& params);

// Binary frame file + JSON manifest (the dataset file pair).
// Frames are little-endian float32, interleaved I/Q, 256 complex per frame.
void write_corpus(const Corpus& corpus, const std::string& bin_path,
                  const std::string& manifest_path);
Corpus read_corpus(const std::string& bin_path, const std::string& manifest_path);

}  // namespace oswa::sim
