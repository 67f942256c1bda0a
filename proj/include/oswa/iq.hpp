#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace oswa {

inline constexpr int kFrameLen = 256;

using cxd = std::complex<double>;
using cxf = std::complex<float>;

// Reference preamble to be distorted by a transmitter fingerprint.
// Unit average power: mean |s|^2 == 1 within 1e-6.
struct SymbolFrame {
  std::vector<cxd> samples;  // exactly kFrameLen
  double sample_rate_hz = 1.0;
};

// One received baseband frame.
struct IQFrame {
  std::vector<cxf> samples;  // exactly kFrameLen
  int tx_id = -1;
  double snr_db = 0.0;
};

}  // namespace oswa
