#include "oswa/sim/fingerprint.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "oswa/rng.hpp"

namespace oswa::sim {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void normalize_power(std::vector<cxd>& s) {
  double p = 0.0;
  for (const auto& v : s) p += std::norm(v);
  p /= static_cast<double>(s.size());
  const double scale = 1.0 / std::sqrt(p);
  for (auto& v : s) v *= scale;
}
}  // namespace

WaveformKind waveform_kind_from_string(const std::string& s) {
  if (s == "constant-envelope-chirp") return WaveformKind::kConstantEnvelopeChirp;
  if (s == "qpsk-preamble") return WaveformKind::kQpskPreamble;
  throw std::invalid_argument("unknown waveform kind: " + s);
}

std::string to_string(WaveformKind k) {
  return k == WaveformKind::kConstantEnvelopeChirp ? "constant-envelope-chirp"
                                                   : "qpsk-preamble";
}

SymbolFrame make_reference_waveform(WaveformKind kind, int length) {
  if (length != kFrameLen)
    throw std::invalid_argument("reference waveform length must be 256");
  SymbolFrame f;
  f.samples.resize(kFrameLen);
  if (kind == WaveformKind::kConstantEnvelopeChirp) {
    // s_n = exp(j*pi*n^2/N): unit envelope, full sweep across the band
    for (int n = 0; n < kFrameLen; ++n) {
      const double phase =
          std::numbers::pi * static_cast<double>(n) * n / kFrameLen;
      f.samples[n] = cxd{std::cos(phase), std::sin(phase)};
    }
  } else {
    // 128 pseudo-random QPSK symbols at 2 samples/symbol with half-sine
    // transitions, so the envelope is not constant and AM/AM matters.
    Rng rng(0x51505348u);  // fixed: the preamble is part of the format
    std::vector<cxd> sym(kFrameLen / 2);
    for (auto& s : sym) {
      const double re = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double im = rng.uniform() < 0.5 ? -1.0 : 1.0;
      s = cxd{re, im} * std::numbers::sqrt2 / 2.0;
    }
    for (int n = 0; n < kFrameLen; ++n) {
      const int i = n / 2;
      if (n % 2 == 0) {
        f.samples[n] = sym[i];
      } else {
        const cxd next = sym[(i + 1) % sym.size()];
        f.samples[n] = (sym[i] + next) * 0.5;
      }
    }
    normalize_power(f.samples);
  }
  return f;
}

ImpairmentRanges ImpairmentRanges::scaled(double factor) const {
  ImpairmentRanges r = *this;
  for (Interval* iv :
       {&r.iq_gain_imbalance_db, &r.iq_phase_imbalance_rad, &r.dc_offset_re,
        &r.dc_offset_im, &r.cfo_normalized, &r.phase_noise_std_rad,
        &r.nonlinearity_coeff}) {
    iv->lo *= factor;
    iv->hi *= factor;
  }
  return r;
}

void ImpairmentRanges::validate() const {
  auto check = [](const Interval& iv, const char* name) {
    if (!(iv.lo <= iv.hi))
      throw std::invalid_argument(std::string("inverted interval: ") + name);
    if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi))
      throw std::invalid_argument(std::string("non-finite interval: ") + name);
  };
  check(iq_gain_imbalance_db, "iq_gain_imbalance_db");
  check(iq_phase_imbalance_rad, "iq_phase_imbalance_rad");
  check(dc_offset_re, "dc_offset_re");
  check(dc_offset_im, "dc_offset_im");
  check(cfo_normalized, "cfo_normalized");
  check(phase_noise_std_rad, "phase_noise_std_rad");
  check(nonlinearity_coeff, "nonlinearity_coeff");
  if (cfo_normalized.lo < -0.01 || cfo_normalized.hi > 0.01)
    throw std::invalid_argument("cfo_normalized range must lie in [-0.01, 0.01]");
  if (phase_noise_std_rad.lo < 0.0)
    throw std::invalid_argument("phase_noise_std_rad must be >= 0");
  if (nonlinearity_coeff.lo < 0.0)
    throw std::invalid_argument("nonlinearity_coeff must be >= 0");
}

ImpairmentRanges widely_separated_ranges() {
  ImpairmentRanges r;
  r.iq_gain_imbalance_db = {-3.0, 3.0};
  r.iq_phase_imbalance_rad = {-0.3, 0.3};
  r.dc_offset_re = {-0.15, 0.15};
  r.dc_offset_im = {-0.15, 0.15};
  r.cfo_normalized = {-0.01, 0.01};
  r.phase_noise_std_rad = {0.0, 0.02};
  r.nonlinearity_coeff = {0.0, 0.25};
  return r;
}

TransmitterProfile sample_profile(std::uint64_t rng_seed, int tx_id,
                                  const ImpairmentRanges& ranges) {
  if (tx_id < 0) throw std::invalid_argument("tx_id must be >= 0");
  ranges.validate();
  Rng rng(seed_mix({rng_seed, static_cast<std::uint64_t>(tx_id), 0x70726f66ULL}));
  TransmitterProfile p;
  p.tx_id = tx_id;
  p.iq_gain_imbalance_db =
      rng.uniform(ranges.iq_gain_imbalance_db.lo, ranges.iq_gain_imbalance_db.hi);
  p.iq_phase_imbalance_rad = rng.uniform(ranges.iq_phase_imbalance_rad.lo,
                                         ranges.iq_phase_imbalance_rad.hi);
  p.dc_offset = cxd{rng.uniform(ranges.dc_offset_re.lo, ranges.dc_offset_re.hi),
                    rng.uniform(ranges.dc_offset_im.lo, ranges.dc_offset_im.hi)};
  p.cfo_normalized =
      rng.uniform(ranges.cfo_normalized.lo, ranges.cfo_normalized.hi);
  p.phase_noise_std_rad = rng.uniform(ranges.phase_noise_std_rad.lo,
                                      ranges.phase_noise_std_rad.hi);
  p.nonlinearity_coeff =
      rng.uniform(ranges.nonlinearity_coeff.lo, ranges.nonlinearity_coeff.hi);
  return p;
}

IQFrame apply_fingerprint(const SymbolFrame& x, const TransmitterProfile& p,
                          double snr_db, std::uint64_t rng_seed,
                          const FingerprintOptions& opts) {
  if (static_cast<int>(x.samples.size()) != kFrameLen)
    throw std::invalid_argument("SymbolFrame must have 256 samples");
  if (std::isnan(snr_db)) throw std::invalid_argument("snr_db must not be NaN");

  std::vector<cxd> y(x.samples);

  // IQ imbalance: gain split between branches, phase leakage from I into Q
  const double gi = std::pow(10.0, p.iq_gain_imbalance_db / 40.0);
  const double gq = 1.0 / gi;
  const double sp = std::sin(p.iq_phase_imbalance_rad);
  const double cp = std::cos(p.iq_phase_imbalance_rad);
  for (auto& v : y) {
    const double i = gi * v.real();
    const double q = gq * (cp * v.imag() + sp * v.real());
    v = cxd{i, q};
  }

  // third-order memoryless AM/AM compression
  if (p.nonlinearity_coeff != 0.0) {
    for (auto& v : y) v *= 1.0 - p.nonlinearity_coeff * std::norm(v);
  }

  for (auto& v : y) v += p.dc_offset;

  if (p.cfo_normalized != 0.0) {
    const double w = kTwoPi * p.cfo_normalized;
    for (int n = 0; n < kFrameLen; ++n) {
      const double a = w * n;
      y[n] *= cxd{std::cos(a), std::sin(a)};
    }
  }

  Rng rng(seed_mix({rng_seed, 0x66726d65ULL}));
  if (p.phase_noise_std_rad > 0.0) {
    double acc = 0.0;
    for (auto& v : y) {
      acc += p.phase_noise_std_rad * rng.normal();
      v *= cxd{std::cos(acc), std::sin(acc)};
    }
  } else {
    // keep the stream layout stable so toggling phase noise does not shift
    // the channel-phase and noise draws of other fields
    for (int n = 0; n < kFrameLen; ++n) (void)rng.normal();
  }

  if (opts.enable_channel_phase) {
    const double theta = rng.uniform(0.0, kTwoPi);
    const cxd rot{std::cos(theta), std::sin(theta)};
    for (auto& v : y) v *= rot;
  }

  if (opts.enable_noise && std::isfinite(snr_db)) {
    double sig_power = 0.0;
    for (const auto& v : y) sig_power += std::norm(v);
    sig_power /= kFrameLen;
    const double noise_var = sig_power * std::pow(10.0, -snr_db / 10.0);
    const double amp = std::sqrt(noise_var);
    for (auto& v : y) v += amp * rng.cnormal();
  }

  IQFrame out;
  out.samples.resize(kFrameLen);
  for (int n = 0; n < kFrameLen; ++n)
    out.samples[n] = cxf{static_cast<float>(y[n].real()),
                         static_cast<float>(y[n].imag())};
  out.tx_id = p.tx_id;
  out.snr_db = snr_db;
  return out;
}

}  // namespace oswa::sim
