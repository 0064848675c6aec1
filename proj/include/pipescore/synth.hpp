#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "pipescore/sidecar.hpp"
#include "pipescore/types.hpp"

namespace pipescore {

// C50 and SI-SDR are capped here instead of going to +inf so aggregates stay
// finite (single-impulse RIRs, perfect estimates).
inline constexpr double kDbCap = 100.0;

struct DegradationSpec {
  double target_snr_db = 10.0;
  double t60_s = 0.0;  // 0 = no reverberation
  double f0_hz = 220.0;
  double vibrato_hz = 0.0;
  double vibrato_depth_hz = 0.0;
  uint64_t seed = 0;
  double duration_s = 3.0;
};

// --- generators -----------------------------------------------------------

Samples white_noise(size_t n, uint64_t seed);

// White noise through the same formant stack as the speech generator, so
// per-band SNR tracks the global SNR the way it does for real-world noise.
Samples speech_shaped_noise(size_t n, int sample_rate, uint64_t seed);

// Harmonic-rich pulse train through formant-style resonators with pitch
// jitter, per-pulse gamma amplitudes and slow amplitude modulation. Amplitude
// statistics approximate the gamma model the SNR table assumes; a pure sine
// does not.
Samples speech_like(double duration_s, int sample_rate, uint64_t seed, double f0_hz = 120.0);

// Same generator, keeping each glottal pulse's instantaneous frequency so
// callers know the true F0 dispersion. Optional vibrato modulates the pitch
// target before jitter applies.
struct SpeechTrack {
  Samples audio;
  std::vector<double> pulse_freqs;
};
SpeechTrack speech_like_tracked(double duration_s, int sample_rate, uint64_t seed,
                                double f0_hz = 120.0, double vibrato_hz = 0.0,
                                double vibrato_depth_hz = 0.0);

// Sine with sinusoidal frequency modulation. The instantaneous frequency at
// time t is f0 + depth * sin(2 pi rate t).
Samples vibrato_tone(double duration_s, int sample_rate, double f0_hz, double vibrato_hz,
                     double vibrato_depth_hz);

// --- reference implementations (oracles) ----------------------------------

// Scales noise so clean/noise mean-square power hits the target exactly.
// Returns the mixture and the scale applied to the noise.
std::pair<Samples, double> mix_at_snr(const Samples& clean, const Samples& noise,
                                      double target_snr_db);

// Unit direct-path impulse plus white noise under the amplitude envelope
// exp(-6.9078 t / t60): energy is 60 dB down at t60.
Samples exp_rir(double t60_s, double duration_s, int sample_rate, uint64_t seed);

// Twice the -5 dB to -35 dB fall time of the backward-integrated energy
// curve, from a least-squares line over that range.
double schroeder_t30(std::span<const float> rir, int sample_rate);

// 10 log10 of early (first 50 ms) to late energy, capped at kDbCap.
double c50(std::span<const float> rir, int sample_rate);

// Scale-invariant SDR with optimal scaling of the reference; capped at kDbCap.
double true_si_sdr(std::span<const float> reference, std::span<const float> estimate);

// --- proxies (monotone in true SNR, so sweeps order correctly) -------------

double mos_proxy(double snr_db);         // clamp(1 + 4 (snr+5)/35, 1, 5)
double mos_proxy_dnsmos(double snr_db);  // compressed variant, smaller spread
double pesq_proxy(double snr_db);        // clamp(1 + 3.5 (snr+5)/35, 1, 4.5)

// --- corpus assembly --------------------------------------------------------

struct SynthUtterance {
  std::string id;
  Samples audio;
  DegradationSpec spec;
  std::map<MetricKind, double> truth;
};

struct SynthCorpus {
  CorpusSnapshot snapshot;  // source_path left empty unless written to disk
  std::vector<SynthUtterance> utterances;
  std::map<MetricKind, SidecarTable> sidecars;
};

// One utterance per spec with ground-truth sidecars: true SNR and SI-SDR,
// Schroeder T30/C50 of the reverb tail, generator F0 dispersion, and the MOS
// and PESQ proxies. Runs the whole scoring path with no external model.
SynthCorpus make_corpus(const std::vector<DegradationSpec>& specs, int sample_rate);

}  // namespace pipescore
