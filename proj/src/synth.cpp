#include "pipescore/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "pipescore/errors.hpp"
#include "pipescore/fft.hpp"
#include "pipescore/sum.hpp"

namespace pipescore {

namespace {

// 3 ln 10: amplitude decay rate giving 60 dB of energy decay at t60.
constexpr double kDecay60 = 6.907755278982137;

double mean_square(std::span<const float> x) {
  return pairwise_sum(x.size(), [&](size_t i) {
           return static_cast<double>(x[i]) * static_cast<double>(x[i]);
         }) /
         static_cast<double>(x.size());
}

// Two-pole resonator, unit-gain numerator.
void resonate(const Samples& x, Samples& acc, double weight, double freq_hz, double bw_hz,
              int sample_rate) {
  const double r = std::exp(-M_PI * bw_hz / sample_rate);
  const double a1 = 2.0 * r * std::cos(2.0 * M_PI * freq_hz / sample_rate);
  const double a2 = -r * r;
  double y1 = 0.0, y2 = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    const double y = static_cast<double>(x[i]) + a1 * y1 + a2 * y2;
    y2 = y1;
    y1 = y;
    acc[i] += static_cast<float>(weight * y);
  }
}

}  // namespace

Samples white_noise(size_t n, uint64_t seed) {
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Samples out(n);
  for (auto& v : out) v = static_cast<float>(gauss(engine));
  return out;
}

Samples speech_shaped_noise(size_t n, int sample_rate, uint64_t seed) {
  const Samples white = white_noise(n, seed);
  Samples out(n, 0.0f);
  resonate(white, out, 1.0, 500.0, 80.0, sample_rate);
  resonate(white, out, 0.7, 1500.0, 120.0, sample_rate);
  resonate(white, out, 0.3, 2500.0, 160.0, sample_rate);
  return out;
}

SpeechTrack speech_like_tracked(double duration_s, int sample_rate, uint64_t seed, double f0_hz,
                                double vibrato_hz, double vibrato_depth_hz) {
  if (duration_s <= 0.0 || sample_rate <= 0) {
    throw ValidationError("speech_like requires positive duration and rate");
  }
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::gamma_distribution<double> pulse_amp(0.7, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  Samples pulses(n, 0.0f);
  SpeechTrack track;

  // Glottal-ish pulse train: per-pulse gamma amplitude, 8% period jitter.
  double t = 0.0;
  while (t < duration_s) {
    const size_t i = static_cast<size_t>(t * sample_rate);
    const double target =
        f0_hz + vibrato_depth_hz * std::sin(2.0 * M_PI * vibrato_hz * t);
    const double inst = target * (1.0 + 0.08 * gauss(engine));
    if (i < n) {
      pulses[i] = static_cast<float>(pulse_amp(engine) * (coin(engine) < 0.5 ? 1.0 : -1.0));
      track.pulse_freqs.push_back(inst);
    }
    t += 1.0 / std::max(20.0, std::fabs(inst));
  }

  Samples voiced(n, 0.0f);
  resonate(pulses, voiced, 1.0, 500.0, 80.0, sample_rate);
  resonate(pulses, voiced, 0.7, 1500.0, 120.0, sample_rate);
  resonate(pulses, voiced, 0.3, 2500.0, 160.0, sample_rate);

  // Slow amplitude modulation (depth 0.9 at 3 Hz), never reaching zero.
  float peak = 0.0f;
  for (size_t i = 0; i < n; ++i) {
    const double tt = static_cast<double>(i) / sample_rate;
    const double env = 0.1 + 0.45 * (1.0 + std::sin(2.0 * M_PI * 3.0 * tt));
    voiced[i] = static_cast<float>(voiced[i] * env);
    peak = std::max(peak, std::fabs(voiced[i]));
  }
  if (peak > 0.0f) {
    for (auto& v : voiced) v /= peak;
  }
  track.audio = std::move(voiced);
  return track;
}

Samples speech_like(double duration_s, int sample_rate, uint64_t seed, double f0_hz) {
  return speech_like_tracked(duration_s, sample_rate, seed, f0_hz).audio;
}

Samples vibrato_tone(double duration_s, int sample_rate, double f0_hz, double vibrato_hz,
                     double vibrato_depth_hz) {
  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  Samples out(n);
  double phase = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    const double inst = f0_hz + vibrato_depth_hz * std::sin(2.0 * M_PI * vibrato_hz * t);
    out[i] = static_cast<float>(0.8 * std::sin(phase));
    phase += 2.0 * M_PI * inst / sample_rate;
  }
  return out;
}

std::pair<Samples, double> mix_at_snr(const Samples& clean, const Samples& noise,
                                      double target_snr_db) {
  if (clean.empty() || noise.empty()) throw DataError("mix_at_snr: empty input");

  // Loop or truncate the noise to the clean length.
  Samples shaped(clean.size());
  for (size_t i = 0; i < clean.size(); ++i) shaped[i] = noise[i % noise.size()];

  const double p_clean = mean_square(clean);
  const double p_noise = mean_square(shaped);
  if (p_clean <= 0.0 || p_noise <= 0.0) throw DataError("mix_at_snr: zero-power input");

  const double scale = std::sqrt(p_clean / (p_noise * std::pow(10.0, target_snr_db / 10.0)));
  Samples mix(clean.size());
  for (size_t i = 0; i < clean.size(); ++i) {
    mix[i] = static_cast<float>(clean[i] + scale * shaped[i]);
  }
  return {std::move(mix), scale};
}

Samples exp_rir(double t60_s, double duration_s, int sample_rate, uint64_t seed) {
  if (!(t60_s > 0.0)) throw ValidationError("exp_rir requires t60 > 0");
  const size_t n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  if (n < 2) throw ValidationError("exp_rir duration too short");
  Samples rir = white_noise(n, seed);
  for (size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    rir[i] = static_cast<float>(rir[i] * std::exp(-kDecay60 * t / t60_s));
  }
  rir[0] = 1.0f;  // unit direct path
  return rir;
}

double schroeder_t30(std::span<const float> rir, int sample_rate) {
  if (rir.empty()) throw DataError("schroeder_t30: empty impulse response");
  const size_t n = rir.size();
  // Backward-integrated energy, normalized to 0 dB at the start.
  std::vector<double> tail(n);
  double acc = 0.0;
  for (size_t i = n; i-- > 0;) {
    acc += static_cast<double>(rir[i]) * rir[i];
    tail[i] = acc;
  }
  if (acc <= 0.0) throw DataError("schroeder_t30: zero-energy impulse response");

  // Least-squares line over the -5 dB .. -35 dB span of the decay curve.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  size_t count = 0;
  bool reached = false;
  for (size_t i = 0; i < n; ++i) {
    const double db = 10.0 * std::log10(tail[i] / acc);
    if (db > -5.0) continue;
    if (db < -35.0) {
      reached = true;
      break;
    }
    const double x = static_cast<double>(i) / sample_rate;
    sx += x;
    sy += db;
    sxx += x * x;
    sxy += x * db;
    ++count;
  }
  if (!reached || count < 2) {
    throw DataError("schroeder_t30: decay curve never spans -5 dB to -35 dB");
  }
  const double denom = static_cast<double>(count) * sxx - sx * sx;
  const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
  if (!(slope < 0.0)) throw DataError("schroeder_t30: non-decaying energy curve");
  return 2.0 * (-30.0 / slope);
}

double c50(std::span<const float> rir, int sample_rate) {
  const size_t boundary = static_cast<size_t>(std::llround(0.050 * sample_rate));
  if (rir.size() < static_cast<size_t>(std::llround(0.060 * sample_rate))) {
    throw DataError("c50: impulse response shorter than 60 ms");
  }
  double early = 0.0, late = 0.0;
  for (size_t i = 0; i < rir.size(); ++i) {
    const double e = static_cast<double>(rir[i]) * rir[i];
    (i <= boundary ? early : late) += e;
  }
  if (early <= 0.0 && late <= 0.0) throw DataError("c50: zero-energy impulse response");
  if (late <= 0.0) return kDbCap;
  return std::min(kDbCap, 10.0 * std::log10(early / late));
}

double true_si_sdr(std::span<const float> reference, std::span<const float> estimate) {
  if (reference.size() != estimate.size()) {
    throw ValidationError("true_si_sdr: length mismatch");
  }
  const size_t n = reference.size();
  const double rr = pairwise_sum(n, [&](size_t i) {
    return static_cast<double>(reference[i]) * reference[i];
  });
  if (rr <= 0.0) throw DataError("true_si_sdr: zero reference");
  const double re = pairwise_sum(n, [&](size_t i) {
    return static_cast<double>(reference[i]) * estimate[i];
  });
  const double alpha = re / rr;
  const double target_pow = alpha * alpha * rr;
  const double err_pow = pairwise_sum(n, [&](size_t i) {
    const double d = alpha * reference[i] - estimate[i];
    return d * d;
  });
  if (err_pow <= 0.0 || target_pow / err_pow > std::pow(10.0, kDbCap / 10.0)) return kDbCap;
  return 10.0 * std::log10(target_pow / err_pow);
}

double mos_proxy(double snr_db) {
  return std::clamp(1.0 + 4.0 * (snr_db + 5.0) / 35.0, 1.0, 5.0);
}

double mos_proxy_dnsmos(double snr_db) {
  // Half the slope: packs the same corpus into a narrower band, the way
  // DNSMOS distributions sit tighter than NISQA ones.
  return std::clamp(1.0 + 4.0 * (snr_db + 10.0) / 70.0, 1.0, 5.0);
}

double pesq_proxy(double snr_db) {
  return std::clamp(1.0 + 3.5 * (snr_db + 5.0) / 35.0, 1.0, 4.5);
}

SynthCorpus make_corpus(const std::vector<DegradationSpec>& specs, int sample_rate) {
  if (specs.empty()) throw ValidationError("make_corpus: empty spec grid");
  SynthCorpus corpus;
  corpus.snapshot.name = "synthetic";
  for (MetricKind kind :
       {MetricKind::Snr, MetricKind::SiSdr, MetricKind::T30, MetricKind::C50, MetricKind::F0Std,
        MetricKind::Pesq, MetricKind::MosNisqa, MetricKind::MosDnsmos}) {
    corpus.sidecars[kind].metric = kind;
  }

  for (size_t idx = 0; idx < specs.size(); ++idx) {
    const DegradationSpec& spec = specs[idx];
    SynthUtterance su;
    su.spec = spec;
    char id[32];
    std::snprintf(id, sizeof(id), "synth_%03zu", idx);
    su.id = id;

    SpeechTrack clean = speech_like_tracked(spec.duration_s, sample_rate, spec.seed, spec.f0_hz,
                                            spec.vibrato_hz, spec.vibrato_depth_hz);
    Samples wet = clean.audio;
    if (spec.t60_s > 0.0) {
      const double rir_dur = std::max(0.5, 1.5 * spec.t60_s);
      Samples rir = exp_rir(spec.t60_s, rir_dur, sample_rate, spec.seed ^ 0x7217u);
      Samples conv = fft_convolve(wet, rir);
      conv.resize(wet.size());
      // Keep the wet signal at the dry level so SNR calibration is stable.
      const double g = std::sqrt(mean_square(clean.audio) / std::max(1e-30, mean_square(conv)));
      for (auto& v : conv) v = static_cast<float>(v * g);
      wet = std::move(conv);
      su.truth[MetricKind::T30] = schroeder_t30(rir, sample_rate);
      su.truth[MetricKind::C50] = c50(rir, sample_rate);
    } else {
      // Dry source: documented floor/cap stand-ins, not measured values.
      su.truth[MetricKind::T30] = 0.01;
      su.truth[MetricKind::C50] = kDbCap;
    }

    Samples noise = white_noise(wet.size(), spec.seed ^ 0xA0153u);
    auto [mix, scale] = mix_at_snr(wet, noise, spec.target_snr_db);
    (void)scale;
    float peak = 0.0f;
    for (float v : mix) peak = std::max(peak, std::fabs(v));
    if (peak > 0.99f) {
      for (auto& v : mix) v = v / peak * 0.99f;
    }

    su.truth[MetricKind::Snr] = spec.target_snr_db;
    su.truth[MetricKind::SiSdr] = true_si_sdr(wet, mix);
    if (clean.pulse_freqs.size() >= 2) {
      const size_t m = clean.pulse_freqs.size();
      const double mean =
          pairwise_sum(m, [&](size_t i) { return clean.pulse_freqs[i]; }) / static_cast<double>(m);
      const double var = pairwise_sum(m,
                                      [&](size_t i) {
                                        const double d = clean.pulse_freqs[i] - mean;
                                        return d * d;
                                      }) /
                         static_cast<double>(m);
      su.truth[MetricKind::F0Std] = std::sqrt(var);
    }
    su.truth[MetricKind::Pesq] = pesq_proxy(spec.target_snr_db);
    su.truth[MetricKind::MosNisqa] = mos_proxy(spec.target_snr_db);
    su.truth[MetricKind::MosDnsmos] = mos_proxy_dnsmos(spec.target_snr_db);
    su.audio = std::move(mix);

    Utterance u;
    u.id = su.id;
    u.source_id = su.id;
    u.start_s = 0.0;
    u.end_s = static_cast<double>(su.audio.size()) / sample_rate;
    u.duration_s = u.end_s;
    u.sample_rate = sample_rate;
    u.channel_count = 1;
    corpus.snapshot.utterances.push_back(std::move(u));

    for (auto& [kind, table] : corpus.sidecars) {
      auto it = su.truth.find(kind);
      if (it != su.truth.end()) table.rows[su.id] = it->second;
    }
    corpus.utterances.push_back(std::move(su));
  }
  return corpus;
}

}  // namespace pipescore
