#include "pipescore/mfcc.hpp"

#include <cmath>

#include "pipescore/errors.hpp"
#include "pipescore/fft.hpp"

namespace pipescore {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

namespace {

// Triangular filters on mel-spaced centers; rows index filters, cols FFT bins.
std::vector<std::vector<double>> mel_filterbank(int n_filters, size_t n_bins, size_t fft_len,
                                                int sample_rate) {
  const double mel_lo = hz_to_mel(kMelLowHz);
  const double mel_hi = hz_to_mel(sample_rate / 2.0);
  std::vector<double> edges(static_cast<size_t>(n_filters) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / (n_filters + 1);
    edges[i] = mel_to_hz(mel);
  }
  std::vector<std::vector<double>> bank(static_cast<size_t>(n_filters),
                                        std::vector<double>(n_bins, 0.0));
  for (int f = 0; f < n_filters; ++f) {
    const double lo = edges[static_cast<size_t>(f)];
    const double mid = edges[static_cast<size_t>(f) + 1];
    const double hi = edges[static_cast<size_t>(f) + 2];
    for (size_t b = 0; b < n_bins; ++b) {
      const double hz = static_cast<double>(b) * sample_rate / static_cast<double>(fft_len);
      double w = 0.0;
      if (hz >= lo && hz <= mid && mid > lo) {
        w = (hz - lo) / (mid - lo);
      } else if (hz > mid && hz <= hi && hi > mid) {
        w = (hi - hz) / (hi - mid);
      }
      bank[static_cast<size_t>(f)][b] = w;
    }
  }
  return bank;
}

}  // namespace

CepstraSequence mfcc(std::span<const float> samples, int sample_rate, const FramePlan& plan) {
  plan.validate();
  const int frame = plan.frame_len(sample_rate);
  const int hop = plan.hop_len(sample_rate);
  if (samples.size() < static_cast<size_t>(frame)) {
    throw DataError("buffer shorter than one frame");
  }
  const size_t fft_len = next_pow2(static_cast<size_t>(frame));
  const size_t n_bins = fft_len / 2 + 1;
  const auto window = make_window(plan.window, frame);
  const auto bank = mel_filterbank(kMelFilters, n_bins, fft_len, sample_rate);

  CepstraSequence seq;
  seq.plan = plan;
  seq.sample_rate = sample_rate;
  const size_t n_frames = frame_count(samples.size(), frame, hop);
  seq.coeffs.resize(n_frames);

  // Orthonormal DCT-II basis, rows 1..13.
  std::vector<std::array<double, kCepstralCoeffs>> dct(static_cast<size_t>(kMelFilters));
  for (int m = 0; m < kMelFilters; ++m) {
    for (int k = 1; k <= kCepstralCoeffs; ++k) {
      dct[static_cast<size_t>(m)][static_cast<size_t>(k - 1)] =
          std::sqrt(2.0 / kMelFilters) * std::cos(M_PI * k * (m + 0.5) / kMelFilters);
    }
  }

  std::vector<double> buf(static_cast<size_t>(frame));
  std::vector<double> log_e(static_cast<size_t>(kMelFilters));
  for (size_t t = 0; t < n_frames; ++t) {
    const float* x = samples.data() + t * static_cast<size_t>(hop);
    for (int i = 0; i < frame; ++i) {
      buf[static_cast<size_t>(i)] = x[i] * window[static_cast<size_t>(i)];
    }
    const auto mag = magnitude_spectrum(buf, fft_len);
    for (int f = 0; f < kMelFilters; ++f) {
      double e = 0.0;
      for (size_t b = 0; b < n_bins; ++b) {
        e += bank[static_cast<size_t>(f)][b] * mag[b] * mag[b];
      }
      log_e[static_cast<size_t>(f)] = std::log(std::max(e, kLogEnergyFloor));
    }
    auto& out = seq.coeffs[t];
    out.fill(0.0);
    for (int m = 0; m < kMelFilters; ++m) {
      for (int k = 0; k < kCepstralCoeffs; ++k) {
        out[static_cast<size_t>(k)] +=
            dct[static_cast<size_t>(m)][static_cast<size_t>(k)] * log_e[static_cast<size_t>(m)];
      }
    }
  }
  return seq;
}

}  // namespace pipescore
