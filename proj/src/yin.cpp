#include "pipescore/yin.hpp"

#include <algorithm>
#include <cmath>

#include "pipescore/errors.hpp"
#include "pipescore/sum.hpp"

namespace pipescore {

size_t F0Track::voiced_count() const {
  return static_cast<size_t>(std::count(voiced.begin(), voiced.end(), true));
}

F0Track yin_f0(std::span<const float> samples, int sample_rate, const YinParams& params) {
  params.plan.validate();
  if (!(params.fmin_hz > 0.0 && params.fmin_hz < params.fmax_hz)) {
    throw ValidationError("yin requires 0 < fmin < fmax");
  }
  const int frame = params.plan.frame_len(sample_rate);
  const int hop = params.plan.hop_len(sample_rate);
  const int tau_max = static_cast<int>(std::floor(sample_rate / params.fmin_hz));
  const int tau_min = std::max(2, static_cast<int>(std::ceil(sample_rate / params.fmax_hz)));
  if (frame < 2 * tau_max) {
    throw ValidationError("yin frame must cover two periods of fmin");
  }
  const int win = frame - tau_max;  // integration window

  F0Track track;
  track.fmin_hz = params.fmin_hz;
  track.fmax_hz = params.fmax_hz;
  const size_t n_frames = frame_count(samples.size(), frame, hop);
  track.f0_hz.assign(n_frames, 0.0);
  track.voiced.assign(n_frames, false);

  std::vector<double> diff(static_cast<size_t>(tau_max) + 1);
  std::vector<double> cmnd(static_cast<size_t>(tau_max) + 1);

  for (size_t t = 0; t < n_frames; ++t) {
    const float* x = samples.data() + t * static_cast<size_t>(hop);

    diff[0] = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      double acc = 0.0;
      for (int j = 0; j < win; ++j) {
        const double d = static_cast<double>(x[j]) - static_cast<double>(x[j + tau]);
        acc += d * d;
      }
      diff[static_cast<size_t>(tau)] = acc;
    }

    // Cumulative mean normalization; a near-zero running sum means silence.
    cmnd[0] = 1.0;
    double running = 0.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += diff[static_cast<size_t>(tau)];
      cmnd[static_cast<size_t>(tau)] =
          running > 1e-12 ? diff[static_cast<size_t>(tau)] * tau / running : 1.0;
    }

    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmnd[static_cast<size_t>(tau)] < params.threshold) {
        while (tau + 1 <= tau_max &&
               cmnd[static_cast<size_t>(tau) + 1] < cmnd[static_cast<size_t>(tau)]) {
          ++tau;
        }
        best = tau;
        break;
      }
    }
    if (best < 0) continue;

    // Parabolic interpolation of the dip position.
    double lag = best;
    if (best > tau_min && best < tau_max) {
      const double a = cmnd[static_cast<size_t>(best) - 1];
      const double b = cmnd[static_cast<size_t>(best)];
      const double c = cmnd[static_cast<size_t>(best) + 1];
      const double denom = a - 2.0 * b + c;
      if (std::fabs(denom) > 1e-12) lag += 0.5 * (a - c) / denom;
    }
    const double f0 = std::clamp(sample_rate / lag, params.fmin_hz, params.fmax_hz);
    track.f0_hz[t] = f0;
    track.voiced[t] = true;
  }
  return track;
}

double f0_std(const F0Track& track) {
  std::vector<double> voiced;
  voiced.reserve(track.f0_hz.size());
  for (size_t i = 0; i < track.f0_hz.size(); ++i) {
    if (track.voiced[i]) voiced.push_back(track.f0_hz[i]);
  }
  if (voiced.size() < 2) {
    throw DataError("f0_std needs at least 2 voiced frames (" + std::to_string(voiced.size()) +
                    " present)");
  }
  const double n = static_cast<double>(voiced.size());
  const double mean = pairwise_sum(voiced.size(), [&](size_t i) { return voiced[i]; }) / n;
  const double var = pairwise_sum(voiced.size(),
                                  [&](size_t i) {
                                    const double d = voiced[i] - mean;
                                    return d * d;
                                  }) /
                     n;
  return std::sqrt(var);
}

}  // namespace pipescore
