#pragma once

#include <span>

#include "pipescore/frame.hpp"
#include "pipescore/types.hpp"

namespace pipescore {

struct F0Track {
  std::vector<double> f0_hz;  // valid only where voiced[i] is true
  std::vector<bool> voiced;
  double fmin_hz = 0.0;
  double fmax_hz = 0.0;

  size_t voiced_count() const;
};

struct YinParams {
  // Frame widened to 40 ms so two periods of the 50 Hz floor fit.
  FramePlan plan{40.0, 10.0, WindowKind::Rect};
  double fmin_hz = 50.0;
  double fmax_hz = 600.0;
  double threshold = 0.10;
};

// Per-frame F0 by the cumulative-mean-normalized difference method: first dip
// below threshold, local-minimum descent, parabolic lag interpolation. Frames
// with no dip below threshold are unvoiced.
F0Track yin_f0(std::span<const float> samples, int sample_rate, const YinParams& params = {});

// Population standard deviation over voiced frames. Needs >= 2 voiced frames.
double f0_std(const F0Track& track);

}  // namespace pipescore
