#pragma once

#include <array>
#include <span>

#include "pipescore/frame.hpp"
#include "pipescore/types.hpp"

namespace pipescore {

inline constexpr int kCepstralCoeffs = 13;  // c1..c13, c0 excluded
inline constexpr int kMelFilters = 26;
inline constexpr double kMelLowHz = 50.0;
inline constexpr double kLogEnergyFloor = 1e-10;

struct CepstraSequence {
  std::vector<std::array<double, kCepstralCoeffs>> coeffs;
  FramePlan plan;
  int sample_rate = 0;

  size_t frame_count() const { return coeffs.size(); }
};

// Per frame: Hann-windowed magnitude spectrum, 26-filter mel bank from 50 Hz
// to Nyquist, floored log energies, orthonormal DCT-II, coefficients 1..13.
CepstraSequence mfcc(std::span<const float> samples, int sample_rate, const FramePlan& plan = {});

double hz_to_mel(double hz);
double mel_to_hz(double mel);

}  // namespace pipescore
