#pragma once

#include <span>

#include "pipescore/types.hpp"

namespace pipescore {

// Blind SNR estimate from the waveform amplitude distribution: the statistic
// log(E[|x|]) - E[log|x|] mapped through the gamma-model table with linear
// interpolation, clamped to [-20, +100] dB.
//
// Requires at least min_duration_s of audio and a not-all-zero buffer.
double wada_snr(std::span<const float> samples, int sample_rate, double min_duration_s = 0.5);

// Table access (mirrors data/wada_gamma_table.csv; one entry per dB step).
std::span<const double> wada_table_values();
constexpr int kWadaTableDbMin = -20;
constexpr int kWadaTableDbMax = 100;

}  // namespace pipescore
