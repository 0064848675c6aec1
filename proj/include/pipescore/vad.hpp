#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "pipescore/types.hpp"

namespace pipescore {

struct VadParams {
  double threshold_db = 6.0;     // offset above the noise floor, search range [0, 30]
  double min_speech_ms = 100.0;  // [30, 500]
  double min_silence_ms = 150.0;  // [30, 1000]
  double pad_ms = 30.0;          // [0, 300]
};

struct Segment {
  double start_s = 0.0;
  double end_s = 0.0;
  double length() const { return end_s - start_s; }
};

// Energy VAD: 30 ms / 10 ms frame log-energies, noise floor at the 10th
// percentile, frames above floor + threshold_db are speech. Short runs are
// dropped, short gaps bridged, segments padded and clipped to the buffer.
// Output is disjoint and ordered.
std::vector<Segment> detect(std::span<const float> samples, int sample_rate,
                            const VadParams& params);

enum class SpeechRateClass { Slow, Normal, Fast };

struct RateBounds {
  double slow_max = 2.5;  // words/s; below is Slow
  double fast_min = 4.0;  // above is Fast
};

SpeechRateClass classify_rate(double words_per_second, const RateBounds& bounds);
const char* rate_class_name(SpeechRateClass c);

struct LengthTarget {
  double mean_s = 8.0;
  double std_s = 2.0;
  double max_gap_s = 0.5;   // longest silence bridged inside one utterance
  double hard_max_s = 15.0;
  double min_utt_s = 1.0;   // groups shorter than this are discarded
};

// Greedy left-to-right grouping toward mean_s, then one boundary-adjustment
// pass that moves a segment between adjacent groups when it strictly lowers
// (mean - mean_s)^2 + (std - std_s)^2. Never splits a detected segment and
// never exceeds hard_max_s. Ties keep the earlier grouping.
std::vector<Segment> concat_to_target(const std::vector<Segment>& segments,
                                      const LengthTarget& target);

// Plain key-value parameter file, one `class.field = value` line each.
using VadProfile = std::map<SpeechRateClass, VadParams>;
void save_vad_profile(const VadProfile& profile, const std::string& path);
VadProfile load_vad_profile(const std::string& path);

}  // namespace pipescore
