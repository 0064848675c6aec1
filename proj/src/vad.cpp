#include "pipescore/vad.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pipescore/errors.hpp"

namespace pipescore {

namespace {

constexpr double kVadFrameMs = 30.0;
constexpr double kVadHopMs = 10.0;
constexpr double kEnergyFloor = 1e-12;

struct Group {
  std::vector<Segment> segs;
  double extent() const { return segs.back().end_s - segs.front().start_s; }
};

double group_error(const std::vector<Group>& groups, const LengthTarget& target) {
  if (groups.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& g : groups) sum += g.extent();
  const double mean = sum / static_cast<double>(groups.size());
  double var = 0.0;
  for (const auto& g : groups) {
    const double d = g.extent() - mean;
    var += d * d;
  }
  const double sd = std::sqrt(var / static_cast<double>(groups.size()));
  return (mean - target.mean_s) * (mean - target.mean_s) +
         (sd - target.std_s) * (sd - target.std_s);
}

}  // namespace

std::vector<Segment> detect(std::span<const float> samples, int sample_rate,
                            const VadParams& params) {
  if (samples.empty()) throw ValidationError("detect requires a non-empty buffer");
  const double duration = static_cast<double>(samples.size()) / sample_rate;
  const int frame = static_cast<int>(std::lround(kVadFrameMs * sample_rate / 1000.0));
  const int hop = static_cast<int>(std::lround(kVadHopMs * sample_rate / 1000.0));
  const double hop_s = kVadHopMs / 1000.0;

  // Short buffers get a single whole-buffer frame.
  const size_t n_frames =
      samples.size() >= static_cast<size_t>(frame)
          ? 1 + (samples.size() - static_cast<size_t>(frame)) / static_cast<size_t>(hop)
          : 1;
  std::vector<double> energy_db(n_frames);
  for (size_t t = 0; t < n_frames; ++t) {
    const size_t begin = t * static_cast<size_t>(hop);
    const size_t end = std::min(begin + static_cast<size_t>(frame), samples.size());
    double acc = 0.0;
    for (size_t i = begin; i < end; ++i) {
      acc += static_cast<double>(samples[i]) * samples[i];
    }
    energy_db[t] = 10.0 * std::log10(acc / static_cast<double>(end - begin) + kEnergyFloor);
  }

  // Noise floor: 10th percentile of frame energy.
  std::vector<double> sorted = energy_db;
  std::sort(sorted.begin(), sorted.end());
  const double floor_db = sorted[static_cast<size_t>(0.10 * static_cast<double>(n_frames - 1))];
  const double gate = floor_db + params.threshold_db;

  // Speech runs -> segments; each frame owns one hop centered on its middle.
  const double half_frame_s = frame / (2.0 * sample_rate);
  std::vector<Segment> segs;
  size_t t = 0;
  while (t < n_frames) {
    if (energy_db[t] <= gate) {
      ++t;
      continue;
    }
    size_t run_end = t;
    while (run_end + 1 < n_frames && energy_db[run_end + 1] > gate) ++run_end;
    Segment s;
    s.start_s = std::max(0.0, static_cast<double>(t) * hop_s + half_frame_s - hop_s / 2.0);
    s.end_s = std::min(duration, static_cast<double>(run_end) * hop_s + half_frame_s + hop_s / 2.0);
    if (s.end_s > s.start_s) segs.push_back(s);
    t = run_end + 1;
  }

  // Drop short runs, then bridge short gaps.
  std::vector<Segment> kept;
  for (const auto& s : segs) {
    if (s.length() * 1000.0 >= params.min_speech_ms) kept.push_back(s);
  }
  std::vector<Segment> bridged;
  for (const auto& s : kept) {
    if (!bridged.empty() && (s.start_s - bridged.back().end_s) * 1000.0 < params.min_silence_ms) {
      bridged.back().end_s = s.end_s;
    } else {
      bridged.push_back(s);
    }
  }

  // Pad, clip, merge any overlap the padding created.
  const double pad_s = params.pad_ms / 1000.0;
  std::vector<Segment> out;
  for (auto s : bridged) {
    s.start_s = std::max(0.0, s.start_s - pad_s);
    s.end_s = std::min(duration, s.end_s + pad_s);
    if (!out.empty() && s.start_s <= out.back().end_s) {
      out.back().end_s = std::max(out.back().end_s, s.end_s);
    } else {
      out.push_back(s);
    }
  }
  return out;
}

SpeechRateClass classify_rate(double words_per_second, const RateBounds& bounds) {
  if (words_per_second < 0.0) throw ValidationError("words_per_second must be >= 0");
  if (words_per_second < bounds.slow_max) return SpeechRateClass::Slow;
  if (words_per_second > bounds.fast_min) return SpeechRateClass::Fast;
  return SpeechRateClass::Normal;
}

const char* rate_class_name(SpeechRateClass c) {
  switch (c) {
    case SpeechRateClass::Slow: return "slow";
    case SpeechRateClass::Fast: return "fast";
    default: return "normal";
  }
}

std::vector<Segment> concat_to_target(const std::vector<Segment>& segments,
                                      const LengthTarget& target) {
  if (!(target.mean_s > 0.0 && target.mean_s <= target.hard_max_s && target.std_s >= 0.0)) {
    throw ValidationError("length target requires 0 < mean_s <= hard_max_s and std_s >= 0");
  }
  if (segments.empty()) return {};

  // Greedy pass: extend while the gap is bridgeable, the result stays under
  // hard_max_s, and the group is still short of mean_s - std_s.
  std::vector<Group> groups;
  Group cur;
  cur.segs.push_back(segments[0]);
  for (size_t i = 1; i < segments.size(); ++i) {
    const Segment& next = segments[i];
    const double gap = next.start_s - cur.segs.back().end_s;
    const double new_extent = next.end_s - cur.segs.front().start_s;
    if (gap <= target.max_gap_s && new_extent <= target.hard_max_s &&
        cur.extent() < target.mean_s - target.std_s) {
      cur.segs.push_back(next);
    } else {
      groups.push_back(std::move(cur));
      cur = Group{};
      cur.segs.push_back(next);
    }
  }
  groups.push_back(std::move(cur));

  // One boundary-adjustment pass. A move must keep both groups non-empty,
  // respect max_gap_s at the seam, and stay under hard_max_s.
  for (size_t i = 0; i + 1 < groups.size(); ++i) {
    double best_err = group_error(groups, target);
    // candidate: last segment of i moves to front of i+1
    if (groups[i].segs.size() > 1) {
      const Segment moved = groups[i].segs.back();
      const double gap = groups[i + 1].segs.front().start_s - moved.end_s;
      const double new_extent = groups[i + 1].segs.back().end_s - moved.start_s;
      if (gap <= target.max_gap_s && new_extent <= target.hard_max_s) {
        groups[i].segs.pop_back();
        groups[i + 1].segs.insert(groups[i + 1].segs.begin(), moved);
        const double err = group_error(groups, target);
        if (err < best_err) {
          best_err = err;
        } else {
          groups[i + 1].segs.erase(groups[i + 1].segs.begin());
          groups[i].segs.push_back(moved);
        }
      }
    }
    // candidate: first segment of i+1 moves to end of i
    if (groups[i + 1].segs.size() > 1) {
      const Segment moved = groups[i + 1].segs.front();
      const double gap = moved.start_s - groups[i].segs.back().end_s;
      const double new_extent = moved.end_s - groups[i].segs.front().start_s;
      if (gap <= target.max_gap_s && new_extent <= target.hard_max_s) {
        groups[i + 1].segs.erase(groups[i + 1].segs.begin());
        groups[i].segs.push_back(moved);
        const double err = group_error(groups, target);
        if (err < best_err) {
          best_err = err;
        } else {
          groups[i].segs.pop_back();
          groups[i + 1].segs.insert(groups[i + 1].segs.begin(), moved);
        }
      }
    }
  }

  std::vector<Segment> out;
  for (const auto& g : groups) {
    Segment s{g.segs.front().start_s, g.segs.back().end_s};
    if (s.length() >= target.min_utt_s) out.push_back(s);
  }
  return out;
}

void save_vad_profile(const VadProfile& profile, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write VAD profile: " + path);
  out << "# energy VAD parameters per speech-rate class\n";
  for (const auto& [cls, p] : profile) {
    const char* name = rate_class_name(cls);
    out << name << ".threshold_db = " << p.threshold_db << "\n";
    out << name << ".min_speech_ms = " << p.min_speech_ms << "\n";
    out << name << ".min_silence_ms = " << p.min_silence_ms << "\n";
    out << name << ".pad_ms = " << p.pad_ms << "\n";
  }
}

VadProfile load_vad_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open VAD profile: " + path);
  VadProfile profile;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    const auto dot = line.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
      throw ValidationError("VAD profile line " + std::to_string(line_no) +
                            ": expected class.field = value");
    }
    std::string cls_name = line.substr(0, dot);
    std::string field = line.substr(dot + 1, eq - dot - 1);
    cls_name.erase(std::remove_if(cls_name.begin(), cls_name.end(), ::isspace), cls_name.end());
    field.erase(std::remove_if(field.begin(), field.end(), ::isspace), field.end());
    double value = 0.0;
    try {
      value = std::stod(line.substr(eq + 1));
    } catch (const std::exception&) {
      throw ValidationError("VAD profile line " + std::to_string(line_no) + ": bad value");
    }
    SpeechRateClass cls;
    if (cls_name == "slow") {
      cls = SpeechRateClass::Slow;
    } else if (cls_name == "normal") {
      cls = SpeechRateClass::Normal;
    } else if (cls_name == "fast") {
      cls = SpeechRateClass::Fast;
    } else {
      throw ValidationError("VAD profile line " + std::to_string(line_no) + ": unknown class '" +
                            cls_name + "'");
    }
    VadParams& p = profile[cls];
    if (field == "threshold_db") {
      p.threshold_db = value;
    } else if (field == "min_speech_ms") {
      p.min_speech_ms = value;
    } else if (field == "min_silence_ms") {
      p.min_silence_ms = value;
    } else if (field == "pad_ms") {
      p.pad_ms = value;
    } else {
      throw ValidationError("VAD profile line " + std::to_string(line_no) + ": unknown field '" +
                            field + "'");
    }
  }
  return profile;
}

}  // namespace pipescore
