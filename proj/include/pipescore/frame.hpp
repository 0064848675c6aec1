#pragma once

#include <cstddef>
#include <vector>

namespace pipescore {

enum class WindowKind { Hann, Rect };

struct FramePlan {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  WindowKind window = WindowKind::Hann;

  int frame_len(int sample_rate) const;
  int hop_len(int sample_rate) const;
  void validate() const;  // 0 < hop_ms <= frame_ms

  bool operator==(const FramePlan&) const = default;
};

// 1 + floor((n - frame_len) / hop) for n >= frame_len, else 0.
size_t frame_count(size_t n, int frame_len, int hop);

std::vector<double> make_window(WindowKind kind, int n);

}  // namespace pipescore
