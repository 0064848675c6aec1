#include "pipescore/frame.hpp"

#include <cmath>

#include "pipescore/errors.hpp"

namespace pipescore {

int FramePlan::frame_len(int sample_rate) const {
  return static_cast<int>(std::lround(frame_ms * sample_rate / 1000.0));
}

int FramePlan::hop_len(int sample_rate) const {
  return static_cast<int>(std::lround(hop_ms * sample_rate / 1000.0));
}

void FramePlan::validate() const {
  if (!(hop_ms > 0.0 && hop_ms <= frame_ms)) {
    throw ValidationError("frame plan requires 0 < hop_ms <= frame_ms");
  }
}

size_t frame_count(size_t n, int frame_len, int hop) {
  if (frame_len <= 0 || hop <= 0 || n < static_cast<size_t>(frame_len)) return 0;
  return 1 + (n - static_cast<size_t>(frame_len)) / static_cast<size_t>(hop);
}

std::vector<double> make_window(WindowKind kind, int n) {
  std::vector<double> w(static_cast<size_t>(n), 1.0);
  if (kind == WindowKind::Hann) {
    for (int i = 0; i < n; ++i) {
      w[static_cast<size_t>(i)] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (n - 1));
    }
  }
  return w;
}

}  // namespace pipescore
