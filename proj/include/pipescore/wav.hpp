#pragma once

#include <string>

#include "pipescore/types.hpp"

namespace pipescore {

struct AudioData {
  std::vector<float> interleaved;
  int sample_rate = 0;
  int channel_count = 0;
  size_t frame_count() const {
    return channel_count > 0 ? interleaved.size() / channel_count : 0;
  }
};

// RIFF/WAVE decode, PCM 16-bit or 32-bit float, any rate and channel count.
AudioData read_wav(const std::string& path);

// Decode + mono mixdown (channel mean) + resample to target_rate, clipped to
// [-1, 1]. Equal source and target rates pass samples through untouched.
Samples read_audio(const std::string& path, int target_rate);

void write_wav_pcm16(const std::string& path, const Samples& mono, int sample_rate);
void write_wav_float32(const std::string& path, const Samples& mono, int sample_rate);

// Hann-windowed sinc resampler. Output length = round(n * dst / src).
Samples resample(const Samples& in, int src_rate, int dst_rate);

}  // namespace pipescore
