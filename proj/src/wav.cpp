#include "pipescore/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "pipescore/errors.hpp"

namespace pipescore {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& out, uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_u16(std::string& out, uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void write_header(std::string& out, uint16_t format, uint16_t channels, uint32_t rate,
                  uint16_t bits, uint32_t data_bytes) {
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, format);
  put_u16(out, channels);
  put_u32(out, rate);
  put_u32(out, rate * channels * bits / 8);
  put_u16(out, static_cast<uint16_t>(channels * bits / 8));
  put_u16(out, bits);
  out += "data";
  put_u32(out, data_bytes);
}

}  // namespace

AudioData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const uint8_t* p = reinterpret_cast<const uint8_t*>(bytes.data());
  const size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path);
  }

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= n) {
    const char* tag = reinterpret_cast<const char*>(p + pos);
    uint32_t len = read_u32(p + pos + 4);
    const uint8_t* body = p + pos + 8;
    if (pos + 8 + len > n) len = static_cast<uint32_t>(n - pos - 8);
    if (std::memcmp(tag, "fmt ", 4) == 0 && len >= 16) {
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && len >= 40) {
        format = read_u16(body + 24);  // first two bytes of the SubFormat GUID
      }
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);  // chunks are word-aligned
  }

  if (rate == 0 || channels == 0) throw DataError("missing fmt chunk: " + path);
  if (!(format == kFormatPcm && bits == 16) && !(format == kFormatFloat && bits == 32)) {
    throw DataError("unsupported WAVE encoding (format tag " + std::to_string(format) + ", " +
                    std::to_string(bits) + "-bit) in " + path);
  }
  if (data == nullptr || data_len == 0) throw DataError("zero-length audio: " + path);

  AudioData out;
  out.sample_rate = static_cast<int>(rate);
  out.channel_count = channels;
  if (format == kFormatPcm) {
    size_t count = data_len / 2;
    out.interleaved.resize(count);
    for (size_t i = 0; i < count; ++i) {
      int16_t s = static_cast<int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
      out.interleaved[i] = static_cast<float>(s) / 32768.0f;
    }
  } else {
    size_t count = data_len / 4;
    out.interleaved.resize(count);
    std::memcpy(out.interleaved.data(), data, count * 4);
  }
  if (out.interleaved.empty()) throw DataError("zero-length audio: " + path);
  return out;
}

Samples resample(const Samples& in, int src_rate, int dst_rate) {
  if (src_rate <= 0 || dst_rate <= 0) throw ValidationError("sample rates must be positive");
  if (src_rate == dst_rate || in.empty()) return in;

  const double ratio = static_cast<double>(dst_rate) / src_rate;
  const size_t out_len = static_cast<size_t>(std::llround(static_cast<double>(in.size()) * ratio));
  Samples out(out_len, 0.0f);

  // Cutoff below the narrower Nyquist; taps widen when downsampling.
  const double fc = 0.475 * std::min(1.0, ratio);
  const int half_taps = static_cast<int>(std::ceil(16.0 * std::max(1.0, 1.0 / ratio)));

  for (size_t i = 0; i < out_len; ++i) {
    const double center = static_cast<double>(i) / ratio;
    const int k0 = static_cast<int>(std::floor(center)) - half_taps + 1;
    const int k1 = static_cast<int>(std::floor(center)) + half_taps;
    double acc = 0.0, wsum = 0.0;
    for (int k = k0; k <= k1; ++k) {
      const double x = static_cast<double>(k) - center;
      const double sinc = (x == 0.0) ? 1.0 : std::sin(2.0 * M_PI * fc * x) / (2.0 * M_PI * fc * x);
      const double hann = 0.5 + 0.5 * std::cos(M_PI * x / half_taps);
      const double w = sinc * hann;
      wsum += w;
      if (k >= 0 && k < static_cast<int>(in.size())) acc += w * in[static_cast<size_t>(k)];
    }
    out[i] = static_cast<float>(wsum != 0.0 ? acc / wsum : 0.0);
  }
  return out;
}

Samples read_audio(const std::string& path, int target_rate) {
  if (target_rate <= 0) throw ValidationError("target rate must be positive");
  AudioData raw = read_wav(path);
  const size_t frames = raw.frame_count();
  Samples mono(frames);
  if (raw.channel_count == 1) {
    mono = std::move(raw.interleaved);
  } else {
    const int ch = raw.channel_count;
    for (size_t i = 0; i < frames; ++i) {
      double acc = 0.0;
      for (int c = 0; c < ch; ++c) acc += raw.interleaved[i * ch + c];
      mono[i] = static_cast<float>(acc / ch);
    }
  }
  Samples out = (raw.sample_rate == target_rate) ? std::move(mono)
                                                 : resample(mono, raw.sample_rate, target_rate);
  for (float& v : out) v = std::clamp(v, -1.0f, 1.0f);
  return out;
}

void write_wav_pcm16(const std::string& path, const Samples& mono, int sample_rate) {
  std::string out;
  out.reserve(44 + mono.size() * 2);
  write_header(out, kFormatPcm, 1, static_cast<uint32_t>(sample_rate), 16,
               static_cast<uint32_t>(mono.size() * 2));
  for (float v : mono) {
    const float c = std::clamp(v, -1.0f, 1.0f);
    const int s = static_cast<int>(std::lrint(c * 32767.0f));
    put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(s)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write audio file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

void write_wav_float32(const std::string& path, const Samples& mono, int sample_rate) {
  std::string out;
  out.reserve(44 + mono.size() * 4);
  write_header(out, kFormatFloat, 1, static_cast<uint32_t>(sample_rate), 32,
               static_cast<uint32_t>(mono.size() * 4));
  size_t base = out.size();
  out.resize(base + mono.size() * 4);
  std::memcpy(out.data() + base, mono.data(), mono.size() * 4);
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write audio file: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace pipescore
