#include <doctest.h>

#include <algorithm>
#include <random>

#include "pipescore/errors.hpp"
#include "pipescore/synth.hpp"
#include "pipescore/yin.hpp"
#include "test_util.hpp"

using namespace pipescore;

TEST_CASE("yin_f0: 220 Hz sine is voiced with median within 1 Hz") {
  const Samples tone = testutil::sine(220.0, 2.0, 16000);
  const F0Track track = yin_f0(tone, 16000);
  REQUIRE(!track.f0_hz.empty());
  const double voiced_frac =
      static_cast<double>(track.voiced_count()) / static_cast<double>(track.f0_hz.size());
  CHECK(voiced_frac >= 0.95);
  std::vector<double> voiced;
  for (size_t i = 0; i < track.f0_hz.size(); ++i) {
    if (track.voiced[i]) voiced.push_back(track.f0_hz[i]);
  }
  std::sort(voiced.begin(), voiced.end());
  CHECK(voiced[voiced.size() / 2] == doctest::Approx(220.0).epsilon(1.0 / 220.0));
}

TEST_CASE("yin_f0: silence is entirely unvoiced") {
  const Samples silence(32000, 0.0f);
  const F0Track track = yin_f0(silence, 16000);
  CHECK(track.voiced_count() == 0);
}

TEST_CASE("yin_f0 property: random pure tones recover within 1% on >=90% of voiced frames") {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> freq(80.0, 400.0);
  for (int trial = 0; trial < 12; ++trial) {
    const double f = freq(rng);
    const Samples tone = testutil::sine(f, 1.0, 16000);
    const F0Track track = yin_f0(tone, 16000);
    size_t close = 0;
    REQUIRE(track.voiced_count() > 0);
    for (size_t i = 0; i < track.f0_hz.size(); ++i) {
      if (track.voiced[i] && std::fabs(track.f0_hz[i] - f) <= 0.01 * f) ++close;
    }
    CHECK(static_cast<double>(close) / static_cast<double>(track.voiced_count()) >= 0.90);
  }
}

TEST_CASE("yin_f0: vibrato tone F0 std tracks the oracle from instantaneous frequency") {
  const int sr = 16000;
  const double f0 = 220.0, vib_hz = 5.0, depth = 10.0;
  const Samples tone = vibrato_tone(2.0, sr, f0, vib_hz, depth);
  const YinParams params;
  const F0Track track = yin_f0(tone, sr, params);
  const double measured = f0_std(track);

  // Oracle: std of the generator's instantaneous frequency sampled at the
  // frame centers (frequency the tracker should report per frame).
  std::vector<double> inst;
  const double hop_s = params.plan.hop_ms / 1000.0;
  const double frame_s = params.plan.frame_ms / 1000.0;
  for (size_t i = 0; i < track.f0_hz.size(); ++i) {
    const double center = i * hop_s + frame_s / 2.0;
    inst.push_back(f0 + depth * std::sin(2.0 * M_PI * vib_hz * center));
  }
  double mean = 0.0, var = 0.0;
  for (double v : inst) mean += v;
  mean /= static_cast<double>(inst.size());
  for (double v : inst) var += (v - mean) * (v - mean);
  const double oracle = std::sqrt(var / static_cast<double>(inst.size()));

  CHECK(oracle == doctest::Approx(depth / std::sqrt(2.0)).epsilon(0.05));
  CHECK(measured == doctest::Approx(oracle).epsilon(0.15));
  // coarse bound: within 15% of depth/sqrt(2)
  CHECK(std::fabs(measured - depth / std::sqrt(2.0)) <= 0.15 * depth / std::sqrt(2.0));
}

TEST_CASE("f0_std: constant and two-point tracks") {
  F0Track track;
  track.fmin_hz = 50;
  track.fmax_hz = 600;
  track.f0_hz = {100.0, 100.0, 100.0};
  track.voiced = {true, true, true};
  CHECK(f0_std(track) == 0.0);

  track.f0_hz = {90.0, 110.0};
  track.voiced = {true, true};
  CHECK(f0_std(track) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("f0_std needs two voiced frames") {
  F0Track track;
  track.f0_hz = {100.0, 200.0};
  track.voiced = {true, false};
  CHECK_THROWS_AS(f0_std(track), DataError);
}

TEST_CASE("f0_std is invariant to frame reordering") {
  F0Track a, b;
  a.f0_hz = {100, 140, 90, 230, 180};
  a.voiced = {true, true, true, true, true};
  b.f0_hz = {230, 90, 180, 100, 140};
  b.voiced = {true, true, true, true, true};
  CHECK(f0_std(a) == doctest::Approx(f0_std(b)).epsilon(1e-12));
}

TEST_CASE("yin_f0: voiced frames always sit inside the search bounds") {
  const Samples speech = speech_like(1.5, 16000, 21);
  const F0Track track = yin_f0(speech, 16000);
  for (size_t i = 0; i < track.f0_hz.size(); ++i) {
    if (track.voiced[i]) {
      CHECK(track.f0_hz[i] >= track.fmin_hz);
      CHECK(track.f0_hz[i] <= track.fmax_hz);
    }
  }
}
