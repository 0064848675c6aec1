#include <doctest.h>

#include "pipescore/batch.hpp"
#include "pipescore/synth.hpp"
#include "test_util.hpp"

using namespace pipescore;

namespace {

// In-memory corpus: audio served straight from the synthetic utterances.
struct MemoryCorpus {
  CorpusSnapshot snapshot;
  std::map<std::string, Samples> audio;
  AudioProvider provider() const {
    return [this](const Utterance& u) { return audio.at(u.id); };
  }
};

MemoryCorpus memory_corpus(int n, uint64_t seed, double snr_shift) {
  std::vector<DegradationSpec> specs;
  for (int i = 0; i < n; ++i) {
    DegradationSpec s;
    s.target_snr_db = snr_shift + 2.5 * i;
    s.t60_s = 0.0;
    s.f0_hz = 120.0 + 6.0 * i;
    s.vibrato_hz = 5.0;
    s.vibrato_depth_hz = 6.0;
    s.seed = seed + static_cast<uint64_t>(i);
    s.duration_s = 1.0;
    specs.push_back(s);
  }
  const SynthCorpus corpus = make_corpus(specs, 16000);
  MemoryCorpus mem;
  mem.snapshot = corpus.snapshot;
  for (const auto& su : corpus.utterances) mem.audio[su.id] = su.audio;
  return mem;
}

}  // namespace

TEST_CASE("native metrics: serial reference and OpenMP path agree bit-exactly") {
  const MemoryCorpus mem = memory_corpus(12, 500, 0.0);
  const NativeMetricsResult serial =
      compute_native_metrics(mem.snapshot, mem.provider(), YinParams{}, BatchOptions{1});
  const NativeMetricsResult parallel =
      compute_native_metrics(mem.snapshot, mem.provider(), YinParams{}, BatchOptions{4});
  REQUIRE(serial.snr.rows.size() == parallel.snr.rows.size());
  REQUIRE(serial.f0_std.rows.size() == parallel.f0_std.rows.size());
  for (const auto& [id, v] : serial.snr.rows) REQUIRE(parallel.snr.rows.at(id) == v);
  for (const auto& [id, v] : serial.f0_std.rows) REQUIRE(parallel.f0_std.rows.at(id) == v);
}

TEST_CASE("native metrics: WADA rows track true SNR; undefined rows are skipped") {
  MemoryCorpus mem = memory_corpus(8, 900, 0.0);
  // append one utterance too short for the SNR statistic
  Utterance tiny;
  tiny.id = "tiny";
  tiny.source_id = "tiny";
  tiny.duration_s = 0.2;
  tiny.start_s = 0.0;
  tiny.end_s = 0.2;
  tiny.sample_rate = 16000;
  mem.snapshot.utterances.push_back(tiny);
  mem.audio["tiny"] = speech_like(0.2, 16000, 1);

  const NativeMetricsResult res =
      compute_native_metrics(mem.snapshot, mem.provider(), YinParams{}, BatchOptions{0});
  CHECK(res.snr.rows.size() == 8);
  CHECK(res.skipped.count("tiny") == 1);
  for (size_t i = 0; i < 8; ++i) {
    const std::string& id = mem.snapshot.utterances[i].id;
    const double truth = 2.5 * static_cast<double>(i);
    CHECK(std::fabs(res.snr.rows.at(id) - truth) <= 4.0);
  }
}

TEST_CASE("mcd table: zero against itself, serial == parallel") {
  const MemoryCorpus mem = memory_corpus(10, 321, 5.0);
  const SidecarTable self = compute_mcd_table(mem.snapshot, mem.snapshot, mem.provider(),
                                              mem.provider(), FramePlan{}, McdAlign::None,
                                              BatchOptions{0});
  REQUIRE(self.rows.size() == mem.snapshot.size());
  for (const auto& [id, v] : self.rows) CHECK(v == 0.0);

  // against a differently-degraded lineage: positive, and thread-invariant
  const MemoryCorpus other = memory_corpus(10, 321, 15.0);
  const SidecarTable serial = compute_mcd_table(mem.snapshot, other.snapshot, mem.provider(),
                                                other.provider(), FramePlan{}, McdAlign::None,
                                                BatchOptions{1});
  const SidecarTable parallel = compute_mcd_table(mem.snapshot, other.snapshot, mem.provider(),
                                                  other.provider(), FramePlan{}, McdAlign::None,
                                                  BatchOptions{4});
  for (const auto& [id, v] : serial.rows) {
    CHECK(v > 0.0);
    REQUIRE(parallel.rows.at(id) == v);
  }
}

TEST_CASE("run_sweep: grid order preserved, serial == parallel, failures quarantined") {
  const MemoryCorpus mem = memory_corpus(20, 77, 0.0);
  CorpusSnapshot snap = mem.snapshot;
  // attach ground-truth metrics so scoring works
  for (auto& u : snap.utterances) {
    const double snr = 2.5 * (&u - snap.utterances.data());
    u.metrics[MetricKind::Snr] = snr;
    u.metrics[MetricKind::Pesq] = pesq_proxy(snr);
    u.metrics[MetricKind::SiSdr] = snr + 1.0;
    u.metrics[MetricKind::T30] = 0.5;
    u.metrics[MetricKind::C50] = 12.0 + 0.2 * snr;
    u.metrics[MetricKind::F0Std] = 20.0;
    // spread MOS over [1, 4.5] so the 4.999 threshold retains nothing
    u.metrics[MetricKind::MosNisqa] = 1.0 + 3.5 * snr / 47.5;
    u.metrics[MetricKind::MosDnsmos] = mos_proxy_dnsmos(snr);
  }
  const std::map<std::string, CorpusSnapshot> processed{{"none", snap}};
  const auto grid = build_grid({"none"}, {{MetricKind::MosNisqa, {2.0, 3.0, 4.0, 4.999}}});
  const auto serial = run_sweep(snap, grid, processed, Weights{}, 5.0, BatchOptions{1});
  const auto parallel = run_sweep(snap, grid, processed, Weights{}, 5.0, BatchOptions{4});
  REQUIRE(serial.size() == grid.size());
  for (size_t i = 0; i < serial.size(); ++i) {
    CHECK(serial[i].config.name() == grid[i].name());
    CHECK(serial[i].ok == parallel[i].ok);
    if (serial[i].ok) {
      REQUIRE(serial[i].scores.total == parallel[i].scores.total);
      REQUIRE(serial[i].retained_count == parallel[i].retained_count);
    }
  }
  // the 4.999 threshold leaves nothing retained on this corpus
  CHECK(!serial.back().ok);
  CHECK(serial.back().error.find("4.999") != std::string::npos);
}
