// Serial reference vs OpenMP throughput on the batch kernels.

#include <chrono>
#include <cstdio>
#include <map>
#include <random>
#include <string>

#include "pipescore/batch.hpp"
#include "pipescore/synth.hpp"

using namespace pipescore;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

struct MemoryCorpus {
  CorpusSnapshot snapshot;
  std::map<std::string, Samples> audio;
  AudioProvider provider() const {
    return [this](const Utterance& u) { return audio.at(u.id); };
  }
};

MemoryCorpus build_corpus(int n, double duration_s, uint64_t seed) {
  std::vector<DegradationSpec> specs;
  for (int i = 0; i < n; ++i) {
    DegradationSpec s;
    s.target_snr_db = -2.0 + 26.0 * (i % 11) / 10.0;
    s.f0_hz = 100.0 + 8.0 * (i % 17);
    s.vibrato_hz = 5.0;
    s.vibrato_depth_hz = 6.0;
    s.seed = seed + static_cast<uint64_t>(i);
    s.duration_s = duration_s;
    specs.push_back(s);
  }
  const SynthCorpus corpus = make_corpus(specs, 16000);
  MemoryCorpus mem;
  mem.snapshot = corpus.snapshot;
  for (const auto& su : corpus.utterances) mem.audio[su.id] = su.audio;
  return mem;
}

template <typename F>
double time_run(F&& fn) {
  const double t0 = now_s();
  fn();
  return now_s() - t0;
}

void report(const char* kernel, double serial_s, double parallel_s) {
  std::printf("%-24s serial %7.3fs   openmp %7.3fs   speedup %.2fx\n", kernel, serial_s,
              parallel_s, serial_s / parallel_s);
}

}  // namespace

int main(int argc, char** argv) {
  const int n = argc > 1 ? std::atoi(argv[1]) : 48;
  const double dur = argc > 2 ? std::atof(argv[2]) : 3.0;
  std::printf("corpus: %d utterances x %.1fs\n", n, dur);
  MemoryCorpus mem = build_corpus(n, dur, 2025);

  NativeMetricsResult serial_metrics, parallel_metrics;
  const double t_serial = time_run([&] {
    serial_metrics = compute_native_metrics(mem.snapshot, mem.provider(), YinParams{},
                                            BatchOptions{1});
  });
  const double t_parallel = time_run([&] {
    parallel_metrics = compute_native_metrics(mem.snapshot, mem.provider(), YinParams{},
                                              BatchOptions{0});
  });
  bool equal = serial_metrics.snr.rows == parallel_metrics.snr.rows &&
               serial_metrics.f0_std.rows == parallel_metrics.f0_std.rows;
  report("native metrics", t_serial, t_parallel);

  const MemoryCorpus other = build_corpus(n, dur, 4051);
  SidecarTable mcd_serial, mcd_parallel;
  const double m_serial = time_run([&] {
    mcd_serial = compute_mcd_table(mem.snapshot, other.snapshot, mem.provider(), other.provider(),
                                   FramePlan{}, McdAlign::None, BatchOptions{1});
  });
  const double m_parallel = time_run([&] {
    mcd_parallel = compute_mcd_table(mem.snapshot, other.snapshot, mem.provider(),
                                     other.provider(), FramePlan{}, McdAlign::None,
                                     BatchOptions{0});
  });
  equal = equal && mcd_serial.rows == mcd_parallel.rows;
  report("mcd table", m_serial, m_parallel);

  // metadata-scale sweep: many utterances, many configs
  CorpusSnapshot meta;
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> snr(-2.0, 24.0);
  for (int i = 0; i < 20000; ++i) {
    Utterance u;
    u.id = "m" + std::to_string(i);
    u.source_id = u.id;
    u.duration_s = 4.0;
    const double s = snr(rng);
    u.metrics[MetricKind::Snr] = s;
    u.metrics[MetricKind::Pesq] = pesq_proxy(s);
    u.metrics[MetricKind::SiSdr] = s - 1.0;
    u.metrics[MetricKind::T30] = 0.6 - 0.01 * s;
    u.metrics[MetricKind::C50] = 12.0 + 0.3 * s;
    u.metrics[MetricKind::F0Std] = 30.0 + s;
    u.metrics[MetricKind::MosNisqa] = mos_proxy(s);
    u.metrics[MetricKind::MosDnsmos] = mos_proxy_dnsmos(s);
    meta.utterances.push_back(u);
  }
  const std::map<std::string, CorpusSnapshot> processed{{"none", meta}};
  const auto grid = build_grid({"none"}, {{MetricKind::MosNisqa, {1.5, 2.0, 2.5, 3.0, 3.5, 4.0}},
                                          {MetricKind::MosDnsmos, {1.6, 1.9, 2.2, 2.5, 2.8, 3.1}}});
  std::vector<ConfigRunResult> sweep_serial, sweep_parallel;
  const double s_serial =
      time_run([&] { sweep_serial = run_sweep(meta, grid, processed, {}, 5.0, BatchOptions{1}); });
  const double s_parallel =
      time_run([&] { sweep_parallel = run_sweep(meta, grid, processed, {}, 5.0, BatchOptions{0}); });
  for (size_t i = 0; i < sweep_serial.size(); ++i) {
    equal = equal && sweep_serial[i].ok == sweep_parallel[i].ok &&
            (!sweep_serial[i].ok ||
             sweep_serial[i].scores.total == sweep_parallel[i].scores.total);
  }
  report("config sweep (20k utts)", s_serial, s_parallel);

  std::printf("serial/openmp outputs identical: %s\n", equal ? "yes" : "NO");
  return equal ? 0 : 1;
}
