#include "pipescore/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include "pipescore/batch.hpp"
#include "pipescore/corpus.hpp"
#include "pipescore/csvio.hpp"
#include "pipescore/errors.hpp"
#include "pipescore/fft.hpp"
#include "pipescore/parallel.hpp"
#include "pipescore/sum.hpp"
#include "pipescore/synth.hpp"
#include "pipescore/wav.hpp"

namespace pipescore {

namespace fs = std::filesystem;

namespace {

std::string sanitize_name(const std::string& name) {
  std::string out = name;
  for (char& c : out) {
    if (c == '+' || c == ':' || c == '.' || c == '/' || c == ' ') c = '_';
  }
  return out;
}

uint64_t mix_seed(uint64_t seed, uint64_t salt) {
  uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  return x;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << content;
}

struct StageStats {
  std::string stage;
  size_t count = 0;
  double hours = 0.0;
  const AggregateMetrics* agg = nullptr;  // may be null for empty partitions
};

std::string stages_csv(const std::vector<StageStats>& stages) {
  static const std::vector<MetricKind> kOrder = {
      MetricKind::Pesq, MetricKind::Snr,   MetricKind::SiSdr, MetricKind::T30,
      MetricKind::C50,  MetricKind::F0Std, MetricKind::Mcd};
  std::string out = "stage,count,hours";
  for (MetricKind k : kOrder) {
    const std::string n = metric_name(k);
    out += "," + n + "_mean," + n + "_std," + n + "_dwmean";
  }
  out += "\n";
  for (const auto& s : stages) {
    out += s.stage + "," + std::to_string(s.count) + "," + csv::format_double(s.hours);
    for (MetricKind k : kOrder) {
      if (s.agg != nullptr && s.agg->has(k)) {
        const MetricStats& ms = s.agg->stats.at(k);
        out += "," + csv::format_double(ms.mean) + "," + csv::format_double(ms.std_dev) + "," +
               csv::format_double(ms.duration_weighted_mean);
      } else {
        out += ",,,";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// synth

void cmd_synth(const RunConfig& config) {
  RunConfig cfg = config;
  const int sr = cfg.sample_rate;
  const fs::path out(cfg.out_dir);
  fs::create_directories(out / "raw");
  fs::create_directories(out / "sidecars" / "raw");
  if (cfg.synth.variants.empty()) {
    cfg.synth.variants = {{"enhA", 5.0, 1.0}, {"enhB", 8.0, 0.5}};
  }
  for (const auto& v : cfg.synth.variants) {
    fs::create_directories(out / "variants" / v.name);
    fs::create_directories(out / "sidecars" / v.name);
  }
  if (cfg.synth.n_sources < 1) throw ValidationError("synth.n_sources must be >= 1");

  // Lineages: raw plus each variant, sharing clean material and noise stream.
  struct Lineage {
    std::string name;  // "raw" or variant name
    double snr_boost = 0.0;
    double t60_scale = 1.0;
  };
  std::vector<Lineage> lineages{{"raw", 0.0, 1.0}};
  for (const auto& v : cfg.synth.variants) lineages.push_back({v.name, v.snr_boost_db, v.t60_scale});

  static const std::vector<MetricKind> kTruthKinds = {
      MetricKind::Snr,   MetricKind::SiSdr,    MetricKind::T30,      MetricKind::C50,
      MetricKind::F0Std, MetricKind::Pesq,     MetricKind::MosNisqa, MetricKind::MosDnsmos};
  std::map<std::string, std::map<MetricKind, SidecarTable>> tables;
  for (const auto& lin : lineages) {
    for (MetricKind k : kTruthKinds) tables[lin.name][k].metric = k;
  }

  std::vector<ManifestRow> manifest(static_cast<size_t>(cfg.synth.n_sources));
  std::vector<TimestampMap> word_rows(static_cast<size_t>(cfg.synth.n_sources));
  std::vector<std::map<std::string, std::map<MetricKind, double>>> truth_rows(
      static_cast<size_t>(cfg.synth.n_sources));
  std::vector<double> durations(static_cast<size_t>(cfg.synth.n_sources), 0.0);

  parallel_for(cfg.synth.n_sources, cfg.jobs, [&](int64_t i) {
    char name[32];
    std::snprintf(name, sizeof(name), "src_%03lld", static_cast<long long>(i));
    const std::string id(name);
    const uint64_t base_seed = mix_seed(cfg.seed, static_cast<uint64_t>(i));

    // Per-source degradation and speaking style, spread deterministically.
    const double snr = 4.0 + 24.0 * static_cast<double>(i % 11) / 10.0;
    const double t60 = 0.15 + 0.30 * static_cast<double>((i * 3) % 7) / 6.0;
    const double f0 = 100.0 + static_cast<double>(i % 17) * 8.0;
    const double vib_hz = 4.0 + static_cast<double>(i % 3);
    const double vib_depth = 3.0 + static_cast<double>(i % 5) * 2.0;
    const double word_dur = (i % 3 == 0) ? 0.5 : (i % 3 == 1 ? 0.3 : 0.22);
    const double gap = (i % 2 == 0) ? 0.4 : 0.7;
    const double lead = 0.6;
    const double burst = cfg.synth.burst_s;

    SpeechTrack b1 = speech_like_tracked(burst, sr, mix_seed(base_seed, 1), f0, vib_hz, vib_depth);
    SpeechTrack b2 = speech_like_tracked(burst, sr, mix_seed(base_seed, 2), f0, vib_hz, vib_depth);
    const double total_s = lead + burst + gap + burst + lead;
    durations[static_cast<size_t>(i)] = total_s;
    const size_t n = static_cast<size_t>(std::llround(total_s * sr));
    Samples clean(n, 0.0f);
    const size_t off1 = static_cast<size_t>(std::llround(lead * sr));
    const size_t off2 = static_cast<size_t>(std::llround((lead + burst + gap) * sr));
    for (size_t k = 0; k < b1.audio.size() && off1 + k < n; ++k) clean[off1 + k] = b1.audio[k];
    for (size_t k = 0; k < b2.audio.size() && off2 + k < n; ++k) clean[off2 + k] = b2.audio[k];

    std::vector<double> pulse_freqs = b1.pulse_freqs;
    pulse_freqs.insert(pulse_freqs.end(), b2.pulse_freqs.begin(), b2.pulse_freqs.end());
    double f0_mean = 0.0, f0_var = 0.0;
    for (double f : pulse_freqs) f0_mean += f;
    f0_mean /= static_cast<double>(pulse_freqs.size());
    for (double f : pulse_freqs) f0_var += (f - f0_mean) * (f - f0_mean);
    const double f0_sd = std::sqrt(f0_var / static_cast<double>(pulse_freqs.size()));

    // Word timestamps tile each burst.
    std::vector<WordSpan> words;
    int word_no = 0;
    for (double a : {lead, lead + burst + gap}) {
      const double b_end = a + burst;
      double t = a;
      while (t < b_end - 1e-9) {
        const double e = std::min(b_end, t + word_dur);
        char w[16];
        std::snprintf(w, sizeof(w), "w%02d", word_no++);
        // absorb a trailing sliver into the previous word
        if (b_end - e < 0.4 * word_dur && e < b_end) {
          words.push_back({w, t, b_end});
          break;
        }
        words.push_back({w, t, e});
        t = e;
      }
    }
    word_rows[static_cast<size_t>(i)][id] = std::move(words);

    const Samples noise = speech_shaped_noise(n, sr, mix_seed(base_seed, 3));
    for (const auto& lin : lineages) {
      const double lin_t60 = t60 * lin.t60_scale;
      Samples rir = exp_rir(lin_t60, std::max(0.5, 1.5 * lin_t60), sr, mix_seed(base_seed, 4));
      // The raw oracle RIR is almost all tail; rooms are not. Scale the tail
      // to a +2 dB direct-to-reverberant ratio before degrading real audio.
      double tail_energy = 0.0;
      for (size_t k = 1; k < rir.size(); ++k) {
        tail_energy += static_cast<double>(rir[k]) * rir[k];
      }
      const double tail_gain = std::sqrt(std::pow(10.0, -2.0 / 10.0) / tail_energy);
      for (size_t k = 1; k < rir.size(); ++k) {
        rir[k] = static_cast<float>(rir[k] * tail_gain);
      }
      Samples wet = fft_convolve(clean, rir);
      wet.resize(n);
      double pc = 0.0, pw = 0.0;
      for (size_t k = 0; k < n; ++k) {
        pc += static_cast<double>(clean[k]) * clean[k];
        pw += static_cast<double>(wet[k]) * wet[k];
      }
      const double g = std::sqrt(pc / std::max(1e-30, pw));
      for (auto& v : wet) v = static_cast<float>(v * g);

      auto [mixture, scale] = mix_at_snr(wet, noise, snr + lin.snr_boost);
      (void)scale;
      float peak = 0.0f;
      for (float v : mixture) peak = std::max(peak, std::fabs(v));
      if (peak > 0.99f) {
        for (auto& v : mixture) v = v / peak * 0.99f;
      }

      const fs::path wav_path = lin.name == "raw" ? out / "raw" / (id + ".wav")
                                                  : out / "variants" / lin.name / (id + ".wav");
      write_wav_pcm16(wav_path.string(), mixture, sr);

      auto& truth = truth_rows[static_cast<size_t>(i)][lin.name];
      truth[MetricKind::Snr] = snr + lin.snr_boost;
      truth[MetricKind::SiSdr] = true_si_sdr(wet, mixture);
      truth[MetricKind::T30] = schroeder_t30(rir, sr);
      truth[MetricKind::C50] = c50(rir, sr);
      truth[MetricKind::F0Std] = f0_sd;
      truth[MetricKind::Pesq] = pesq_proxy(snr + lin.snr_boost);
      // Per-utterance jitter decorrelates the two predictors a little, the
      // way real NISQA and DNSMOS disagree per chunk.
      const auto jitter = [&](uint64_t salt, double scale) {
        return scale * (static_cast<double>(mix_seed(base_seed, salt) % 1000) / 999.0 - 0.5);
      };
      truth[MetricKind::MosNisqa] =
          std::clamp(mos_proxy(snr + lin.snr_boost) + jitter(7, 0.40), 1.0, 5.0);
      truth[MetricKind::MosDnsmos] =
          std::clamp(mos_proxy_dnsmos(snr + lin.snr_boost) + jitter(8, 0.20), 1.0, 5.0);
    }

    ManifestRow row;
    row.id = id;
    row.path = (out / "raw" / (id + ".wav")).string();
    manifest[static_cast<size_t>(i)] = std::move(row);
  });

  TimestampMap all_words;
  for (auto& wr : word_rows) {
    for (auto& [id, w] : wr) all_words[id] = std::move(w);
  }
  for (size_t i = 0; i < manifest.size(); ++i) {
    for (const auto& [lineage, truth] : truth_rows[i]) {
      for (const auto& [kind, value] : truth) tables[lineage][kind].rows[manifest[i].id] = value;
    }
  }

  write_manifest(manifest, (out / "manifest_raw.jsonl").string());
  save_timestamps(all_words, (out / "timestamps.jsonl").string());
  for (const auto& [lineage, by_kind] : tables) {
    for (const auto& [kind, table] : by_kind) {
      save_sidecar(table, (out / "sidecars" / lineage / (std::string(metric_name(kind)) + ".csv"))
                              .string());
    }
  }

  // Wire a ready-to-run config for segment -> metrics -> attach -> sweep.
  RunConfig next = cfg;
  next.raw_manifest = (out / "manifest_raw.jsonl").string();
  next.timestamps = (out / "timestamps.jsonl").string();
  next.variant_dirs.clear();
  for (const auto& v : cfg.synth.variants) {
    next.variant_dirs[v.name] = (out / "variants" / v.name).string();
  }
  if (next.filters.empty()) {
    // Threshold grids matched to the proxy distributions (3 x (4+4) = 24).
    next.filters = {{MetricKind::MosNisqa, {2.4, 2.8, 3.2, 3.6}},
                    {MetricKind::MosDnsmos, {2.0, 2.2, 2.4, 2.6}}};
  }
  next.attach.clear();
  for (const std::string& enh : next.enhancement_names()) {
    const std::string lineage = enh == "none" ? "raw" : enh;
    for (MetricKind k : {MetricKind::Pesq, MetricKind::SiSdr, MetricKind::T30, MetricKind::C50,
                         MetricKind::F0Std, MetricKind::MosNisqa, MetricKind::MosDnsmos}) {
      next.attach.push_back({enh, k,
                             (out / "sidecars" / lineage / (std::string(metric_name(k)) + ".csv"))
                                 .string(),
                             MergeJoin::Source, MergePolicy::Strict});
    }
    // Native metrics come from cmd_metrics outputs, keyed by utterance id.
    next.attach.push_back(
        {enh, MetricKind::Snr, next.native_dir(enh) + "/SNR.csv", MergeJoin::Id,
         MergePolicy::Strict});
    if (enh != "none") {
      next.attach.push_back({enh, MetricKind::Mcd, next.native_dir(enh) + "/MCD.csv",
                             MergeJoin::Id, MergePolicy::Strict});
    }
  }
  save_run_config(next, (out / "run_config.json").string());
  const double total_s = pairwise_sum(durations.size(), [&](size_t i) { return durations[i]; });
  std::cout << "synth: wrote " << manifest.size() << " sources, "
            << csv::format_fixed(total_s / 60.0, 1) << " min, " << lineages.size()
            << " lineages -> " << out.string() << "\n";
}

// ---------------------------------------------------------------------------
// ingest

void cmd_ingest(const RunConfig& cfg) {
  if (cfg.raw_manifest.empty()) throw ValidationError("ingest: raw_manifest not set in config");
  IngestOptions opts;
  opts.target_rate = cfg.sample_rate;
  opts.jobs = cfg.jobs;
  CorpusSnapshot snap = ingest_manifest(cfg.raw_manifest, opts);
  snap.name = "raw";
  for (const auto& entry : cfg.attach) {
    if (entry.enhancement != "raw") continue;
    SidecarTable table;
    try {
      table = load_sidecar(entry.path, entry.metric);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(metric_name(entry.metric)) + " sidecar: " + e.what());
    }
    const MergeStats stats = merge(snap, table, entry.policy, entry.join);
    std::cout << "ingest: attached " << metric_name(entry.metric) << " coverage "
              << csv::format_fixed(stats.coverage, 4) << "\n";
  }
  fs::create_directories(fs::path(cfg.out_dir) / "snapshots");
  save_snapshot(snap, cfg.snapshot_path("raw"));
  std::cout << "ingest: " << snap.size() << " utterances, "
            << csv::format_fixed(snap.total_hours(), 4) << " h -> " << cfg.snapshot_path("raw")
            << "\n";
}

// ---------------------------------------------------------------------------
// segment

void cmd_segment(const RunConfig& cfg) {
  if (cfg.raw_manifest.empty()) throw ValidationError("segment: raw_manifest not set in config");
  IngestOptions iopts;
  iopts.target_rate = cfg.sample_rate;
  iopts.jobs = cfg.jobs;
  const CorpusSnapshot sources = ingest_manifest(cfg.raw_manifest, iopts);
  const fs::path seg_dir = fs::path(cfg.out_dir) / "segmented";
  fs::create_directories(seg_dir);

  if (sources.empty()) {
    std::cerr << "segment: warning: empty corpus, writing empty outputs\n";
    write_manifest({}, cfg.segmented_manifest("none"));
    return;
  }

  AudioCache cache(cfg.sample_rate);
  TimestampMap words;
  if (!cfg.timestamps.empty()) words = load_timestamps(cfg.timestamps);

  // Tune per speech-rate class where timestamps exist; default otherwise.
  VadProfile profile{{SpeechRateClass::Slow, VadParams{}},
                     {SpeechRateClass::Normal, VadParams{}},
                     {SpeechRateClass::Fast, VadParams{}}};
  CorpusSnapshot tunable;
  for (const auto& u : sources.utterances) {
    if (words.count(u.source_id)) tunable.utterances.push_back(u);
  }
  if (tunable.empty()) {
    std::cerr << "segment: warning: no word timestamps; all classes use default VAD params\n";
  } else {
    int class_salt = 0;
    for (SpeechRateClass cls :
         {SpeechRateClass::Slow, SpeechRateClass::Normal, SpeechRateClass::Fast}) {
      TpeSettings settings = cfg.tpe_run.tpe;
      settings.seed = mix_seed(cfg.seed, static_cast<uint64_t>(class_salt++));
      std::vector<TrialRecord> history;
      try {
        profile[cls] = tune_vad(tunable, words, cls, cfg.rate_bounds, vad_param_space(),
                                cfg.tpe_run.budget, settings, cache.provider(), cfg.jobs,
                                &history);
        save_history_csv(vad_param_space(), history,
                         (fs::path(cfg.out_dir) / ("tpe_history_" +
                                                   std::string(rate_class_name(cls)) + ".csv"))
                             .string());
      } catch (const DataError&) {
        std::cerr << "segment: note: no sources in class " << rate_class_name(cls)
                  << ", keeping defaults\n";
      }
    }
  }
  save_vad_profile(profile, (fs::path(cfg.out_dir) / "vad_profile.txt").string());

  // Detect + concatenate per source; manifest order is preserved.
  struct SourceResult {
    std::vector<Segment> detected;
    std::vector<Segment> utterances;
  };
  std::vector<SourceResult> results(sources.size());
  parallel_for(static_cast<int64_t>(sources.size()), cfg.jobs, [&](int64_t i) {
    const Utterance& u = sources.utterances[static_cast<size_t>(i)];
    SpeechRateClass cls = SpeechRateClass::Normal;
    auto wit = words.find(u.source_id);
    if (wit != words.end()) {
      cls = classify_rate(words_per_second(wit->second), cfg.rate_bounds);
    }
    const Samples audio = cache.slice(u);
    if (audio.empty()) return;
    SourceResult& r = results[static_cast<size_t>(i)];
    r.detected = detect(audio, cfg.sample_rate, profile.at(cls));
    r.utterances = concat_to_target(r.detected, cfg.length_target);
  });

  std::string seg_csv = "source_id,start_s,end_s\n";
  std::vector<ManifestRow> rows;
  for (size_t i = 0; i < sources.size(); ++i) {
    const Utterance& u = sources.utterances[i];
    for (const auto& s : results[i].detected) {
      seg_csv += csv::escape(u.source_id) + "," + csv::format_double(u.start_s + s.start_s) + "," +
                 csv::format_double(u.start_s + s.end_s) + "\n";
    }
    int k = 0;
    for (const auto& s : results[i].utterances) {
      ManifestRow row;
      char suffix[16];
      std::snprintf(suffix, sizeof(suffix), "#%03d", k++);
      row.id = u.source_id + suffix;
      row.path = u.source_path;
      row.source_id = u.source_id;
      row.speaker_id = u.speaker_id;
      row.start_s = u.start_s + s.start_s;
      row.end_s = u.start_s + s.end_s;
      rows.push_back(std::move(row));
    }
  }
  write_text((fs::path(cfg.out_dir) / "segments.csv").string(), seg_csv);
  write_manifest(rows, cfg.segmented_manifest("none"));

  // Variant manifests: same ids and extents, paths remapped into the
  // time-aligned processed audio directories.
  for (const auto& [variant, dir] : cfg.variant_dirs) {
    std::vector<ManifestRow> vrows = rows;
    for (auto& row : vrows) {
      const fs::path mapped = fs::path(dir) / fs::path(row.path).filename();
      if (!fs::exists(mapped)) {
        throw DataError("segment: variant '" + variant + "' is missing " + mapped.string());
      }
      row.path = mapped.string();
    }
    write_manifest(vrows, cfg.segmented_manifest(variant));
  }
  std::cout << "segment: " << rows.size() << " utterances from " << sources.size()
            << " sources\n";
}

// ---------------------------------------------------------------------------
// metrics

void cmd_metrics(const RunConfig& cfg) {
  IngestOptions iopts;
  iopts.target_rate = cfg.sample_rate;
  iopts.jobs = cfg.jobs;
  BatchOptions bopts{cfg.jobs};

  std::map<std::string, CorpusSnapshot> snaps;
  std::map<std::string, std::shared_ptr<AudioCache>> caches;
  for (const std::string& enh : cfg.enhancement_names()) {
    snaps[enh] = ingest_manifest(cfg.segmented_manifest(enh), iopts);
    caches[enh] = std::make_shared<AudioCache>(cfg.sample_rate);
    fs::create_directories(cfg.native_dir(enh));

    const NativeMetricsResult res =
        compute_native_metrics(snaps[enh], caches[enh]->provider(), YinParams{}, bopts);
    save_sidecar(res.snr, cfg.native_dir(enh) + "/SNR.csv");
    save_sidecar(res.f0_std, cfg.native_dir(enh) + "/F0_STD.csv");
    const size_t total = snaps[enh].size();
    std::cout << "metrics[" << enh << "]: SNR " << res.snr.rows.size() << "/" << total
              << ", F0_STD " << res.f0_std.rows.size() << "/" << total;
    if (!res.skipped.empty()) std::cout << " (" << res.skipped.size() << " partial rows)";
    std::cout << "\n";
  }

  for (const std::string& enh : cfg.enhancement_names()) {
    if (enh == "none") continue;
    const SidecarTable mcd_table =
        compute_mcd_table(snaps["none"], snaps[enh], caches["none"]->provider(),
                          caches[enh]->provider(), FramePlan{}, McdAlign::None, bopts);
    save_sidecar(mcd_table, cfg.native_dir(enh) + "/MCD.csv");
    std::cout << "metrics[" << enh << "]: MCD " << mcd_table.rows.size() << " rows\n";
  }
}

// ---------------------------------------------------------------------------
// attach

void cmd_attach(const RunConfig& cfg) {
  IngestOptions iopts;
  iopts.target_rate = cfg.sample_rate;
  iopts.jobs = cfg.jobs;
  fs::create_directories(fs::path(cfg.out_dir) / "snapshots");
  for (const std::string& enh : cfg.enhancement_names()) {
    CorpusSnapshot snap = ingest_manifest(cfg.segmented_manifest(enh), iopts);
    snap.name = enh;
    for (const auto& entry : cfg.attach) {
      if (entry.enhancement != enh) continue;
      SidecarTable table;
      try {
        table = load_sidecar(entry.path, entry.metric);
      } catch (const ValidationError& e) {
        throw ValidationError(std::string(metric_name(entry.metric)) + " sidecar: " + e.what());
      }
      const MergeStats stats = merge(snap, table, entry.policy, entry.join);
      std::cout << "attach[" << enh << "]: " << metric_name(entry.metric) << " coverage "
                << csv::format_fixed(stats.coverage, 4);
      if (!stats.replaced_ids.empty()) {
        std::cout << " (replaced " << stats.replaced_ids.size() << " values)";
      }
      std::cout << "\n";
    }
    save_snapshot(snap, cfg.snapshot_path(enh));
  }
}

// ---------------------------------------------------------------------------
// sweep

void cmd_sweep(const RunConfig& cfg) {
  if (cfg.filters.empty()) throw ValidationError("sweep: no filters configured");
  std::map<std::string, CorpusSnapshot> snaps;
  for (const std::string& enh : cfg.enhancement_names()) {
    snaps[enh] = load_snapshot(cfg.snapshot_path(enh));
    snaps[enh].name = enh;
  }
  const CorpusSnapshot& raw = snaps.at("none");
  const std::vector<PipelineConfig> grid = build_grid(cfg.enhancement_names(), cfg.filters);
  const std::vector<ConfigRunResult> results =
      run_sweep(raw, grid, snaps, cfg.weights, cfg.mcd_reference_db, BatchOptions{cfg.jobs});

  const fs::path rep(cfg.reports_dir());
  fs::create_directories(rep);

  // ranking.csv mirrors the published score-table columns.
  std::vector<ScoredConfig> scored;
  for (const auto& r : results) {
    if (r.ok) scored.push_back({r.config.name(), r.scores});
  }
  scored = rank(std::move(scored));
  std::string ranking = "config,dr,sq,ap,sd,total\n";
  for (const auto& s : scored) {
    ranking += csv::escape(s.name) + "," + csv::format_fixed(s.scores.dr, 4) + "," +
               csv::format_fixed(s.scores.sq, 4) + "," + csv::format_fixed(s.scores.ap, 4) + "," +
               csv::format_fixed(s.scores.sd, 4) + "," + csv::format_fixed(s.scores.total, 4) +
               "\n";
  }
  write_text((rep / "ranking.csv").string(), ranking);

  std::string quarantine = "config,error\n";
  size_t failed = 0;
  for (const auto& r : results) {
    if (!r.ok) {
      ++failed;
      quarantine += csv::escape(r.config.name()) + "," + csv::escape(r.error) + "\n";
    }
  }
  write_text((rep / "quarantine.csv").string(), quarantine);

  // Per-config stage breakdowns and the trade-off scatter files.
  std::string dr_pesq = "config,dataset_reduction,pesq_improvement_pct\n";
  std::string dr_t30 = "config,dataset_reduction,t30_improvement_pct\n";
  std::string f0_pesq = "config,f0std_diff_pct,pesq_improvement_pct\n";
  for (const auto& r : results) {
    if (!r.ok) continue;
    std::vector<StageStats> stages;
    stages.push_back({"original", raw.size(), r.raw_agg.hours, &r.raw_agg});
    stages.push_back({"retained", r.retained_count, r.retained_agg.hours, &r.retained_agg});
    stages.push_back({"eliminated", r.eliminated_count, r.outcome.eliminated.total_hours(),
                      r.eliminated_count > 0 ? &r.eliminated_agg : nullptr});
    write_text((rep / ("stages_" + sanitize_name(r.config.name()) + ".csv")).string(),
               stages_csv(stages));

    const double pesq_r = r.raw_agg.mean(MetricKind::Pesq);
    const double pesq_p = r.retained_agg.mean(MetricKind::Pesq);
    const double t30_r = r.raw_agg.mean(MetricKind::T30);
    const double t30_p = r.retained_agg.mean(MetricKind::T30);
    const double f0_r = r.raw_agg.mean(MetricKind::F0Std);
    const double f0_p = r.retained_agg.mean(MetricKind::F0Std);
    const double pesq_gain = 100.0 * (pesq_p - pesq_r) / pesq_r;
    // improvement = reduction for the one down-is-better acoustic metric
    const double t30_gain = 100.0 * (t30_r - t30_p) / t30_r;
    const double f0_diff = 100.0 * (f0_p - f0_r) / f0_r;
    const std::string n = csv::escape(r.config.name());
    dr_pesq += n + "," + csv::format_fixed(r.scores.dr, 6) + "," + csv::format_fixed(pesq_gain, 4) + "\n";
    dr_t30 += n + "," + csv::format_fixed(r.scores.dr, 6) + "," + csv::format_fixed(t30_gain, 4) + "\n";
    f0_pesq += n + "," + csv::format_fixed(f0_diff, 4) + "," + csv::format_fixed(pesq_gain, 4) + "\n";
  }
  write_text((rep / "scatter_dr_pesq.csv").string(), dr_pesq);
  write_text((rep / "scatter_dr_t30.csv").string(), dr_t30);
  write_text((rep / "scatter_f0_pesq.csv").string(), f0_pesq);

  // Distribution stats per filter metric on the unprocessed corpus.
  std::string sens = "metric,threshold,retained_fraction,sensitivity,median,variance\n";
  for (const auto& [metric, thresholds] : cfg.filters) {
    const SensitivityReport report = filter_sensitivity(raw, metric, thresholds, 0.1);
    for (const auto& row : report.rows) {
      sens += std::string(metric_name(metric)) + "," + csv::format_double(row.threshold) + "," +
              csv::format_fixed(row.retained_fraction, 6) + "," +
              (row.defined ? csv::format_fixed(row.sensitivity, 6) : "undefined") + "," +
              csv::format_fixed(report.median, 6) + "," + csv::format_fixed(report.variance, 6) +
              "\n";
    }
  }
  write_text((rep / "sensitivity.csv").string(), sens);

  // Human-readable summary.
  std::string summary = "rank  total   dr      sq      ap      sd      config\n";
  for (size_t i = 0; i < scored.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-5zu %-7.3f %-7.4f %-7.4f %-7.4f %-7.4f %s\n", i + 1,
                  scored[i].scores.total, scored[i].scores.dr, scored[i].scores.sq,
                  scored[i].scores.ap, scored[i].scores.sd, scored[i].name.c_str());
    summary += line;
  }
  if (failed > 0) {
    summary += "\n" + std::to_string(failed) + " config(s) quarantined; see quarantine.csv\n";
  }
  write_text((rep / "summary.txt").string(), summary);
  std::cout << summary;
  std::cout << "sweep: " << scored.size() << " configs ranked, " << failed << " quarantined -> "
            << rep.string() << "\n";
}

// ---------------------------------------------------------------------------
// rank

void cmd_rank(const RunConfig& cfg, const std::string& scores_csv) {
  const auto rows = csv::read_rows(scores_csv);
  if (rows.empty() || rows[0].size() < 5 || rows[0][0] != "config") {
    throw ValidationError("rank: expected CSV with header config,dr,sq,ap,sd");
  }
  std::vector<ScoredConfig> scored;
  for (size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].size() < 5) {
      throw ValidationError("rank: short row at line " + std::to_string(i + 1));
    }
    ScoredConfig sc;
    sc.name = rows[i][0];
    try {
      sc.scores = composite(std::stod(rows[i][1]), std::stod(rows[i][2]), std::stod(rows[i][3]),
                            std::stod(rows[i][4]), cfg.weights);
    } catch (const std::invalid_argument&) {
      throw ValidationError("rank: bad number at line " + std::to_string(i + 1));
    }
    scored.push_back(std::move(sc));
  }
  scored = rank(std::move(scored));
  std::string outcsv = "config,dr,sq,ap,sd,total\n";
  for (const auto& s : scored) {
    outcsv += csv::escape(s.name) + "," + csv::format_double(s.scores.dr) + "," +
              csv::format_double(s.scores.sq) + "," + csv::format_double(s.scores.ap) + "," +
              csv::format_double(s.scores.sd) + "," + csv::format_double(s.scores.total) + "\n";
  }
  fs::create_directories(cfg.reports_dir());
  write_text(cfg.reports_dir() + "/ranking.csv", outcsv);
  std::cout << outcsv;
}

}  // namespace pipescore
