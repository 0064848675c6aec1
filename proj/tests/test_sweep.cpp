#include <doctest.h>

#include <cmath>
#include <random>

#include "pipescore/errors.hpp"
#include "pipescore/sweep.hpp"
#include "pipescore/synth.hpp"
#include "test_util.hpp"

using namespace pipescore;

namespace {

CorpusSnapshot mos_snapshot(const std::vector<double>& values) {
  CorpusSnapshot snap;
  snap.name = "mos";
  for (size_t i = 0; i < values.size(); ++i) {
    Utterance u;
    u.id = "u" + std::to_string(i);
    u.source_id = u.id;
    u.duration_s = 1.0;
    u.start_s = 0.0;
    u.end_s = 1.0;
    u.metrics[MetricKind::MosNisqa] = values[i];
    snap.utterances.push_back(u);
  }
  return snap;
}

// Snapshot with every scored metric derived monotonically from per-utterance
// true SNR, so filtering provably moves the aggregates.
CorpusSnapshot scored_snapshot(const std::vector<double>& snrs, bool with_mcd) {
  CorpusSnapshot snap;
  snap.name = with_mcd ? "denoised" : "none";
  for (size_t i = 0; i < snrs.size(); ++i) {
    const double s = snrs[i];
    Utterance u;
    u.id = "u" + std::to_string(i);
    u.source_id = u.id;
    u.duration_s = 2.0;
    u.start_s = 0.0;
    u.end_s = 2.0;
    u.metrics[MetricKind::Snr] = s;
    u.metrics[MetricKind::Pesq] = pesq_proxy(s);
    u.metrics[MetricKind::SiSdr] = s - 1.0;
    u.metrics[MetricKind::T30] = 1.0 / (1.0 + 0.05 * (s + 10.0));
    u.metrics[MetricKind::C50] = 10.0 + 0.3 * s;
    u.metrics[MetricKind::F0Std] = 40.0 + 0.5 * s;
    u.metrics[MetricKind::MosNisqa] = mos_proxy(s);
    u.metrics[MetricKind::MosDnsmos] = mos_proxy_dnsmos(s);
    if (with_mcd) u.metrics[MetricKind::Mcd] = 3.0 - 0.05 * s;
    snap.utterances.push_back(u);
  }
  return snap;
}

std::vector<double> snr_ladder(size_t n) {
  std::vector<double> snrs;
  for (size_t i = 0; i < n; ++i) snrs.push_back(-2.0 + 24.0 * static_cast<double>(i) / (n - 1));
  return snrs;
}

}  // namespace

TEST_CASE("build_grid: 3 enhancements x (4+4) thresholds = 24 configs") {
  const auto grid = build_grid({"none", "dfn", "demucs"},
                               {{MetricKind::MosNisqa, {3.0, 3.5, 3.8, 4.2}},
                                {MetricKind::MosDnsmos, {2.7, 3.0, 3.2, 3.4}}});
  CHECK(grid.size() == 24);
  CHECK(grid[0].enhancement == "none");
  CHECK(grid[0].filter_metric == MetricKind::MosNisqa);
  CHECK(grid[0].threshold == 3.0);
  CHECK(grid[23].enhancement == "demucs");
  CHECK(grid[23].filter_metric == MetricKind::MosDnsmos);
  CHECK(grid[23].threshold == 3.4);
}

TEST_CASE("build_grid: 1x1 grid and validation failures") {
  const auto one = build_grid({"none"}, {{MetricKind::MosNisqa, {3.0}}});
  CHECK(one.size() == 1);
  CHECK(one[0].name() == "none+MOS_NISQA:3");

  CHECK_THROWS_AS(build_grid({}, {{MetricKind::MosNisqa, {3.0}}}), ValidationError);
  CHECK_THROWS_AS(build_grid({"none"}, {}), ValidationError);
  CHECK_THROWS_AS(build_grid({"none"}, {{MetricKind::MosNisqa, {3.0, 3.0}}}), ValidationError);
}

TEST_CASE("apply_filter: boundary value is retained; partition is complete") {
  const CorpusSnapshot snap = mos_snapshot({3.1, 3.9, 4.5});
  const FilterOutcome out = apply_filter(snap, MetricKind::MosNisqa, 3.8);
  CHECK(out.retained.size() == 2);
  CHECK(out.eliminated.size() == 1);

  const FilterOutcome all = apply_filter(snap, MetricKind::MosNisqa, 1.0);
  CHECK(all.eliminated.size() == 0);
  const FilterOutcome none_left = apply_filter(snap, MetricKind::MosNisqa, 4.9);
  CHECK(none_left.retained.size() == 0);

  const FilterOutcome exact = apply_filter(snap, MetricKind::MosNisqa, 3.9);
  CHECK(exact.retained.size() == 2);  // >= keeps the boundary utterance

  CorpusSnapshot missing = snap;
  missing.utterances[1].metrics.clear();
  CHECK_THROWS_AS(apply_filter(missing, MetricKind::MosNisqa, 3.0), DataError);
}

TEST_CASE("apply_filter property: partitions are exclusive, complete, lineage-preserving") {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> mos(1.0, 5.0);
  for (int trial = 0; trial < 25; ++trial) {
    std::vector<double> values;
    const size_t n = 1 + rng() % 60;
    for (size_t i = 0; i < n; ++i) values.push_back(mos(rng));
    const CorpusSnapshot snap = mos_snapshot(values);
    const double threshold = mos(rng);
    const FilterOutcome out = apply_filter(snap, MetricKind::MosNisqa, threshold);
    CHECK(out.retained.size() + out.eliminated.size() == snap.size());
    std::set<std::string> ids;
    for (const auto& u : out.retained.utterances) {
      CHECK(u.metrics.at(MetricKind::MosNisqa) >= threshold);
      ids.insert(u.id);
    }
    for (const auto& u : out.eliminated.utterances) {
      CHECK(u.metrics.at(MetricKind::MosNisqa) < threshold);
      CHECK(ids.insert(u.id).second);
    }
    CHECK(ids.size() == snap.size());
  }
}

TEST_CASE("retained hours are non-increasing in threshold") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> mos(1.0, 5.0);
  std::vector<double> values;
  for (int i = 0; i < 200; ++i) values.push_back(mos(rng));
  const CorpusSnapshot snap = mos_snapshot(values);
  double prev = std::numeric_limits<double>::infinity();
  for (double t : {1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5}) {
    const double hours = apply_filter(snap, MetricKind::MosNisqa, t).retained.total_hours();
    CHECK(hours <= prev + 1e-12);
    prev = hours;
  }
}

TEST_CASE("retained-set std narrows as the threshold rises, on a unimodal fixture") {
  std::mt19937 rng(41);
  std::normal_distribution<double> mos(3.0, 0.7);
  std::vector<double> values;
  for (int i = 0; i < 4000; ++i) values.push_back(std::clamp(mos(rng), 1.0, 5.0));
  const CorpusSnapshot snap = mos_snapshot(values);
  double prev_std = std::numeric_limits<double>::infinity();
  for (double t : {1.5, 2.0, 2.5, 3.0, 3.5}) {
    const FilterOutcome out = apply_filter(snap, MetricKind::MosNisqa, t);
    REQUIRE(!out.retained.empty());
    double mean = 0.0;
    for (const auto& u : out.retained.utterances) mean += u.metrics.at(MetricKind::MosNisqa);
    mean /= static_cast<double>(out.retained.size());
    double var = 0.0;
    for (const auto& u : out.retained.utterances) {
      const double d = u.metrics.at(MetricKind::MosNisqa) - mean;
      var += d * d;
    }
    const double sd = std::sqrt(var / static_cast<double>(out.retained.size()));
    CHECK(sd <= prev_std + 1e-12);
    prev_std = sd;
  }
}

TEST_CASE("filter_sensitivity: uniform distribution closed form") {
  // deterministic uniform grid over [1, 5]
  std::vector<double> values;
  const size_t n = 10000;
  for (size_t i = 0; i < n; ++i) {
    values.push_back(1.0 + 4.0 * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  }
  const CorpusSnapshot snap = mos_snapshot(values);
  const SensitivityReport rep =
      filter_sensitivity(snap, MetricKind::MosNisqa, {3.0, 3.5}, 0.1);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[0].retained_fraction == doctest::Approx(0.5).epsilon(0.02));
  CHECK(rep.rows[0].sensitivity == doctest::Approx(0.05).epsilon(0.2));
  CHECK(rep.median == doctest::Approx(3.0).epsilon(0.01));
  CHECK(rep.variance == doctest::Approx(16.0 / 12.0).epsilon(0.01));
}

TEST_CASE("filter_sensitivity: constant values and point masses") {
  const CorpusSnapshot constant = mos_snapshot(std::vector<double>(50, 3.0));
  const SensitivityReport rep =
      filter_sensitivity(constant, MetricKind::MosNisqa, {2.0, 2.5}, 0.1);
  for (const auto& row : rep.rows) {
    CHECK(row.retained_fraction == 1.0);
    CHECK(row.sensitivity == 0.0);
  }

  // point mass just above one threshold: the step crosses it
  std::vector<double> values(100, 3.05);
  const CorpusSnapshot mass = mos_snapshot(values);
  const SensitivityReport spike =
      filter_sensitivity(mass, MetricKind::MosNisqa, {3.0, 2.0}, 0.1);
  CHECK(spike.rows[0].sensitivity == doctest::Approx(1.0));  // everything vanishes at 3.1
  CHECK(spike.rows[1].sensitivity == doctest::Approx(0.0));

  // empty retained set -> undefined marker, not an error
  const SensitivityReport undef =
      filter_sensitivity(mass, MetricKind::MosNisqa, {4.0, 3.0}, 0.1);
  CHECK(!undef.rows[0].defined);

  CHECK_THROWS_AS(filter_sensitivity(mass, MetricKind::MosNisqa, {3.0}, 0.1), ValidationError);
}

TEST_CASE("run_config: identity enhancement with threshold below all values scores (0,3,2,0)") {
  const CorpusSnapshot snap = scored_snapshot(snr_ladder(16), false);
  PipelineConfig cfg;
  cfg.enhancement = "none";
  cfg.filter_metric = MetricKind::MosNisqa;
  cfg.threshold = 0.0;
  const std::map<std::string, CorpusSnapshot> processed{{"none", snap}};
  const ConfigRunResult res = run_config(snap, cfg, processed);
  REQUIRE(res.ok);
  CHECK(res.scores.dr == 0.0);
  CHECK(res.scores.sq == 3.0);
  CHECK(res.scores.ap == 2.0);
  CHECK(res.scores.sd == 0.0);
  CHECK(std::fabs(res.scores.total - 5.0) <= 1e-9);
}

TEST_CASE("run_config: filtering a low/high-SNR mix improves SQ below 3") {
  const CorpusSnapshot snap = scored_snapshot(snr_ladder(24), false);
  PipelineConfig cfg;
  cfg.enhancement = "none";
  cfg.filter_metric = MetricKind::MosNisqa;
  cfg.threshold = 3.0;  // keeps the high-SNR subpopulation
  const std::map<std::string, CorpusSnapshot> processed{{"none", snap}};
  const ConfigRunResult res = run_config(snap, cfg, processed);
  REQUIRE(res.ok);
  CHECK(res.retained_count > 0);
  CHECK(res.retained_count < snap.size());
  CHECK(res.scores.sq < 3.0);
  CHECK(res.scores.dr > 0.0);
}

TEST_CASE("run_config: threshold above all values is quarantined, not thrown") {
  const CorpusSnapshot snap = scored_snapshot(snr_ladder(10), false);
  PipelineConfig cfg;
  cfg.enhancement = "none";
  cfg.filter_metric = MetricKind::MosNisqa;
  cfg.threshold = 4.999;
  const std::map<std::string, CorpusSnapshot> processed{{"none", snap}};
  const ConfigRunResult res = run_config(snap, cfg, processed);
  CHECK(!res.ok);
  CHECK(res.error.find("none+MOS_NISQA:4.999") != std::string::npos);
}

TEST_CASE("run_config: MCD term is active exactly for denoised lineages") {
  const CorpusSnapshot raw = scored_snapshot(snr_ladder(12), false);
  CorpusSnapshot den = scored_snapshot(snr_ladder(12), true);
  den.name = "dfn";
  std::map<std::string, CorpusSnapshot> processed{{"none", raw}, {"dfn", den}};

  PipelineConfig cfg;
  cfg.enhancement = "dfn";
  cfg.filter_metric = MetricKind::MosNisqa;
  cfg.threshold = 0.0;
  const ConfigRunResult res = run_config(raw, cfg, processed);
  REQUIRE(res.ok);
  // same metric values as raw, so the only SD contribution is MCD/5
  const double mean_mcd = res.retained_agg.mean(MetricKind::Mcd);
  CHECK(res.scores.sd == doctest::Approx(mean_mcd / 5.0));

  // denoised lineage without MCD coverage is quarantined with the config name
  CorpusSnapshot no_mcd = scored_snapshot(snr_ladder(12), false);
  processed["dfn"] = no_mcd;
  const ConfigRunResult bad = run_config(raw, cfg, processed);
  CHECK(!bad.ok);
  CHECK(bad.error.find("MCD") != std::string::npos);
}

TEST_CASE("run_config: id or duration misalignment is caught") {
  const CorpusSnapshot raw = scored_snapshot(snr_ladder(8), false);
  CorpusSnapshot shuffled = raw;
  std::swap(shuffled.utterances[0], shuffled.utterances[1]);
  PipelineConfig cfg;
  cfg.enhancement = "x";
  cfg.filter_metric = MetricKind::MosNisqa;
  cfg.threshold = 0.0;
  const ConfigRunResult res = run_config(raw, cfg, {{"x", shuffled}});
  CHECK(!res.ok);
  CHECK(res.error.find("id mismatch") != std::string::npos);

  CorpusSnapshot stretched = raw;
  stretched.utterances[3].duration_s *= 1.5;
  const ConfigRunResult res2 = run_config(raw, cfg, {{"x", stretched}});
  CHECK(!res2.ok);
  CHECK(res2.error.find("duration") != std::string::npos);
}

TEST_CASE("run_config is independent of execution order") {
  const CorpusSnapshot snap = scored_snapshot(snr_ladder(20), false);
  std::map<std::string, CorpusSnapshot> processed{{"none", snap}};
  PipelineConfig a;
  a.enhancement = "none";
  a.filter_metric = MetricKind::MosNisqa;
  a.threshold = 2.5;
  PipelineConfig b = a;
  b.threshold = 3.2;
  const ConfigRunResult r1 = run_config(snap, a, processed);
  const ConfigRunResult r2 = run_config(snap, b, processed);
  const ConfigRunResult r1_again = run_config(snap, a, processed);
  CHECK(r1.scores.total == r1_again.scores.total);
  CHECK(r1.retained_count == r1_again.retained_count);
  CHECK(r2.scores.total != doctest::Approx(r1.scores.total));
}
