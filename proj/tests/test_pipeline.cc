// tests/test_pipeline.cc

// Copyright 2026  marginsv authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "marginsv/augment.h"
#include "marginsv/rng.h"
#include "marginsv/synth.h"
#include "marginsv/wav.h"
#include "support/oracles.h"

using namespace marginsv;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("marginsv_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Fundamental frequency estimate via a direct autocorrelation scan over the
// plausible lag range, refined with parabolic interpolation. Independent of
// the synthesis code; used to check the speaker latent from audio alone.
double estimate_f0(const Waveform& w) {
  const int lo = 16000 / 260, hi = 16000 / 80;
  const size_t n = std::min<size_t>(w.samples.size(), 16000);
  double best = 0.0;
  int best_lag = lo;
  std::vector<double> r(hi + 2, 0.0);
  for (int lag = lo; lag <= hi + 1; ++lag) {
    double acc = 0.0;
    for (size_t i = 0; i + lag < n; ++i)
      acc += w.samples[i] * w.samples[i + lag];
    r[lag] = acc;
    if (lag <= hi && acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  double lag = best_lag;
  if (best_lag > lo && best_lag < hi) {
    const double a = r[best_lag - 1], b = r[best_lag], c = r[best_lag + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) lag += 0.5 * (a - c) / denom;
  }
  return 16000.0 / lag;
}

}  // namespace

TEST_CASE("speaker voices stay inside the published latent ranges") {
  Rng rng(17);
  const int s = 12;
  std::set<double> f0s;
  for (int i = 0; i < s; ++i) {
    auto v = make_speaker_voice(i, s, rng);
    CHECK(v.f0_hz >= 90.0);
    CHECK(v.f0_hz <= 250.0);
    for (double g : v.resonance_gains) {
      CHECK(g >= 0.25);
      CHECK(g <= 1.0);
    }
    f0s.insert(v.f0_hz);
  }
  // Stratified slots keep every voice distinct.
  CHECK(f0s.size() == s);
}

TEST_CASE("corpus generation is deterministic and self-describing") {
  auto dir_a = scratch("corpus_a");
  auto dir_b = scratch("corpus_b");
  CorpusConfig cfg;
  cfg.num_speakers = 2;
  cfg.utterances_per_speaker = 2;
  cfg.utterance_len_s = 4.0;
  cfg.seed = 7;
  auto a = generate_corpus(cfg, dir_a.string());
  auto b = generate_corpus(cfg, dir_b.string());
  REQUIRE(a.manifest.size() == 4);
  REQUIRE(b.manifest.size() == 4);
  CHECK(slurp(dir_a / "manifest.csv") == slurp(dir_b / "manifest.csv"));
  for (size_t i = 0; i < a.manifest.size(); ++i) {
    CHECK(a.manifest[i].utterance_id == b.manifest[i].utterance_id);
    CHECK(slurp(corpus_audio_path(a, a.manifest[i])) ==
          slurp(corpus_audio_path(b, b.manifest[i])));
  }
  // Round-trip through the manifest reader.
  auto loaded = load_corpus(dir_a.string());
  REQUIRE(loaded.manifest.size() == a.manifest.size());
  for (size_t i = 0; i < a.manifest.size(); ++i) {
    CHECK(loaded.manifest[i].utterance_id == a.manifest[i].utterance_id);
    CHECK(loaded.manifest[i].speaker_id == a.manifest[i].speaker_id);
    CHECK(loaded.manifest[i].relative_path == a.manifest[i].relative_path);
  }
  // Audio honors the advertised format.
  Waveform w = read_wav(corpus_audio_path(a, a.manifest[0]));
  CHECK(w.sample_rate == 16000);
  CHECK(w.samples.size() == static_cast<size_t>(4.0 * 16000));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("same-speaker utterances share their fundamental frequency") {
  auto dir = scratch("corpus_f0");
  CorpusConfig cfg;
  cfg.num_speakers = 6;
  cfg.utterances_per_speaker = 3;
  cfg.utterance_len_s = 4.0;
  cfg.seed = 3;
  auto corpus = generate_corpus(cfg, dir.string());
  std::map<std::string, std::vector<double>> by_speaker;
  for (const auto& e : corpus.manifest) {
    Waveform w = read_wav(corpus_audio_path(corpus, e));
    by_speaker[e.speaker_id].push_back(estimate_f0(w));
  }
  REQUIRE(by_speaker.size() == 6);
  std::vector<double> speaker_f0;
  for (const auto& [spk, f0s] : by_speaker) {
    for (double f : f0s)
      CHECK(std::abs(f - f0s.front()) < 1.0);  // same voice, same pitch
    speaker_f0.push_back(f0s.front());
  }
  std::sort(speaker_f0.begin(), speaker_f0.end());
  for (size_t i = 1; i < speaker_f0.size(); ++i)
    CHECK(speaker_f0[i] - speaker_f0[i - 1] > 2.0);  // distinct voices
  fs::remove_all(dir);
}

TEST_CASE("corpus preconditions are enforced") {
  CorpusConfig cfg;
  cfg.num_speakers = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.num_speakers = 2;
  cfg.utterances_per_speaker = 1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.utterances_per_speaker = 2;
  cfg.utterance_len_s = 3.9;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("a 4 s utterance admits exactly one disjoint crop placement") {
  Waveform w;
  w.samples.assign(4 * 16000, 0.1);
  Rng rng(5);
  for (int it = 0; it < 50; ++it) {
    auto pair = sample_view_pair(w, 2.0, rng);
    const auto lo = std::min(pair.interval_a.start, pair.interval_b.start);
    const auto hi = std::max(pair.interval_a.start, pair.interval_b.start);
    CHECK(lo == 0);
    CHECK(hi == 2 * 16000);
    CHECK(pair.interval_a.length == 2 * 16000);
    CHECK(pair.interval_b.length == 2 * 16000);
    CHECK(pair.view_a.samples.size() == static_cast<size_t>(2 * 16000));
    CHECK(pair.view_b.samples.size() == static_cast<size_t>(2 * 16000));
  }
}

TEST_CASE("too-short utterances are rejected") {
  Waveform w;
  w.samples.assign(static_cast<size_t>(3.9 * 16000), 0.1);
  Rng rng(5);
  CHECK_THROWS_AS(sample_view_pair(w, 2.0, rng), std::invalid_argument);
}

TEST_CASE("view intervals are always disjoint and in bounds") {
  Waveform w;
  w.samples.assign(10 * 16000, 0.1);
  Rng rng(6);
  for (int it = 0; it < 1000; ++it) {
    auto pair = sample_view_pair(w, 2.0, rng);
    CHECK_FALSE(pair.interval_a.overlaps(pair.interval_b));
    for (const auto& iv : {pair.interval_a, pair.interval_b}) {
      CHECK(iv.start >= 0);
      CHECK(iv.start + iv.length <= static_cast<int64_t>(w.samples.size()));
      CHECK(iv.length == 2 * 16000);
    }
  }
}

TEST_CASE("crops copy the underlying samples verbatim") {
  Waveform w;
  w.samples.resize(8 * 16000);
  for (size_t i = 0; i < w.samples.size(); ++i)
    w.samples[i] = static_cast<double>(i % 997) / 997.0;
  Rng rng(9);
  auto pair = sample_view_pair(w, 2.0, rng);
  for (int64_t i = 0; i < pair.interval_a.length; ++i)
    CHECK(pair.view_a.samples[i] == w.samples[pair.interval_a.start + i]);
}

TEST_CASE("mix_at_snr hits the requested ratio to 1e-9 dB") {
  Rng rng(12);
  for (double snr : {13.0, 17.5, 20.0, 5.0, 15.0, 0.0, 7.3}) {
    Waveform sig, noise;
    sig.samples.resize(16000);
    noise.samples.resize(16000);
    for (auto& s : sig.samples) s = 0.4 * rng.normal();
    for (auto& s : noise.samples) s = 0.2 * rng.normal();
    Waveform out = mix_at_snr(sig, noise, snr);
    std::vector<double> added(out.samples.size());
    for (size_t i = 0; i < added.size(); ++i)
      added[i] = out.samples[i] - sig.samples[i];
    CHECK(std::abs(oracles::measured_snr_db(sig.samples, added) - snr) <
          1e-9);
  }
}

TEST_CASE("mix_at_snr scalar examples") {
  Waveform sig, noise;
  sig.samples.assign(8, 1.0);
  for (size_t i = 0; i < sig.samples.size(); i += 2) sig.samples[i] = -1.0;
  noise.samples.assign(8, 0.5);
  // rms(sig) = 1, rms(noise) = 0.5, snr = 20 dB: alpha = 2 * 10^-1 = 0.2.
  Waveform out = mix_at_snr(sig, noise, 20.0);
  for (size_t i = 0; i < out.samples.size(); ++i)
    CHECK(out.samples[i] - sig.samples[i] ==
          doctest::Approx(0.2 * noise.samples[i]).epsilon(1e-12));
  // Equal RMS at 0 dB: alpha = 1.
  noise.samples.assign(8, 1.0);
  out = mix_at_snr(sig, noise, 0.0);
  for (size_t i = 0; i < out.samples.size(); ++i)
    CHECK(out.samples[i] - sig.samples[i] ==
          doctest::Approx(noise.samples[i]).epsilon(1e-12));
  Waveform silent;
  silent.samples.assign(8, 0.0);
  CHECK_THROWS_AS(mix_at_snr(sig, silent, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(mix_at_snr(silent, noise, 10.0), std::invalid_argument);
}

TEST_CASE("reverb with a unit impulse is the identity") {
  Waveform sig = [] {
    Waveform w;
    Rng rng(31);
    w.samples.resize(16000);
    for (auto& s : w.samples) s = 0.5 * rng.normal();
    return w;
  }();
  Waveform delta;
  delta.samples.assign(1, 1.0);
  Waveform out = apply_reverb(sig, delta);
  REQUIRE(out.samples.size() == sig.samples.size());
  for (size_t i = 0; i < out.samples.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(sig.samples[i]).epsilon(1e-12));
}

TEST_CASE("reverb matches naive convolution after truncation and renorm") {
  Rng rng(32);
  Waveform sig, rir;
  sig.samples.resize(8000);
  for (auto& s : sig.samples) s = 0.5 * rng.normal();
  rir = synth_rir(0.3, rng);  // 0.3 s decay = 4800 taps
  REQUIRE(rir.samples.size() <= sig.samples.size());
  Waveform out = apply_reverb(sig, rir);

  auto full = oracles::naive_convolve(sig.samples, rir.samples);
  full.resize(sig.samples.size());
  double in_peak = 0.0, conv_peak = 0.0;
  for (double s : sig.samples) in_peak = std::max(in_peak, std::abs(s));
  for (double s : full) conv_peak = std::max(conv_peak, std::abs(s));
  const double scale = in_peak / conv_peak;
  REQUIRE(out.samples.size() == full.size());
  for (size_t i = 0; i < full.size(); ++i)
    CHECK(out.samples[i] == doctest::Approx(full[i] * scale).epsilon(1e-6));
  CHECK_THROWS_AS(apply_reverb(sig, Waveform{}), std::invalid_argument);
}

TEST_CASE("augmentation honors per-class SNR ranges") {
  AugmentPolicy policy;
  policy.reverb_prob = 0.0;  // keep the additive decomposition measurable
  NoiseBank bank(77, 2.0);
  Rng rng(78);
  Waveform view;
  view.samples.resize(2 * 16000);
  for (auto& s : view.samples) s = 0.4 * std::sin(0.01 * s) + 0.3;
  {
    Rng vr(79);
    for (auto& s : view.samples) s = 0.4 * vr.normal();
  }
  int seen[3] = {0, 0, 0};
  for (int it = 0; it < 600; ++it) {
    AugmentOutcome outcome;
    Waveform out = augment_view(view, policy, bank, rng, &outcome);
    REQUIRE(outcome.noise_applied);
    CHECK_FALSE(outcome.reverb_applied);
    std::vector<double> added(out.samples.size());
    for (size_t i = 0; i < added.size(); ++i)
      added[i] = out.samples[i] - view.samples[i];
    const double snr = oracles::measured_snr_db(view.samples, added);
    CHECK(std::abs(snr - outcome.snr_db) < 1e-9);
    const auto [lo, hi] = policy.snr_range(outcome.noise_class);
    CHECK(snr >= lo - 1e-9);
    CHECK(snr <= hi + 1e-9);
    seen[static_cast<int>(outcome.noise_class)]++;
  }
  // All three classes appear under uniform selection.
  CHECK(seen[0] > 0);
  CHECK(seen[1] > 0);
  CHECK(seen[2] > 0);
  const auto speech = policy.snr_range(NoiseClass::kSpeech);
  CHECK(speech.first == 13.0);
  CHECK(speech.second == 20.0);
  const auto music = policy.snr_range(NoiseClass::kMusic);
  CHECK(music.first == 5.0);
  CHECK(music.second == 15.0);
  const auto noise = policy.snr_range(NoiseClass::kNoise);
  CHECK(noise.first == 0.0);
  CHECK(noise.second == 15.0);
}

TEST_CASE("disabled augmentation is the identity") {
  AugmentPolicy policy;
  policy.enabled = false;
  NoiseBank bank(91, 2.0);
  Rng rng(92);
  Waveform view;
  view.samples.resize(2 * 16000);
  Rng vr(93);
  for (auto& s : view.samples) s = 0.3 * vr.normal();
  ViewPair pair;
  pair.view_a = view;
  pair.view_b = view;
  auto out = augment(pair, policy, bank, rng);
  CHECK(out.view_a.samples == view.samples);
  CHECK(out.view_b.samples == view.samples);
}

TEST_CASE("augmentation is deterministic under a fixed rng") {
  AugmentPolicy policy;
  NoiseBank bank(101, 2.0);
  Waveform view;
  view.samples.resize(2 * 16000);
  Rng vr(102);
  for (auto& s : view.samples) s = 0.3 * vr.normal();
  Rng r1(555), r2(555);
  Waveform a = augment_view(view, policy, bank, r1);
  Waveform b = augment_view(view, policy, bank, r2);
  CHECK(a.samples == b.samples);
}

TEST_CASE("noise banks with one seed produce identical clips") {
  NoiseBank a(7, 2.0), b(7, 2.0);
  Rng r1(1), r2(1);
  for (int it = 0; it < 12; ++it) {
    const auto c = static_cast<NoiseClass>(it % 3);
    CHECK(a.random_clip(c, r1).samples == b.random_clip(c, r2).samples);
  }
  Rng r3(2), r4(2);
  CHECK(a.random_rir(r3).samples == b.random_rir(r4).samples);
}

TEST_CASE("policy validation rejects malformed ranges") {
  AugmentPolicy p;
  p.speech_snr_lo = 21.0;  // inverted
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = AugmentPolicy{};
  p.reverb_prob = 1.5;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
