// tests/test_features.cc

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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <vector>

#include "fft_util.h"
#include "marginsv/features.h"
#include "marginsv/rng.h"
#include "marginsv/wav.h"
#include "support/oracles.h"

using namespace marginsv;

namespace {

Waveform make_tone(double freq_hz, double len_s, double amp = 0.5,
                   int sr = 16000) {
  Waveform w;
  w.sample_rate = sr;
  const auto n = static_cast<size_t>(len_s * sr);
  w.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    w.samples[i] =
        amp * std::sin(2.0 * std::numbers::pi * freq_hz * i / sr);
  return w;
}

Waveform make_noise(size_t n, uint64_t seed, double amp = 0.3) {
  Waveform w;
  w.samples.resize(n);
  Rng rng(seed);
  for (auto& s : w.samples) s = amp * rng.normal();
  return w;
}

}  // namespace

TEST_CASE("framing count matches the floor formula") {
  // 32000 samples at 25 ms / 10 ms: floor((32000 - 400) / 160) + 1 = 198.
  Waveform w = make_noise(32000, 11);
  auto frames = frame_signal(w, 0.025, 0.010);
  CHECK(frames.size() == 198);
  CHECK(frames[0].size() == 400);

  w.samples.resize(400);
  CHECK(frame_signal(w, 0.025, 0.010).size() == 1);

  w.samples.resize(399);
  CHECK_THROWS_AS(frame_signal(w, 0.025, 0.010), std::invalid_argument);
}

TEST_CASE("framing count formula holds over random geometries") {
  Rng rng(202);
  for (int it = 0; it < 200; ++it) {
    const auto win = static_cast<int64_t>(80 + rng.uniform_index(600));
    const auto hop = static_cast<int64_t>(16 + rng.uniform_index(win - 15));
    const auto len = win + static_cast<int64_t>(rng.uniform_index(20000));
    Waveform w = make_noise(static_cast<size_t>(len), 300 + it);
    auto frames = frame_signal(w, win / 16000.0, hop / 16000.0);
    CHECK(static_cast<int64_t>(frames.size()) ==
          oracles::frame_count(len, win, hop));
    for (const auto& f : frames) CHECK(static_cast<int64_t>(f.size()) == win);
  }
}

TEST_CASE("frames carry the closed-form Hamming window") {
  Waveform w;
  w.samples.assign(400, 1.0);
  auto frames = frame_signal(w, 0.025, 0.010);
  REQUIRE(frames.size() == 1);
  for (size_t n = 0; n < 400; ++n) {
    const double ham =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / 399.0);
    CHECK(frames[0][n] == doctest::Approx(ham).epsilon(1e-12));
  }
}

TEST_CASE("rfft agrees with a direct DFT") {
  Rng rng(7);
  std::vector<double> x(400);
  for (auto& v : x) v = rng.normal();
  auto fast = fftutil::rfft(x.data(), x.size(), 512);
  auto slow = oracles::naive_rdft(x, 512);
  REQUIRE(fast.size() == slow.size());
  for (size_t k = 0; k < fast.size(); ++k) {
    CHECK(std::abs(fast[k] - slow[k]) < 1e-9);
  }
}

TEST_CASE("fft convolution agrees with the O(n^2) sum") {
  Rng rng(8);
  std::vector<double> a(777), b(123);
  for (auto& v : a) v = rng.normal();
  for (auto& v : b) v = rng.normal();
  auto fast = fftutil::fft_convolve(a, b);
  auto slow = oracles::naive_convolve(a, b);
  REQUIRE(fast.size() == slow.size());
  for (size_t i = 0; i < fast.size(); ++i)
    CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-9));
}

TEST_CASE("mel scale is the HTK formula") {
  for (double hz : {0.0, 100.0, 700.0, 1000.0, 4000.0, 8000.0}) {
    const double mel = 2595.0 * std::log10(1.0 + hz / 700.0);
    CHECK(hz_to_mel(hz) == doctest::Approx(mel).epsilon(1e-12));
    CHECK(mel_to_hz(hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-9));
  }
}

TEST_CASE("a pure tone at a filter center peaks in that band") {
  FeatureConfig cfg;
  auto fb = make_mel_filterbank(cfg, 16000);
  REQUIRE(static_cast<int>(fb.centers_hz.size()) == cfg.num_mel_bands);
  // Interior filters only: edge bands share energy with their neighbors.
  for (int k = 4; k < cfg.num_mel_bands - 4; k += 5) {
    Waveform tone = make_tone(fb.centers_hz[k], 0.5);
    auto f = log_mel(frame_signal(tone, 0.025, 0.010), cfg, 16000);
    Eigen::Index best;
    f.values.row(f.num_frames() / 2).maxCoeff(&best);
    CHECK(best == k);
  }
}

TEST_CASE("all-zero frames hit the log floor") {
  Waveform w;
  w.samples.assign(800, 0.0);
  FeatureConfig cfg;
  auto f = log_mel(frame_signal(w, 0.025, 0.010), cfg, 16000);
  for (Eigen::Index t = 0; t < f.num_frames(); ++t)
    for (Eigen::Index b = 0; b < f.num_bands(); ++b)
      CHECK(f.values(t, b) == doctest::Approx(std::log(1e-10)).epsilon(1e-12));
}

TEST_CASE("doubling amplitude adds log 4 to every log energy") {
  Waveform w = make_noise(3200, 21, 0.25);
  Waveform w2 = w;
  for (auto& s : w2.samples) s *= 2.0;
  FeatureConfig cfg;
  auto fa = log_mel(frame_signal(w, 0.025, 0.010), cfg, 16000);
  auto fb = log_mel(frame_signal(w2, 0.025, 0.010), cfg, 16000);
  for (Eigen::Index t = 0; t < fa.num_frames(); ++t)
    for (Eigen::Index b = 0; b < fa.num_bands(); ++b)
      CHECK(fb.values(t, b) - fa.values(t, b) ==
            doctest::Approx(std::log(4.0)).epsilon(1e-6));
}

TEST_CASE("log-mel shifts by one row when input is delayed one hop") {
  Waveform w = make_noise(4000, 31);
  Waveform delayed;
  delayed.sample_rate = w.sample_rate;
  delayed.samples.assign(160, 0.0);
  delayed.samples.insert(delayed.samples.end(), w.samples.begin(),
                         w.samples.end());
  FeatureConfig cfg;
  auto fa = log_mel(frame_signal(w, 0.025, 0.010), cfg, 16000);
  auto fb = log_mel(frame_signal(delayed, 0.025, 0.010), cfg, 16000);
  for (Eigen::Index t = 0; t + 1 < fa.num_frames(); ++t)
    for (Eigen::Index b = 0; b < fa.num_bands(); ++b)
      CHECK(fb.values(t + 1, b) ==
            doctest::Approx(fa.values(t, b)).epsilon(1e-6));
}

TEST_CASE("instance normalization: mean, variance, idempotence") {
  Waveform w = make_noise(16000, 41);
  const FeatureConfig cfg;
  const auto raw = log_mel(frame_signal(w, cfg.window_len_s, cfg.hop_s), cfg,
                           w.sample_rate);
  auto f = extract_features(w, cfg);
  CHECK(f.normalized);
  REQUIRE(f.values.rows() == raw.values.rows());
  const auto twice = instance_normalize(f);
  int healthy = 0;
  for (Eigen::Index b = 0; b < f.num_bands(); ++b) {
    const auto col = f.values.col(b);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / col.size();
    CHECK(std::abs(mean) < 1e-6);
    // The floor in 1/sqrt(var + 1e-5) shifts the output variance to
    // var/(var + 1e-5); the unit-variance claim therefore needs the raw
    // band variance comfortably above the floor.
    const double raw_mean = raw.values.col(b).mean();
    const double raw_var =
        (raw.values.col(b).array() - raw_mean).square().sum() / col.size();
    CHECK(var == doctest::Approx(raw_var / (raw_var + 1e-5)).epsilon(1e-10));
    if (raw_var >= 0.1) {
      CHECK(std::abs(var - 1.0) < 1e-4);
      ++healthy;
    }
    // A second pass only rescales by 1/sqrt(var' + 1e-5) with var' close
    // to 1, a relative change of ~5e-6 on bands clear of the floor.
    if (raw_var >= 0.5) {
      const double rel =
          (twice.values.col(b) - col).cwiseAbs().maxCoeff() /
          std::max(1.0, col.cwiseAbs().maxCoeff());
      CHECK(rel < 1e-5);
    }
  }
  CHECK(healthy > 20);
}

TEST_CASE("instance normalization edge rows") {
  FeatureMatrix f;
  f.values = Eigen::MatrixXd::Constant(6, 3, 2.5);
  auto z = instance_normalize(f);
  CHECK(z.values.cwiseAbs().maxCoeff() < 1e-9);

  FeatureMatrix two;
  two.values.resize(2, 1);
  two.values << 1.0, 3.0;
  auto n = instance_normalize(two);
  CHECK(n.values(0, 0) == doctest::Approx(-1.0).epsilon(1e-2));
  CHECK(n.values(1, 0) == doctest::Approx(1.0).epsilon(1e-2));
}

TEST_CASE("wav files round-trip at 16-bit resolution") {
  namespace fs = std::filesystem;
  const auto dir = fs::temp_directory_path() / "marginsv_test_wav";
  fs::create_directories(dir);
  Waveform w = make_noise(1234, 55, 0.8);
  const std::string path = (dir / "t.wav").string();
  write_wav(path, w);
  Waveform r = read_wav(path);
  REQUIRE(r.samples.size() == w.samples.size());
  CHECK(r.sample_rate == 16000);
  // Written at scale 32767 with rounding, read back at 32768: the
  // round trip lands within (|x| + 0.5) / 32768 of the clipped input.
  for (size_t i = 0; i < w.samples.size(); ++i) {
    const double x = std::clamp(w.samples[i], -1.0, 1.0);
    CHECK(std::abs(r.samples[i] - x) <= (std::abs(x) + 0.5) / 32768.0);
  }
  CHECK_THROWS(read_wav((dir / "missing.wav").string()));
  fs::remove_all(dir);
}
