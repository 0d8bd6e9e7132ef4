// benchmarks/bench_main.cc

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

// Microbenchmarks for the hot paths of the training loop: feature
// extraction, the contrastive losses with gradients, reverb convolution,
// the encoder round trip, and the metric sweep.

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "marginsv/augment.h"
#include "marginsv/eval.h"
#include "marginsv/features.h"
#include "marginsv/losses.h"
#include "marginsv/model.h"
#include "marginsv/rng.h"
#include "marginsv/synth.h"

namespace {

using namespace marginsv;

Waveform two_second_clip(uint64_t seed) {
  Rng rng(seed);
  SpeakerVoice voice = make_speaker_voice(3, 8, rng);
  Waveform w = synthesize_utterance(voice, 2.0, rng);
  return w;
}

EmbeddingBatch random_batch(Eigen::Index n, Eigen::Index d, uint64_t seed) {
  Rng rng(seed);
  EmbeddingBatch m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_ExtractFeatures(benchmark::State& state) {
  const Waveform w = two_second_clip(1);
  const FeatureConfig cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_features(w, cfg));
  }
}
BENCHMARK(BM_ExtractFeatures);

void BM_LossForwardBackward(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const auto z = random_batch(n, 128, 2);
  const auto zp = random_batch(n, 128, 3);
  LossConfig cfg;
  cfg.variant = static_cast<LossVariant>(state.range(1));
  cfg.margin = cfg.variant == LossVariant::kSntXent ? 0.0 : 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_loss(z, zp, cfg, 100));
  }
}
BENCHMARK(BM_LossForwardBackward)
    ->ArgsProduct({{8, 32, 64},
                   {static_cast<int>(LossVariant::kSntXent),
                    static_cast<int>(LossVariant::kSntXentAm),
                    static_cast<int>(LossVariant::kSntXentAam)}});

void BM_ReverbConvolution(benchmark::State& state) {
  Rng rng(4);
  Waveform sig = two_second_clip(5);
  Waveform rir = synth_rir(0.3, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(apply_reverb(sig, rir));
  }
}
BENCHMARK(BM_ReverbConvolution);

void BM_EncoderForward(benchmark::State& state) {
  ModelConfig cfg;
  Model model(cfg);
  Rng rng(6);
  model.init(rng);
  const Waveform w = two_second_clip(7);
  const FeatureMatrix f = extract_features(w, FeatureConfig{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(model.forward(f));
  }
}
BENCHMARK(BM_EncoderForward);

void BM_DetMetricSweep(benchmark::State& state) {
  Rng rng(8);
  ScoreSet scores;
  for (int i = 0; i < state.range(0); ++i) {
    ScoredTrial t;
    t.trial.label = i % 2;
    t.trial.enroll_id = "e" + std::to_string(i);
    t.trial.test_id = "t" + std::to_string(i);
    t.score = rng.normal() + (t.trial.label ? 0.5 : 0.0);
    scores.scores.push_back(t);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_det_metrics(scores));
  }
}
BENCHMARK(BM_DetMetricSweep)->Arg(1000)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
