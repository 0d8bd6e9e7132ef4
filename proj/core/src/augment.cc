// core/src/augment.cc

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

#include "marginsv/augment.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "fft_util.h"
#include "marginsv/synth.h"

namespace marginsv {

namespace {

constexpr int kRejectionAttempts = 1000;
constexpr uint64_t kNoiseBankLane = 0x6a9b0001;
constexpr uint64_t kRirBankLane = 0x6a9b0002;

Waveform slice(const Waveform& w, int64_t start, int64_t length) {
  Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin() + start,
                     w.samples.begin() + start + length);
  return out;
}

}  // namespace

ViewPair sample_view_pair(const Waveform& utterance, double crop_len_s,
                          Rng& rng) {
  const auto crop =
      static_cast<int64_t>(std::llround(crop_len_s * utterance.sample_rate));
  const auto len = static_cast<int64_t>(utterance.samples.size());
  if (crop <= 0) throw std::invalid_argument("sample_view_pair: bad crop");
  if (len < 2 * crop)
    throw std::invalid_argument(
        "sample_view_pair: utterance too short for two non-overlapping "
        "crops");

  const int64_t max_start = len - crop;
  CropInterval a{0, crop}, b{0, crop};
  bool placed = false;
  for (int attempt = 0; attempt < kRejectionAttempts; ++attempt) {
    a.start = static_cast<int64_t>(rng.uniform_index(max_start + 1));
    b.start = static_cast<int64_t>(rng.uniform_index(max_start + 1));
    if (!a.overlaps(b)) {
      placed = true;
      break;
    }
  }
  if (!placed) {
    // Tight utterance: split the free slack between the two crops directly.
    // With s1 <= s2 feasible iff s2 >= s1 + crop, the pair (u1, u2 + crop)
    // for sorted u1 <= u2 in [0, slack] covers the feasible set uniformly.
    const int64_t slack = len - 2 * crop;
    int64_t u1 = static_cast<int64_t>(rng.uniform_index(slack + 1));
    int64_t u2 = static_cast<int64_t>(rng.uniform_index(slack + 1));
    if (u1 > u2) std::swap(u1, u2);
    a.start = u1;
    b.start = u2 + crop;
    if (rng.bernoulli(0.5)) std::swap(a, b);
  }

  ViewPair pair;
  pair.view_a = slice(utterance, a.start, crop);
  pair.view_b = slice(utterance, b.start, crop);
  pair.interval_a = a;
  pair.interval_b = b;
  return pair;
}

Waveform mix_at_snr(const Waveform& signal, const Waveform& noise,
                    double snr_db) {
  if (noise.samples.empty())
    throw std::invalid_argument("mix_at_snr: empty noise");
  if (signal.sample_rate != noise.sample_rate)
    throw std::invalid_argument("mix_at_snr: sample rate mismatch");

  // Loop or crop the noise to the signal length.
  const size_t n = signal.samples.size();
  Waveform matched;
  matched.sample_rate = noise.sample_rate;
  matched.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    matched.samples[i] = noise.samples[i % noise.samples.size()];

  const double rs = rms(signal);
  const double rn = rms(matched);
  if (rs <= 0.0) throw std::invalid_argument("mix_at_snr: zero-RMS signal");
  if (rn <= 0.0) throw std::invalid_argument("mix_at_snr: zero-RMS noise");

  const double alpha = (rs / rn) * std::pow(10.0, -snr_db / 20.0);
  Waveform out;
  out.sample_rate = signal.sample_rate;
  out.samples.resize(n);
  for (size_t i = 0; i < n; ++i)
    out.samples[i] = signal.samples[i] + alpha * matched.samples[i];
  return out;
}

Waveform apply_reverb(const Waveform& signal, const Waveform& rir) {
  if (rir.samples.empty())
    throw std::invalid_argument("apply_reverb: empty impulse response");
  if (rir.samples.size() > signal.samples.size())
    throw std::invalid_argument(
        "apply_reverb: impulse response longer than signal");
  if (signal.sample_rate != rir.sample_rate)
    throw std::invalid_argument("apply_reverb: sample rate mismatch");

  std::vector<double> conv =
      fftutil::fft_convolve(signal.samples, rir.samples);
  conv.resize(signal.samples.size());

  Waveform out{std::move(conv), signal.sample_rate};
  const double in_peak = peak(signal);
  const double out_peak = peak(out);
  if (out_peak > 0.0) {
    const double g = in_peak / out_peak;
    for (double& x : out.samples) x *= g;
  }
  return out;
}

std::string to_string(NoiseClass c) {
  switch (c) {
    case NoiseClass::kSpeech: return "speech";
    case NoiseClass::kMusic: return "music";
    case NoiseClass::kNoise: return "noise";
  }
  return "?";
}

std::pair<double, double> AugmentPolicy::snr_range(NoiseClass c) const {
  switch (c) {
    case NoiseClass::kSpeech: return {speech_snr_lo, speech_snr_hi};
    case NoiseClass::kMusic: return {music_snr_lo, music_snr_hi};
    case NoiseClass::kNoise: return {noise_snr_lo, noise_snr_hi};
  }
  throw std::logic_error("unknown noise class");
}

void AugmentPolicy::validate() const {
  if (speech_snr_lo > speech_snr_hi || music_snr_lo > music_snr_hi ||
      noise_snr_lo > noise_snr_hi)
    throw std::invalid_argument("augment: inverted SNR range");
  if (reverb_prob < 0.0 || reverb_prob > 1.0)
    throw std::invalid_argument("augment: reverb_prob outside [0, 1]");
}

NoiseBank::NoiseBank(uint64_t seed, double clip_len_s, int sample_rate,
                     int clips_per_class, int num_rirs) {
  if (clips_per_class < 1 || num_rirs < 1)
    throw std::invalid_argument("NoiseBank: need at least one clip and RIR");
  // Clips run one second longer than the views they will cover so the mixer
  // can start at a random offset.
  const double len = clip_len_s + 1.0;
  for (int c = 0; c < 3; ++c) {
    clips_[c].reserve(clips_per_class);
    for (int i = 0; i < clips_per_class; ++i) {
      Rng rng(derive_seed(seed, kNoiseBankLane, c, i));
      switch (static_cast<NoiseClass>(c)) {
        case NoiseClass::kSpeech:
          clips_[c].push_back(synth_babble_clip(len, rng, sample_rate));
          break;
        case NoiseClass::kMusic:
          clips_[c].push_back(synth_music_clip(len, rng, sample_rate));
          break;
        case NoiseClass::kNoise:
          clips_[c].push_back(synth_noise_clip(len, rng, sample_rate));
          break;
      }
    }
  }
  rirs_.reserve(num_rirs);
  for (int i = 0; i < num_rirs; ++i) {
    Rng rng(derive_seed(seed, kRirBankLane, i));
    const double t60 = 0.1 + (i + rng.uniform()) * 0.4 / num_rirs;
    rirs_.push_back(synth_rir(t60, rng, sample_rate));
  }
}

const Waveform& NoiseBank::random_clip(NoiseClass c, Rng& rng) const {
  const auto& v = clips_[static_cast<int>(c)];
  return v[rng.uniform_index(v.size())];
}

const Waveform& NoiseBank::random_rir(Rng& rng) const {
  return rirs_[rng.uniform_index(rirs_.size())];
}

Waveform augment_view(const Waveform& view, const AugmentPolicy& policy,
                      const NoiseBank& bank, Rng& rng,
                      AugmentOutcome* outcome) {
  if (outcome) *outcome = AugmentOutcome{};
  if (!policy.enabled) return view;

  const auto cls = static_cast<NoiseClass>(rng.uniform_index(3));
  const auto [lo, hi] = policy.snr_range(cls);
  const double snr_db = rng.uniform(lo, hi);

  const Waveform& clip = bank.random_clip(cls, rng);
  Waveform noise;
  if (clip.samples.size() > view.samples.size()) {
    const uint64_t max_off = clip.samples.size() - view.samples.size();
    const auto off = static_cast<int64_t>(rng.uniform_index(max_off + 1));
    noise.sample_rate = clip.sample_rate;
    noise.samples.assign(
        clip.samples.begin() + off,
        clip.samples.begin() + off + static_cast<int64_t>(view.samples.size()));
  } else {
    noise = clip;
  }

  Waveform out = mix_at_snr(view, noise, snr_db);
  if (outcome) {
    outcome->noise_applied = true;
    outcome->noise_class = cls;
    outcome->snr_db = snr_db;
  }

  if (rng.bernoulli(policy.reverb_prob)) {
    out = apply_reverb(out, bank.random_rir(rng));
    if (outcome) outcome->reverb_applied = true;
  }
  return out;
}

ViewPair augment(const ViewPair& pair, const AugmentPolicy& policy,
                 const NoiseBank& bank, Rng& rng) {
  ViewPair out = pair;
  out.view_a = augment_view(pair.view_a, policy, bank, rng);
  out.view_b = augment_view(pair.view_b, policy, bank, rng);
  return out;
}

}  // namespace marginsv
