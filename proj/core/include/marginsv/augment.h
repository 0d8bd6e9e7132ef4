// core/include/marginsv/augment.h

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

#ifndef MARGINSV_AUGMENT_H_
#define MARGINSV_AUGMENT_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "marginsv/rng.h"
#include "marginsv/wav.h"

namespace marginsv {

// Half-open sample interval [start, start + length) within an utterance.
struct CropInterval {
  int64_t start = 0;
  int64_t length = 0;

  bool overlaps(const CropInterval& o) const {
    return start < o.start + o.length && o.start < start + length;
  }
};

// Two equally long crops of one utterance with disjoint source intervals.
struct ViewPair {
  Waveform view_a;
  Waveform view_b;
  std::string utterance_id;
  CropInterval interval_a;
  CropInterval interval_b;
};

// Draws two uniformly random non-overlapping crop_len_s crops. Rejection
// sampling with a bounded attempt count; on exhaustion (utterance barely
// long enough, so random placements almost always collide) falls back to
// placing the gap budget directly, which preserves uniformity over the
// feasible set. Throws when the utterance cannot hold two crops.
ViewPair sample_view_pair(const Waveform& utterance, double crop_len_s,
                          Rng& rng);

// signal + alpha * noise with alpha = (rms(signal)/rms(noise)) *
// 10^(-snr_db/20); the achieved ratio equals snr_db by construction. A noise
// clip of different length is looped/cropped to match before mixing.
Waveform mix_at_snr(const Waveform& signal, const Waveform& noise,
                    double snr_db);

// Full convolution with the impulse response, truncated to the signal
// length, then renormalized to the input's peak.
Waveform apply_reverb(const Waveform& signal, const Waveform& rir);

enum class NoiseClass { kSpeech = 0, kMusic = 1, kNoise = 2 };

std::string to_string(NoiseClass c);

struct AugmentPolicy {
  bool enabled = true;
  // Per-class SNR ranges in dB.
  double speech_snr_lo = 13.0, speech_snr_hi = 20.0;
  double music_snr_lo = 5.0, music_snr_hi = 15.0;
  double noise_snr_lo = 0.0, noise_snr_hi = 15.0;
  double reverb_prob = 0.5;

  std::pair<double, double> snr_range(NoiseClass c) const;
  void validate() const;
};

// Pre-rendered noise clips and impulse responses, generated once per run so
// per-step augmentation only mixes and convolves.
class NoiseBank {
 public:
  NoiseBank(uint64_t seed, double clip_len_s, int sample_rate = 16000,
            int clips_per_class = 6, int num_rirs = 8);

  const Waveform& random_clip(NoiseClass c, Rng& rng) const;
  const Waveform& random_rir(Rng& rng) const;

 private:
  std::array<std::vector<Waveform>, 3> clips_;
  std::vector<Waveform> rirs_;
};

// What augment_view did to a view, for tests and run logs.
struct AugmentOutcome {
  bool noise_applied = false;
  NoiseClass noise_class = NoiseClass::kNoise;
  double snr_db = 0.0;
  bool reverb_applied = false;
};

// One view through the policy: uniform noise-class choice, SNR drawn from
// the class range, mix at a random offset into the clip; then reverb with
// reverb_prob. Disabled policy passes the view through untouched.
Waveform augment_view(const Waveform& view, const AugmentPolicy& policy,
                      const NoiseBank& bank, Rng& rng,
                      AugmentOutcome* outcome = nullptr);

// Both views, independently augmented.
ViewPair augment(const ViewPair& pair, const AugmentPolicy& policy,
                 const NoiseBank& bank, Rng& rng);

}  // namespace marginsv

#endif  // MARGINSV_AUGMENT_H_
