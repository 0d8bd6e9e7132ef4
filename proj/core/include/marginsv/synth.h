// core/include/marginsv/synth.h

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

#ifndef MARGINSV_SYNTH_H_
#define MARGINSV_SYNTH_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "marginsv/rng.h"
#include "marginsv/wav.h"

namespace marginsv {

// Fixed resonance centers shared by all voices; per-speaker gains shape the
// spectral envelope around them.
inline constexpr std::array<double, 3> kResonanceCentersHz = {500.0, 1500.0,
                                                              2700.0};
inline constexpr std::array<double, 3> kResonanceWidthsHz = {150.0, 250.0,
                                                             350.0};

// Latent parameters of one synthetic speaker. Identity is fully determined
// by the fundamental and the three resonance gains.
struct SpeakerVoice {
  double f0_hz = 0.0;                          // in [90, 250]
  std::array<double, 3> resonance_gains{};     // each in [0.25, 1]
};

// Deterministic voice for speaker s of S. Fundamentals are stratified over
// [90, 250] Hz (one jittered slot per speaker) so no two speakers collide.
SpeakerVoice make_speaker_voice(int speaker_index, int num_speakers, Rng& rng);

// Harmonic source at the voice's fundamental with per-utterance random
// harmonic phases and slow amplitude modulation, plus white noise mixed at
// 25 dB SNR. Peak-normalized to 0.5.
Waveform synthesize_utterance(const SpeakerVoice& voice, double len_s,
                              Rng& rng, int sample_rate = 16000);

// Synthetic substitutes for real noise recordings.
Waveform synth_babble_clip(double len_s, Rng& rng, int sample_rate = 16000);
Waveform synth_music_clip(double len_s, Rng& rng, int sample_rate = 16000);
Waveform synth_noise_clip(double len_s, Rng& rng, int sample_rate = 16000);

// Room impulse response: exponentially decaying white noise. The decay is
// chosen so the envelope falls 60 dB over t60_s; the clip lasts t60_s.
Waveform synth_rir(double t60_s, Rng& rng, int sample_rate = 16000);

struct CorpusEntry {
  std::string utterance_id;
  std::string speaker_id;
  std::string relative_path;
};

struct CorpusConfig {
  int num_speakers = 40;
  int utterances_per_speaker = 4;
  double utterance_len_s = 4.0;  // must fit two non-overlapping 2 s crops
  uint64_t seed = 1;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

struct SyntheticCorpus {
  std::string root_dir;
  CorpusConfig config;
  std::vector<CorpusEntry> manifest;
};

// Renders the corpus under out_dir: audio/<id>.wav per utterance, a
// manifest.csv with header `utterance_id,speaker_id,relative_path`, and a
// corpus_meta.json recording the per-speaker latent parameters. Fully
// deterministic given config.seed; the manifest is written last so a failed
// run never leaves a partial one.
SyntheticCorpus generate_corpus(const CorpusConfig& cfg,
                                const std::string& out_dir);

// Reads manifest_name (default manifest.csv) under root_dir.
SyntheticCorpus load_corpus(const std::string& root_dir,
                            const std::string& manifest_name = "manifest.csv");

// Absolute path of an entry's audio file.
std::string corpus_audio_path(const SyntheticCorpus& corpus,
                              const CorpusEntry& entry);

}  // namespace marginsv

#endif  // MARGINSV_SYNTH_H_
