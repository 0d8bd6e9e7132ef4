// core/src/synth.cc

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

#include "marginsv/synth.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace marginsv {

namespace {

constexpr double kF0LowHz = 90.0;
constexpr double kF0HighHz = 250.0;
constexpr double kUtteranceNoiseSnrDb = 25.0;

// RNG lanes for per-speaker / per-utterance stream derivation.
constexpr uint64_t kSpeakerLane = 0x5eed0001;
constexpr uint64_t kUtteranceLane = 0x5eed0002;

double resonance_envelope(double f_hz, const std::array<double, 3>& gains) {
  double env = 0.05;  // floor keeps every harmonic audible
  for (size_t j = 0; j < gains.size(); ++j) {
    const double d = (f_hz - kResonanceCentersHz[j]) / kResonanceWidthsHz[j];
    env += gains[j] * std::exp(-d * d);
  }
  return env;
}

// Sum of harmonics of f0 with the given per-harmonic gains and random
// initial phases. One complex phasor per harmonic; no per-sample sin calls.
std::vector<double> render_harmonics(double f0_hz, double len_s,
                                     int sample_rate, double gain_at_hz_floor,
                                     const std::array<double, 3>& gains,
                                     Rng& rng) {
  const auto n = static_cast<size_t>(std::llround(len_s * sample_rate));
  const int num_harmonics =
      std::max(1, static_cast<int>(std::floor(sample_rate / 2.0 / f0_hz)));

  std::vector<std::complex<double>> phasor(num_harmonics);
  std::vector<std::complex<double>> rot(num_harmonics);
  std::vector<double> amp(num_harmonics);
  for (int k = 0; k < num_harmonics; ++k) {
    const double f = (k + 1) * f0_hz;
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    phasor[k] = std::polar(1.0, phi);
    rot[k] = std::polar(1.0, 2.0 * std::numbers::pi * f / sample_rate);
    amp[k] = std::max(resonance_envelope(f, gains), gain_at_hz_floor) /
             std::sqrt(k + 1.0);
  }

  std::vector<double> out(n);
  for (size_t t = 0; t < n; ++t) {
    double s = 0.0;
    for (int k = 0; k < num_harmonics; ++k) {
      s += amp[k] * phasor[k].real();
      phasor[k] *= rot[k];
    }
    out[t] = s;
  }
  return out;
}

void scale_to_rms(std::vector<double>* samples, double target_rms) {
  double e = 0.0;
  for (double s : *samples) e += s * s;
  const double r = std::sqrt(e / samples->size());
  if (r <= 0.0) return;
  const double g = target_rms / r;
  for (double& s : *samples) s *= g;
}

void apply_amplitude_modulation(std::vector<double>* samples, int sample_rate,
                                double rate_hz, double depth, double phase) {
  const double w = 2.0 * std::numbers::pi * rate_hz / sample_rate;
  for (size_t t = 0; t < samples->size(); ++t)
    (*samples)[t] *= 1.0 + depth * std::sin(w * t + phase);
}

std::string speaker_name(int s) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "spk%03d", s);
  return buf;
}

std::string utterance_name(int s, int u) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "spk%03d_utt%02d", s, u);
  return buf;
}

}  // namespace

SpeakerVoice make_speaker_voice(int speaker_index, int num_speakers,
                                Rng& rng) {
  if (num_speakers < 1 || speaker_index < 0 ||
      speaker_index >= num_speakers)
    throw std::invalid_argument("make_speaker_voice: bad speaker index");
  // One slot of the [90, 250] range per speaker, jittered inside the middle
  // 60% of the slot so adjacent fundamentals never touch.
  const double slot = (kF0HighHz - kF0LowHz) / num_speakers;
  SpeakerVoice v;
  v.f0_hz = kF0LowHz + (speaker_index + 0.2 + 0.6 * rng.uniform()) * slot;
  for (auto& g : v.resonance_gains) g = rng.uniform(0.25, 1.0);
  return v;
}

Waveform synthesize_utterance(const SpeakerVoice& voice, double len_s,
                              Rng& rng, int sample_rate) {
  if (len_s <= 0.0) throw std::invalid_argument("synthesize: bad length");
  std::vector<double> s = render_harmonics(voice.f0_hz, len_s, sample_rate,
                                           0.0, voice.resonance_gains, rng);
  apply_amplitude_modulation(&s, sample_rate, rng.uniform(2.0, 5.0),
                             rng.uniform(0.1, 0.3),
                             rng.uniform(0.0, 2.0 * std::numbers::pi));
  scale_to_rms(&s, 0.1);

  // White noise at a fixed 25 dB SNR below the harmonic part.
  const double noise_rms = 0.1 * std::pow(10.0, -kUtteranceNoiseSnrDb / 20.0);
  for (double& x : s) x += noise_rms * rng.normal();

  Waveform w{std::move(s), sample_rate};
  const double p = peak(w);
  if (p > 0.0)
    for (double& x : w.samples) x *= 0.5 / p;
  return w;
}

Waveform synth_babble_clip(double len_s, Rng& rng, int sample_rate) {
  const auto n = static_cast<size_t>(std::llround(len_s * sample_rate));
  std::vector<double> sum(n, 0.0);
  for (int v = 0; v < 3; ++v) {
    SpeakerVoice voice;
    voice.f0_hz = rng.uniform(kF0LowHz, kF0HighHz);
    for (auto& g : voice.resonance_gains) g = rng.uniform(0.25, 1.0);
    std::vector<double> s = render_harmonics(
        voice.f0_hz, len_s, sample_rate, 0.0, voice.resonance_gains, rng);
    // Fast, deep modulation gives the on/off character of background talk.
    apply_amplitude_modulation(&s, sample_rate, rng.uniform(3.0, 8.0), 0.8,
                               rng.uniform(0.0, 2.0 * std::numbers::pi));
    for (size_t t = 0; t < n; ++t) sum[t] += s[t];
  }
  scale_to_rms(&sum, 0.1);
  return {std::move(sum), sample_rate};
}

Waveform synth_music_clip(double len_s, Rng& rng, int sample_rate) {
  const auto n = static_cast<size_t>(std::llround(len_s * sample_rate));
  std::vector<double> sum(n, 0.0);
  // A chord of equal-tempered notes, each with its own slow level envelope.
  const int num_notes = 4;
  for (int v = 0; v < num_notes; ++v) {
    const int semitone = static_cast<int>(rng.uniform_index(37));  // 3 octaves
    const double f = 110.0 * std::pow(2.0, semitone / 12.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double env_rate = rng.uniform(0.1, 0.3);
    const double env_phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    std::complex<double> p = std::polar(1.0, phi);
    const std::complex<double> rot =
        std::polar(1.0, 2.0 * std::numbers::pi * f / sample_rate);
    const double w_env = 2.0 * std::numbers::pi * env_rate / sample_rate;
    for (size_t t = 0; t < n; ++t) {
      const double env = 0.5 * (1.0 + std::sin(w_env * t + env_phi));
      sum[t] += env * p.real();
      p *= rot;
    }
  }
  scale_to_rms(&sum, 0.1);
  return {std::move(sum), sample_rate};
}

Waveform synth_noise_clip(double len_s, Rng& rng, int sample_rate) {
  const auto n = static_cast<size_t>(std::llround(len_s * sample_rate));
  std::vector<double> s(n);
  if (rng.bernoulli(0.5)) {
    for (auto& x : s) x = rng.normal();
  } else {
    // Pink-ish spectrum via a three-pole lowpass cascade on white noise.
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    for (auto& x : s) {
      const double w = rng.normal();
      b0 = 0.99765 * b0 + w * 0.0990460;
      b1 = 0.96300 * b1 + w * 0.2965164;
      b2 = 0.57000 * b2 + w * 1.0526913;
      x = b0 + b1 + b2 + w * 0.1848;
    }
  }
  scale_to_rms(&s, 0.1);
  return {std::move(s), sample_rate};
}

Waveform synth_rir(double t60_s, Rng& rng, int sample_rate) {
  if (t60_s <= 0.0) throw std::invalid_argument("synth_rir: bad t60");
  const auto n =
      std::max<size_t>(1, static_cast<size_t>(std::llround(t60_s * sample_rate)));
  // 60 dB amplitude decay over t60: exp(-ln(1000) * t / t60).
  const double k = std::log(1000.0) / (t60_s * sample_rate);
  std::vector<double> h(n);
  for (size_t t = 0; t < n; ++t) h[t] = rng.normal() * std::exp(-k * t);
  double p = 0.0;
  for (double x : h) p = std::max(p, std::abs(x));
  if (p > 0.0)
    for (double& x : h) x /= p;
  return {std::move(h), sample_rate};
}

void CorpusConfig::validate() const {
  if (num_speakers < 2)
    throw std::invalid_argument("corpus: need at least 2 speakers");
  if (utterances_per_speaker < 2)
    throw std::invalid_argument("corpus: need at least 2 utterances/speaker");
  if (utterance_len_s < 4.0)
    throw std::invalid_argument(
        "corpus: utterance_len_s must be >= 4.0 so two non-overlapping "
        "2 s crops exist");
}

SyntheticCorpus generate_corpus(const CorpusConfig& cfg,
                                const std::string& out_dir) {
  cfg.validate();
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "audio", ec);
  if (ec)
    throw std::runtime_error("corpus: cannot create " + out_dir + ": " +
                             ec.message());

  SyntheticCorpus corpus;
  corpus.root_dir = out_dir;
  corpus.config = cfg;

  nlohmann::json meta;
  meta["seed"] = cfg.seed;
  meta["num_speakers"] = cfg.num_speakers;
  meta["utterances_per_speaker"] = cfg.utterances_per_speaker;
  meta["utterance_len_s"] = cfg.utterance_len_s;
  meta["sample_rate"] = 16000;
  meta["speakers"] = nlohmann::json::object();

  for (int s = 0; s < cfg.num_speakers; ++s) {
    Rng speaker_rng(derive_seed(cfg.seed, kSpeakerLane, s));
    const SpeakerVoice voice =
        make_speaker_voice(s, cfg.num_speakers, speaker_rng);
    meta["speakers"][speaker_name(s)] = {
        {"f0_hz", voice.f0_hz},
        {"resonance_gains", voice.resonance_gains}};

    for (int u = 0; u < cfg.utterances_per_speaker; ++u) {
      Rng utt_rng(derive_seed(cfg.seed, kUtteranceLane, s, u));
      const Waveform w =
          synthesize_utterance(voice, cfg.utterance_len_s, utt_rng);
      CorpusEntry entry;
      entry.utterance_id = utterance_name(s, u);
      entry.speaker_id = speaker_name(s);
      entry.relative_path = "audio/" + entry.utterance_id + ".wav";
      write_wav((fs::path(out_dir) / entry.relative_path).string(), w);
      corpus.manifest.push_back(std::move(entry));
    }
  }

  {
    std::ofstream mf(fs::path(out_dir) / "corpus_meta.json");
    mf << meta.dump(2) << "\n";
  }

  // Manifest last, in one shot, so interrupted runs leave no partial file.
  std::ostringstream rows;
  rows << "utterance_id,speaker_id,relative_path\n";
  for (const auto& e : corpus.manifest)
    rows << e.utterance_id << "," << e.speaker_id << "," << e.relative_path
         << "\n";
  std::ofstream out(fs::path(out_dir) / "manifest.csv",
                    std::ios::binary | std::ios::trunc);
  out << rows.str();
  if (!out)
    throw std::runtime_error("corpus: failed writing manifest.csv");
  return corpus;
}

SyntheticCorpus load_corpus(const std::string& root_dir,
                            const std::string& manifest_name) {
  namespace fs = std::filesystem;
  const fs::path path = fs::path(root_dir) / manifest_name;
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("corpus: cannot open " + path.string());

  SyntheticCorpus corpus;
  corpus.root_dir = root_dir;
  std::string line;
  if (!std::getline(in, line) ||
      line != "utterance_id,speaker_id,relative_path")
    throw std::runtime_error("corpus: bad manifest header in " +
                             path.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    CorpusEntry e;
    if (!std::getline(ss, e.utterance_id, ',') ||
        !std::getline(ss, e.speaker_id, ',') ||
        !std::getline(ss, e.relative_path))
      throw std::runtime_error("corpus: bad manifest row: " + line);
    corpus.manifest.push_back(std::move(e));
  }
  if (corpus.manifest.empty())
    throw std::runtime_error("corpus: empty manifest " + path.string());
  return corpus;
}

std::string corpus_audio_path(const SyntheticCorpus& corpus,
                              const CorpusEntry& entry) {
  return (std::filesystem::path(corpus.root_dir) / entry.relative_path)
      .string();
}

}  // namespace marginsv
