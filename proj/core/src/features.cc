// core/src/features.cc

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

#include "marginsv/features.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>

#include "fft_util.h"

namespace marginsv {

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

MelFilterbank make_mel_filterbank(const FeatureConfig& cfg, int sample_rate) {
  const int num_bins = cfg.fft_size / 2 + 1;
  const int nb = cfg.num_mel_bands;
  const double mel_lo = hz_to_mel(cfg.mel_low_hz);
  const double mel_hi = hz_to_mel(cfg.mel_high_hz);

  std::vector<double> edges_hz(nb + 2);
  for (int i = 0; i < nb + 2; ++i) {
    const double mel = mel_lo + (mel_hi - mel_lo) * i / (nb + 1);
    edges_hz[i] = mel_to_hz(mel);
  }

  MelFilterbank fb;
  fb.weights = Eigen::MatrixXd::Zero(nb, num_bins);
  fb.centers_hz.resize(nb);
  for (int b = 0; b < nb; ++b) {
    const double left = edges_hz[b];
    const double center = edges_hz[b + 1];
    const double right = edges_hz[b + 2];
    fb.centers_hz[b] = center;
    for (int k = 0; k < num_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / cfg.fft_size;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb.weights(b, k) = w;
    }
  }
  return fb;
}

std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              double window_len_s,
                                              double hop_s) {
  if (hop_s <= 0.0 || window_len_s < hop_s)
    throw std::invalid_argument("frame_signal: need window_len >= hop > 0");
  if (w.sample_rate <= 0)
    throw std::invalid_argument("frame_signal: sample rate must be positive");

  const size_t win = static_cast<size_t>(std::lround(window_len_s * w.sample_rate));
  const size_t hop = static_cast<size_t>(std::lround(hop_s * w.sample_rate));
  const size_t len = w.samples.size();
  if (len < win)
    throw std::invalid_argument(
        "frame_signal: waveform too short (" + std::to_string(len) +
        " samples < one " + std::to_string(win) + "-sample window)");

  const size_t num_frames = (len - win) / hop + 1;

  // Symmetric Hamming window.
  std::vector<double> window(win);
  for (size_t n = 0; n < win; ++n) {
    window[n] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (win - 1));
  }

  std::vector<std::vector<double>> frames(num_frames);
  for (size_t t = 0; t < num_frames; ++t) {
    frames[t].resize(win);
    const double* src = w.samples.data() + t * hop;
    for (size_t n = 0; n < win; ++n) frames[t][n] = src[n] * window[n];
  }
  return frames;
}

FeatureMatrix log_mel(const std::vector<std::vector<double>>& frames,
                      const FeatureConfig& cfg, int sample_rate) {
  if (frames.empty()) throw std::invalid_argument("log_mel: no frames");

  const MelFilterbank fb = make_mel_filterbank(cfg, sample_rate);
  const int num_bins = cfg.fft_size / 2 + 1;

  FeatureMatrix out;
  out.frame_shift = cfg.hop_s;
  out.values.resize(static_cast<Eigen::Index>(frames.size()),
                    cfg.num_mel_bands);

  Eigen::VectorXd power(num_bins);
  for (size_t t = 0; t < frames.size(); ++t) {
    const auto spec =
        fftutil::rfft(frames[t].data(), frames[t].size(), cfg.fft_size);
    for (int k = 0; k < num_bins; ++k) power(k) = std::norm(spec[k]);
    Eigen::VectorXd energies = fb.weights * power;
    for (int b = 0; b < cfg.num_mel_bands; ++b) {
      out.values(static_cast<Eigen::Index>(t), b) =
          std::log(energies(b) + cfg.log_floor);
    }
  }
  return out;
}

FeatureMatrix instance_normalize(const FeatureMatrix& f) {
  if (f.num_frames() < 1)
    throw std::invalid_argument("instance_normalize: empty feature matrix");

  const double t = static_cast<double>(f.num_frames());
  FeatureMatrix out = f;
  for (Eigen::Index b = 0; b < f.num_bands(); ++b) {
    const double mean = f.values.col(b).mean();
    const double var =
        (f.values.col(b).array() - mean).square().sum() / t;
    const double scale = 1.0 / std::sqrt(var + 1e-5);
    out.values.col(b) = (f.values.col(b).array() - mean) * scale;
  }
  out.normalized = true;
  return out;
}

FeatureMatrix extract_features(const Waveform& w, const FeatureConfig& cfg) {
  auto frames = frame_signal(w, cfg.window_len_s, cfg.hop_s);
  return instance_normalize(log_mel(frames, cfg, w.sample_rate));
}

void write_feature_csv(const std::string& path, const FeatureMatrix& f) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (Eigen::Index t = 0; t < f.num_frames(); ++t) {
    for (Eigen::Index b = 0; b < f.num_bands(); ++b) {
      if (b) out << ',';
      out << f.values(t, b);
    }
    out << '\n';
  }
}

}  // namespace marginsv
