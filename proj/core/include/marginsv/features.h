// core/include/marginsv/features.h

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

#ifndef MARGINSV_FEATURES_H_
#define MARGINSV_FEATURES_H_

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "marginsv/wav.h"

namespace marginsv {

// T x F log-mel feature matrix (rows are frames).
struct FeatureMatrix {
  Eigen::MatrixXd values;
  double frame_shift = 0.010;
  bool normalized = false;

  Eigen::Index num_frames() const { return values.rows(); }
  Eigen::Index num_bands() const { return values.cols(); }
};

struct FeatureConfig {
  double window_len_s = 0.025;  // Hamming window length
  double hop_s = 0.010;
  int num_mel_bands = 40;
  int fft_size = 512;           // zero-padded real FFT
  double mel_low_hz = 0.0;
  double mel_high_hz = 8000.0;
  double log_floor = 1e-10;     // energy floor inside the log
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank over the one-sided FFT bins (peak 1, HTK style).
// weights is num_bands x (fft_size/2 + 1); centers_hz are the filter peaks.
struct MelFilterbank {
  Eigen::MatrixXd weights;
  std::vector<double> centers_hz;
};
MelFilterbank make_mel_filterbank(const FeatureConfig& cfg, int sample_rate);

// Slices the waveform into overlapping frames and applies a Hamming window.
// Frame count is floor((L - W) / H) + 1. Throws std::invalid_argument when
// the waveform is shorter than one window.
std::vector<std::vector<double>> frame_signal(const Waveform& w,
                                              double window_len_s,
                                              double hop_s);

// Windowed frames -> T x 40 log-mel matrix: magnitude-squared spectrum via a
// zero-padded real FFT, triangular mel integration, natural log with floor.
FeatureMatrix log_mel(const std::vector<std::vector<double>>& frames,
                      const FeatureConfig& cfg, int sample_rate);

// Per-coefficient standardization over time: (x - mean) / sqrt(var + 1e-5),
// variance taken with the 1/T denominator.
FeatureMatrix instance_normalize(const FeatureMatrix& f);

// Full pipeline: frame + log-mel + instance norm.
FeatureMatrix extract_features(const Waveform& w, const FeatureConfig& cfg);

// Debug dump, one CSV row per frame.
void write_feature_csv(const std::string& path, const FeatureMatrix& f);

}  // namespace marginsv

#endif  // MARGINSV_FEATURES_H_
