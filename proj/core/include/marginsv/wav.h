// core/include/marginsv/wav.h

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

#ifndef MARGINSV_WAV_H_
#define MARGINSV_WAV_H_

#include <string>
#include <vector>

namespace marginsv {

// Mono audio at a fixed sample rate, amplitudes nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

double rms(const Waveform& w);
double peak(const Waveform& w);

// Reads a 16 kHz mono 16-bit PCM RIFF/WAVE file. Any other sample rate,
// channel count or sample format is rejected with a descriptive error.
Waveform read_wav(const std::string& path);

// Writes 16-bit PCM mono. Samples are clipped to [-1, 1] on conversion.
void write_wav(const std::string& path, const Waveform& w);

}  // namespace marginsv

#endif  // MARGINSV_WAV_H_
