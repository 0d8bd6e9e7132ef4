// core/src/wav.cc

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

#include "marginsv/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace marginsv {

namespace {

constexpr int kRequiredSampleRate = 16000;

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) | (uint32_t(b[3]) << 24);
}

uint16_t read_u16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return b[0] | (b[1] << 8);
}

void write_u32(std::ostream& out, uint32_t v) {
  char b[4] = {char(v & 0xff), char((v >> 8) & 0xff), char((v >> 16) & 0xff),
               char((v >> 24) & 0xff)};
  out.write(b, 4);
}

void write_u16(std::ostream& out, uint16_t v) {
  char b[2] = {char(v & 0xff), char((v >> 8) & 0xff)};
  out.write(b, 2);
}

}  // namespace

double rms(const Waveform& w) {
  if (w.samples.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return std::sqrt(acc / w.samples.size());
}

double peak(const Waveform& w) {
  double p = 0.0;
  for (double s : w.samples) p = std::max(p, std::abs(s));
  return p;
}

Waveform read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open WAV file: " + path);

  char tag[4];
  in.read(tag, 4);
  if (!in || std::strncmp(tag, "RIFF", 4) != 0)
    throw std::runtime_error(path + ": not a RIFF file");
  read_u32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::strncmp(tag, "WAVE", 4) != 0)
    throw std::runtime_error(path + ": not a WAVE file");

  bool have_fmt = false;
  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t sample_rate = 0;
  Waveform w;

  while (in.read(tag, 4)) {
    uint32_t chunk_size = read_u32(in);
    if (std::strncmp(tag, "fmt ", 4) == 0) {
      format = read_u16(in);
      channels = read_u16(in);
      sample_rate = read_u32(in);
      read_u32(in);  // byte rate
      read_u16(in);  // block align
      bits = read_u16(in);
      if (chunk_size > 16) in.ignore(chunk_size - 16);
      have_fmt = true;
    } else if (std::strncmp(tag, "data", 4) == 0) {
      if (!have_fmt) throw std::runtime_error(path + ": data before fmt chunk");
      if (format != 1)
        throw std::runtime_error(path + ": only PCM (format 1) is supported");
      if (channels != 1)
        throw std::runtime_error(path + ": expected mono, got " +
                                 std::to_string(channels) + " channels");
      if (bits != 16)
        throw std::runtime_error(path + ": expected 16-bit samples, got " +
                                 std::to_string(bits) + "-bit");
      if (sample_rate != kRequiredSampleRate)
        throw std::runtime_error(path + ": expected 16000 Hz, got " +
                                 std::to_string(sample_rate) + " Hz");
      const size_t n = chunk_size / 2;
      w.samples.resize(n);
      w.sample_rate = static_cast<int>(sample_rate);
      for (size_t i = 0; i < n; ++i) {
        unsigned char b[2];
        in.read(reinterpret_cast<char*>(b), 2);
        int16_t v = static_cast<int16_t>(b[0] | (b[1] << 8));
        w.samples[i] = v / 32768.0;
      }
      if (!in) throw std::runtime_error(path + ": truncated data chunk");
      return w;
    } else {
      // Skip unknown chunks (LIST, fact, ...), padded to even size.
      in.ignore(chunk_size + (chunk_size & 1));
    }
  }
  throw std::runtime_error(path + ": no data chunk found");
}

void write_wav(const std::string& path, const Waveform& w) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write WAV file: " + path);

  const uint32_t n = static_cast<uint32_t>(w.samples.size());
  const uint32_t data_bytes = n * 2;
  out.write("RIFF", 4);
  write_u32(out, 36 + data_bytes);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  write_u32(out, 16);
  write_u16(out, 1);  // PCM
  write_u16(out, 1);  // mono
  write_u32(out, w.sample_rate);
  write_u32(out, w.sample_rate * 2);
  write_u16(out, 2);
  write_u16(out, 16);
  out.write("data", 4);
  write_u32(out, data_bytes);
  for (double s : w.samples) {
    double v = std::lround(std::clamp(s, -1.0, 1.0) * 32767.0);
    int16_t q = static_cast<int16_t>(v);
    char b[2] = {char(q & 0xff), char((q >> 8) & 0xff)};
    out.write(b, 2);
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

}  // namespace marginsv
