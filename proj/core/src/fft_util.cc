// core/src/fft_util.cc

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

#include "fft_util.h"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <mutex>
#include <stdexcept>

namespace marginsv {
namespace fftutil {

namespace {

// FFTW plan creation is not thread-safe; execution on caller-owned arrays is.
// Plans are created with FFTW_UNALIGNED so new-array execution accepts any
// heap buffer.
std::mutex plan_mutex;

fftw_plan r2c_plan(size_t n) {
  static std::map<size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> in(n);
  std::vector<fftw_complex> out(n / 2 + 1);
  fftw_plan p = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                     out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw r2c plan failed");
  cache.emplace(n, p);
  return p;
}

fftw_plan c2r_plan(size_t n) {
  static std::map<size_t, fftw_plan> cache;
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<fftw_complex> in(n / 2 + 1);
  std::vector<double> out(n);
  fftw_plan p = fftw_plan_dft_c2r_1d(static_cast<int>(n), in.data(),
                                     out.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw std::runtime_error("fftw c2r plan failed");
  cache.emplace(n, p);
  return p;
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace

std::vector<std::complex<double>> rfft(const double* in, size_t n_in,
                                       size_t n_fft) {
  if (n_in > n_fft) throw std::invalid_argument("rfft: input longer than fft");
  std::vector<double> buf(n_fft, 0.0);
  std::memcpy(buf.data(), in, n_in * sizeof(double));
  std::vector<std::complex<double>> out(n_fft / 2 + 1);
  fftw_execute_dft_r2c(r2c_plan(n_fft), buf.data(),
                       reinterpret_cast<fftw_complex*>(out.data()));
  return out;
}

std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  if (a.empty() || b.empty())
    throw std::invalid_argument("fft_convolve: empty input");
  const size_t out_len = a.size() + b.size() - 1;
  const size_t n = next_pow2(out_len);

  auto fa = rfft(a.data(), a.size(), n);
  auto fb = rfft(b.data(), b.size(), n);
  for (size_t i = 0; i < fa.size(); ++i) fa[i] *= fb[i];

  std::vector<double> full(n);
  fftw_execute_dft_c2r(c2r_plan(n),
                       reinterpret_cast<fftw_complex*>(fa.data()),
                       full.data());
  full.resize(out_len);
  const double scale = 1.0 / static_cast<double>(n);
  for (double& v : full) v *= scale;
  return full;
}

}  // namespace fftutil
}  // namespace marginsv
