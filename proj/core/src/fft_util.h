// core/src/fft_util.h

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

#ifndef MARGINSV_CORE_SRC_FFT_UTIL_H_
#define MARGINSV_CORE_SRC_FFT_UTIL_H_

#include <complex>
#include <cstddef>
#include <vector>

namespace marginsv {
namespace fftutil {

// One-sided spectrum (n_fft/2 + 1 bins) of the input zero-padded to n_fft.
// Backed by FFTW with a per-size plan cache; safe to call concurrently.
std::vector<std::complex<double>> rfft(const double* in, size_t n_in,
                                       size_t n_fft);

// Full linear convolution, output length |a| + |b| - 1.
std::vector<double> fft_convolve(const std::vector<double>& a,
                                 const std::vector<double>& b);

}  // namespace fftutil
}  // namespace marginsv

#endif  // MARGINSV_CORE_SRC_FFT_UTIL_H_
