// core/include/marginsv/rng.h

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

#ifndef MARGINSV_RNG_H_
#define MARGINSV_RNG_H_

#include <cstdint>
#include <random>
#include <string>

namespace marginsv {

// Deterministic random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the uniform/normal mappings below are
// written out explicitly because the std::*_distribution algorithms are
// implementation-defined and would break byte-identical corpus generation
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n), n > 0. Unbiased via rejection.
  uint64_t uniform_index(uint64_t n);

  // Standard normal via Box-Muller (no cached spare, keeps state minimal).
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

  // Serialized engine state; round-trips bit-exactly.
  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
};

// Stream derivation: maps (seed, lane...) to an independent seed so workers
// and per-batch streams never share state. SplitMix64 finalizer.
uint64_t derive_seed(uint64_t seed, uint64_t a, uint64_t b = 0, uint64_t c = 0);

}  // namespace marginsv

#endif  // MARGINSV_RNG_H_
