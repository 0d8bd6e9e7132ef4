// core/include/marginsv/losscheck.h

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

#ifndef MARGINSV_LOSSCHECK_H_
#define MARGINSV_LOSSCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

namespace marginsv {

// One verification row: analytic implementation against an independent
// slow computation (central finite differences or naive per-pair
// enumeration of the loss definition).
struct LossCheckResult {
  std::string name;
  double metric = 0.0;     // worst error observed
  double tolerance = 0.0;  // pass threshold
  bool pass = false;
};

// Full suite: finite-difference gradient checks for every variant and
// margin, enumeration equivalence, pair-count assertions, margin-zero
// reduction identities, and the fixed small-batch reference values.
// batch_size 0 sweeps N over {2, 4, 8}; any other value is used as-is so
// callers can demonstrate precondition errors (for example N = 1).
std::vector<LossCheckResult> run_loss_checks(uint64_t seed = 1,
                                             int grad_batches = 20,
                                             int batch_size = 0);

bool all_passed(const std::vector<LossCheckResult>& results);

}  // namespace marginsv

#endif  // MARGINSV_LOSSCHECK_H_
