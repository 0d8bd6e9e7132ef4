// core/include/marginsv/checkpoint.h

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

#ifndef MARGINSV_CHECKPOINT_H_
#define MARGINSV_CHECKPOINT_H_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "marginsv/model.h"
#include "marginsv/optimizer.h"

namespace marginsv {

// Named-tensor container backing the training state file. On disk:
// little-endian, magic "MCKP", u32 version, u64 config hash, u64 tensor
// count, then per tensor u32 name length, name bytes, u32 rank, u64 dims,
// f64 data (row-major). Entries are kept name-sorted so identical state
// serializes to identical bytes.
struct Checkpoint {
  static constexpr uint32_t kVersion = 1;

  struct Tensor {
    std::vector<uint64_t> dims;
    std::vector<double> data;
  };

  uint64_t config_hash = 0;
  std::map<std::string, Tensor> tensors;

  bool has(const std::string& name) const { return tensors.count(name) > 0; }

  void set_scalar(const std::string& name, double v);
  double scalar(const std::string& name) const;  // throws when absent

  void set_matrix(const std::string& name, const Eigen::MatrixXd& m);
  Eigen::MatrixXd matrix(const std::string& name) const;

  // Arbitrary byte strings (RNG state), one byte per stored double.
  void set_bytes(const std::string& name, const std::string& bytes);
  std::string bytes(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::string& path);

// Model parameters and architecture scalars under "param.*" / "model.*".
void model_to_checkpoint(const Model& model, Checkpoint* c);

// Rebuilds the model recorded by model_to_checkpoint.
Model model_from_checkpoint(const Checkpoint& c);

// Loads "param.*" tensors into an existing model; shapes must match.
void load_model_params(const Checkpoint& c, Model* model);

// Optimizer moments and step count under "adam.*".
void adam_to_checkpoint(const Model& model, const Adam& adam, Checkpoint* c);
void load_adam_state(const Checkpoint& c, const Model& model, Adam* adam);

}  // namespace marginsv

#endif  // MARGINSV_CHECKPOINT_H_
