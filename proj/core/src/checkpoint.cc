// core/src/checkpoint.cc

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

#include "marginsv/checkpoint.h"

#include <cstring>
#include <fstream>
#include <stdexcept>

namespace marginsv {

namespace {

constexpr char kMagic[4] = {'M', 'C', 'K', 'P'};

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

uint64_t element_count(const std::vector<uint64_t>& dims) {
  uint64_t n = 1;
  for (uint64_t d : dims) n *= d;
  return n;
}

}  // namespace

void Checkpoint::set_scalar(const std::string& name, double v) {
  tensors[name] = Tensor{{1}, {v}};
}

double Checkpoint::scalar(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end() || it->second.data.size() != 1)
    throw std::runtime_error("checkpoint: missing scalar " + name);
  return it->second.data[0];
}

void Checkpoint::set_matrix(const std::string& name,
                            const Eigen::MatrixXd& m) {
  Tensor t;
  t.dims = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
  t.data.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) t.data.push_back(m(r, c));
  tensors[name] = std::move(t);
}

Eigen::MatrixXd Checkpoint::matrix(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end() || it->second.dims.size() != 2)
    throw std::runtime_error("checkpoint: missing matrix " + name);
  const auto rows = static_cast<Eigen::Index>(it->second.dims[0]);
  const auto cols = static_cast<Eigen::Index>(it->second.dims[1]);
  Eigen::MatrixXd m(rows, cols);
  size_t k = 0;
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = it->second.data[k++];
  return m;
}

void Checkpoint::set_bytes(const std::string& name, const std::string& bytes) {
  Tensor t;
  t.dims = {bytes.size()};
  t.data.reserve(bytes.size());
  for (unsigned char b : bytes) t.data.push_back(static_cast<double>(b));
  tensors[name] = std::move(t);
}

std::string Checkpoint::bytes(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end() || it->second.dims.size() != 1)
    throw std::runtime_error("checkpoint: missing byte tensor " + name);
  std::string s;
  s.reserve(it->second.data.size());
  for (double d : it->second.data)
    s.push_back(static_cast<char>(static_cast<unsigned char>(d)));
  return s;
}

void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw std::runtime_error("checkpoint: cannot open for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  write_pod<uint32_t>(out, Checkpoint::kVersion);
  write_pod<uint64_t>(out, c.config_hash);
  write_pod<uint64_t>(out, c.tensors.size());
  for (const auto& [name, t] : c.tensors) {
    if (element_count(t.dims) != t.data.size())
      throw std::logic_error("checkpoint: dims/data mismatch for " + name);
    write_pod<uint32_t>(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_pod<uint32_t>(out, static_cast<uint32_t>(t.dims.size()));
    for (uint64_t d : t.dims) write_pod<uint64_t>(out, d);
    out.write(reinterpret_cast<const char*>(t.data.data()),
              static_cast<std::streamsize>(t.data.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("checkpoint: write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open: " + path);
  char magic[4];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  const auto version = read_pod<uint32_t>(in);
  if (version != Checkpoint::kVersion)
    throw std::runtime_error("checkpoint: unsupported version " +
                             std::to_string(version));
  Checkpoint c;
  c.config_hash = read_pod<uint64_t>(in);
  const auto count = read_pod<uint64_t>(in);
  for (uint64_t i = 0; i < count; ++i) {
    const auto name_len = read_pod<uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    const auto rank = read_pod<uint32_t>(in);
    Checkpoint::Tensor t;
    t.dims.resize(rank);
    for (auto& d : t.dims) d = read_pod<uint64_t>(in);
    t.data.resize(element_count(t.dims));
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor " + name);
    c.tensors[name] = std::move(t);
  }
  return c;
}

void model_to_checkpoint(const Model& model, Checkpoint* c) {
  const ModelConfig& cfg = model.config();
  c->set_scalar("model.input_dim", cfg.input_dim);
  c->set_scalar("model.hidden_dim", cfg.hidden_dim);
  c->set_scalar("model.repr_dim", cfg.repr_dim);
  c->set_scalar("model.proj_hidden", cfg.proj_hidden);
  c->set_scalar("model.proj_dim", cfg.proj_dim);
  c->set_scalar("model.pooling", cfg.pooling == Pooling::kAttentive ? 1 : 0);
  c->set_scalar("model.projector", cfg.use_projector ? 1 : 0);
  for (int id = 0; id < Model::kNumTensors; ++id) {
    if (!model.tensor_active(id)) continue;
    c->set_matrix(std::string("param.") + Model::tensor_name(id),
                  model.tensor(id));
  }
}

Model model_from_checkpoint(const Checkpoint& c) {
  ModelConfig cfg;
  cfg.input_dim = static_cast<int>(c.scalar("model.input_dim"));
  cfg.hidden_dim = static_cast<int>(c.scalar("model.hidden_dim"));
  cfg.repr_dim = static_cast<int>(c.scalar("model.repr_dim"));
  cfg.proj_hidden = static_cast<int>(c.scalar("model.proj_hidden"));
  cfg.proj_dim = static_cast<int>(c.scalar("model.proj_dim"));
  cfg.pooling =
      c.scalar("model.pooling") != 0 ? Pooling::kAttentive : Pooling::kMean;
  cfg.use_projector = c.scalar("model.projector") != 0;
  Model model(cfg);
  load_model_params(c, &model);
  return model;
}

void load_model_params(const Checkpoint& c, Model* model) {
  for (int id = 0; id < Model::kNumTensors; ++id) {
    if (!model->tensor_active(id)) continue;
    const Eigen::MatrixXd m =
        c.matrix(std::string("param.") + Model::tensor_name(id));
    Eigen::MatrixXd& p = model->tensor(id);
    if (m.rows() != p.rows() || m.cols() != p.cols())
      throw std::runtime_error(std::string("checkpoint: shape mismatch for ") +
                               Model::tensor_name(id));
    p = m;
  }
  model->bump_revision();
}

void adam_to_checkpoint(const Model& model, const Adam& adam, Checkpoint* c) {
  c->set_scalar("adam.t", static_cast<double>(adam.step_count()));
  c->set_scalar("adam.margin_m", adam.margin_m());
  c->set_scalar("adam.margin_v", adam.margin_v());
  for (int id = 0; id < Model::kNumTensors; ++id) {
    if (!model.tensor_active(id)) continue;
    c->set_matrix(std::string("adam.m.") + Model::tensor_name(id),
                  adam.moment_m(id));
    c->set_matrix(std::string("adam.v.") + Model::tensor_name(id),
                  adam.moment_v(id));
  }
}

void load_adam_state(const Checkpoint& c, const Model& model, Adam* adam) {
  adam->restore(static_cast<int64_t>(c.scalar("adam.t")),
                c.scalar("adam.margin_m"), c.scalar("adam.margin_v"));
  for (int id = 0; id < Model::kNumTensors; ++id) {
    if (!model.tensor_active(id)) continue;
    adam->moment_m(id) = c.matrix(std::string("adam.m.") + Model::tensor_name(id));
    adam->moment_v(id) = c.matrix(std::string("adam.v.") + Model::tensor_name(id));
  }
}

}  // namespace marginsv
