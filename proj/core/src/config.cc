// core/src/config.cc

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

#include "marginsv/config.h"

#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace marginsv {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::string& scope,
                         const std::vector<std::string>& known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const auto& k : known) ok = ok || k == key;
    if (!ok)
      throw std::invalid_argument("config: unknown key " +
                                  (scope.empty() ? key : scope + "." + key));
  }
}

template <typename T>
void get_to(const json& j, const char* key, T* out) {
  if (j.contains(key)) j.at(key).get_to(*out);
}

void parse_corpus(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "corpus",
                      {"speakers", "utterances_per_speaker", "utterance_len_s",
                       "heldout_speakers"});
  get_to(j, "speakers", &c->corpus.num_speakers);
  get_to(j, "utterances_per_speaker", &c->corpus.utterances_per_speaker);
  get_to(j, "utterance_len_s", &c->corpus.utterance_len_s);
  get_to(j, "heldout_speakers", &c->heldout_speakers);
}

void parse_augment(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(
      j, "augment",
      {"enabled", "speech_snr", "music_snr", "noise_snr", "reverb_prob"});
  get_to(j, "enabled", &c->augment.enabled);
  auto range = [&](const char* key, double* lo, double* hi) {
    if (!j.contains(key)) return;
    const auto& r = j.at(key);
    if (!r.is_array() || r.size() != 2)
      throw std::invalid_argument(std::string("config: augment.") + key +
                                  " must be [lo, hi]");
    *lo = r[0].get<double>();
    *hi = r[1].get<double>();
  };
  range("speech_snr", &c->augment.speech_snr_lo, &c->augment.speech_snr_hi);
  range("music_snr", &c->augment.music_snr_lo, &c->augment.music_snr_hi);
  range("noise_snr", &c->augment.noise_snr_lo, &c->augment.noise_snr_hi);
  get_to(j, "reverb_prob", &c->augment.reverb_prob);
}

void parse_loss(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "loss",
                      {"variant", "tau", "margin", "schedule",
                       "schedule_total_steps", "learnable_margin"});
  if (j.contains("variant"))
    c->loss.variant = loss_variant_from_string(j.at("variant").get<std::string>());
  get_to(j, "tau", &c->loss.tau);
  get_to(j, "margin", &c->loss.margin);
  if (j.contains("schedule")) {
    const auto s = j.at("schedule").get<std::string>();
    if (s == "constant")
      c->loss.schedule_kind = MarginSchedule::Kind::kConstant;
    else if (s == "cosine_ramp")
      c->loss.schedule_kind = MarginSchedule::Kind::kCosineRamp;
    else
      throw std::invalid_argument("config: unknown loss.schedule " + s);
  }
  get_to(j, "schedule_total_steps", &c->loss.schedule_total_steps);
  get_to(j, "learnable_margin", &c->loss.learnable_margin);
}

void parse_model(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "model",
                      {"hidden_dim", "repr_dim", "proj_hidden", "proj_dim",
                       "pooling", "projector"});
  get_to(j, "hidden_dim", &c->model.hidden_dim);
  get_to(j, "repr_dim", &c->model.repr_dim);
  get_to(j, "proj_hidden", &c->model.proj_hidden);
  get_to(j, "proj_dim", &c->model.proj_dim);
  if (j.contains("pooling"))
    c->model.pooling = pooling_from_string(j.at("pooling").get<std::string>());
  get_to(j, "projector", &c->model.use_projector);
}

void parse_optim(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "optim",
                      {"lr", "beta1", "beta2", "eps", "lr_decay",
                       "lr_decay_every_epochs"});
  get_to(j, "lr", &c->optim.lr);
  get_to(j, "beta1", &c->optim.beta1);
  get_to(j, "beta2", &c->optim.beta2);
  get_to(j, "eps", &c->optim.eps);
  get_to(j, "lr_decay", &c->optim.lr_decay);
  get_to(j, "lr_decay_every_epochs", &c->optim.lr_decay_every_epochs);
}

void parse_train(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "train",
                      {"epochs", "batch_size", "crop_len_s", "num_workers",
                       "checkpoint_every_epochs"});
  get_to(j, "epochs", &c->epochs);
  get_to(j, "batch_size", &c->batch_size);
  get_to(j, "crop_len_s", &c->crop_len_s);
  get_to(j, "num_workers", &c->num_workers);
  get_to(j, "checkpoint_every_epochs", &c->checkpoint_every_epochs);
}

void parse_eval(const json& j, ExperimentConfig* c) {
  reject_unknown_keys(j, "eval", {"num_frames", "frame_len_s"});
  get_to(j, "num_frames", &c->eval_num_frames);
  get_to(j, "frame_len_s", &c->eval_frame_len_s);
}

}  // namespace

void ExperimentConfig::validate() const {
  corpus.validate();
  augment.validate();
  loss.validate();
  model.validate();
  optim.validate();
  if (heldout_speakers < 0 || heldout_speakers >= corpus.num_speakers)
    throw std::invalid_argument(
        "config: heldout_speakers must lie in [0, speakers)");
  if (epochs < 1) throw std::invalid_argument("config: epochs must be >= 1");
  if (batch_size < 2)
    throw std::invalid_argument("config: batch_size must be >= 2");
  if (crop_len_s <= 0.0)
    throw std::invalid_argument("config: crop_len_s must be > 0");
  if (num_workers < 0)
    throw std::invalid_argument("config: num_workers must be >= 0");
  if (eval_num_frames < 1)
    throw std::invalid_argument("config: eval.num_frames must be >= 1");
  if (eval_frame_len_s <= 0.0)
    throw std::invalid_argument("config: eval.frame_len_s must be > 0");
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
  reject_unknown_keys(j, "",
                      {"seed", "out_dir", "corpus", "augment", "loss", "model",
                       "optim", "train", "eval"});
  ExperimentConfig c;
  get_to(j, "seed", &c.seed);
  get_to(j, "out_dir", &c.out_dir);
  if (j.contains("corpus")) parse_corpus(j.at("corpus"), &c);
  if (j.contains("augment")) parse_augment(j.at("augment"), &c);
  if (j.contains("loss")) parse_loss(j.at("loss"), &c);
  if (j.contains("model")) parse_model(j.at("model"), &c);
  if (j.contains("optim")) parse_optim(j.at("optim"), &c);
  if (j.contains("train")) parse_train(j.at("train"), &c);
  if (j.contains("eval")) parse_eval(j.at("eval"), &c);
  c.corpus.seed = c.seed;
  return c;
}

nlohmann::json experiment_config_to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  j["seed"] = c.seed;
  j["out_dir"] = c.out_dir;
  j["corpus"] = {{"speakers", c.corpus.num_speakers},
                 {"utterances_per_speaker", c.corpus.utterances_per_speaker},
                 {"utterance_len_s", c.corpus.utterance_len_s},
                 {"heldout_speakers", c.heldout_speakers}};
  j["augment"] = {
      {"enabled", c.augment.enabled},
      {"speech_snr", {c.augment.speech_snr_lo, c.augment.speech_snr_hi}},
      {"music_snr", {c.augment.music_snr_lo, c.augment.music_snr_hi}},
      {"noise_snr", {c.augment.noise_snr_lo, c.augment.noise_snr_hi}},
      {"reverb_prob", c.augment.reverb_prob}};
  j["loss"] = {{"variant", to_string(c.loss.variant)},
               {"tau", c.loss.tau},
               {"margin", c.loss.margin},
               {"schedule",
                c.loss.schedule_kind == MarginSchedule::Kind::kCosineRamp
                    ? "cosine_ramp"
                    : "constant"},
               {"schedule_total_steps", c.loss.schedule_total_steps},
               {"learnable_margin", c.loss.learnable_margin}};
  j["model"] = {{"hidden_dim", c.model.hidden_dim},
                {"repr_dim", c.model.repr_dim},
                {"proj_hidden", c.model.proj_hidden},
                {"proj_dim", c.model.proj_dim},
                {"pooling", to_string(c.model.pooling)},
                {"projector", c.model.use_projector}};
  j["optim"] = {{"lr", c.optim.lr},
                {"beta1", c.optim.beta1},
                {"beta2", c.optim.beta2},
                {"eps", c.optim.eps},
                {"lr_decay", c.optim.lr_decay},
                {"lr_decay_every_epochs", c.optim.lr_decay_every_epochs}};
  j["train"] = {{"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"crop_len_s", c.crop_len_s},
                {"num_workers", c.num_workers},
                {"checkpoint_every_epochs", c.checkpoint_every_epochs}};
  j["eval"] = {{"num_frames", c.eval_num_frames},
               {"frame_len_s", c.eval_frame_len_s}};
  return j;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config: parse error in " + path + ": " +
                                e.what());
  }
  return experiment_config_from_json(j);
}

void save_experiment_config(const std::string& path,
                            const ExperimentConfig& c) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("config: cannot write " + path);
  out << experiment_config_to_json(c).dump(2) << "\n";
}

uint64_t config_hash(const ExperimentConfig& c) {
  nlohmann::json j = experiment_config_to_json(c);
  // Neither the output location, the batch-preparation strategy, nor the
  // snapshot cadence changes the experiment: reference and pipelined runs
  // must share a hash, and a resume may write elsewhere or snapshot on a
  // different schedule.
  j.erase("out_dir");
  j["train"].erase("num_workers");
  j["train"].erase("checkpoint_every_epochs");
  const std::string s = j.dump();
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char b : s) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::optional<uint64_t> env_seed_override() {
  const char* v = std::getenv("MC_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0')
    throw std::invalid_argument("MC_SEED must be a nonnegative integer");
  return static_cast<uint64_t>(parsed);
}

}  // namespace marginsv
