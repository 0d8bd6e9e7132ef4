// core/src/commands.cc

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

#include "marginsv/commands.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "json.hpp"
#include "marginsv/augment.h"
#include "marginsv/checkpoint.h"
#include "marginsv/losscheck.h"
#include "marginsv/rng.h"
#include "marginsv/synth.h"
#include "marginsv/trainer.h"

namespace marginsv {

namespace {

namespace fs = std::filesystem;

// Seed lanes private to the commands layer.
constexpr uint64_t kTrialLane = 0x5eed0003;      // held-out trial sampling
constexpr uint64_t kUntrainedLane = 0xe7a10001;  // random-baseline init
constexpr uint64_t kEvalNoiseLane = 0xe7a10002;  // noisy-condition streams

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : s) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

void write_manifest_csv(const std::string& path,
                        const std::vector<CorpusEntry>& entries) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "utterance_id,speaker_id,relative_path\n";
  for (const auto& e : entries)
    out << e.utterance_id << "," << e.speaker_id << "," << e.relative_path
        << "\n";
}

// Distinct speaker ids in first-appearance order.
std::vector<std::string> speaker_order(const std::vector<CorpusEntry>& m) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& e : m)
    if (seen.insert(e.speaker_id).second) order.push_back(e.speaker_id);
  return order;
}

std::string hex64(uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace

void cmd_gen_data(const ExperimentConfig& config, const std::string& corpus_dir,
                  std::ostream& out) {
  config.validate();
  CorpusConfig ccfg = config.corpus;
  ccfg.seed = config.seed;
  const SyntheticCorpus corpus = generate_corpus(ccfg, corpus_dir);
  const auto speakers = speaker_order(corpus.manifest);
  out << "wrote " << corpus_dir << "/manifest.csv (" << corpus.manifest.size()
      << " utterances, " << speakers.size() << " speakers)\n";

  const int heldout = config.heldout_speakers;
  if (heldout <= 0) return;
  // Held-out speakers are spaced evenly across the roster. Voices are laid
  // out on a fundamental-frequency grid, so taking the tail would bunch the
  // evaluation speakers into one corner of the voice space.
  std::set<std::string> held_set;
  for (int j = 0; j < heldout; ++j) {
    const auto slot = static_cast<size_t>((j + 0.5) * speakers.size() /
                                          heldout);
    held_set.insert(speakers[slot]);
  }
  const size_t train_speakers = speakers.size() - held_set.size();
  std::vector<CorpusEntry> train, held;
  for (const auto& e : corpus.manifest)
    (held_set.count(e.speaker_id) ? held : train).push_back(e);

  write_manifest_csv(corpus_dir + "/manifest_train.csv", train);
  out << "wrote " << corpus_dir << "/manifest_train.csv (" << train.size()
      << " utterances, " << train_speakers << " speakers)\n";
  write_manifest_csv(corpus_dir + "/manifest_heldout.csv", held);
  out << "wrote " << corpus_dir << "/manifest_heldout.csv (" << held.size()
      << " utterances, " << heldout << " speakers)\n";

  const TrialSet trials =
      make_balanced_trials(held, derive_seed(config.seed, kTrialLane));
  size_t targets = 0;
  for (const auto& t : trials.trials) targets += t.label == 1 ? 1 : 0;
  write_trial_list(corpus_dir + "/trials_heldout.txt", trials);
  out << "wrote " << corpus_dir << "/trials_heldout.txt (" << targets
      << " targets, " << trials.trials.size() - targets << " nontargets)\n";
}

void cmd_train(const ExperimentConfig& config, const std::string& corpus_dir,
               const std::string& manifest_name,
               const std::string& resume_checkpoint, std::ostream& out) {
  config.validate();
  fs::create_directories(config.out_dir);
  save_experiment_config(config.out_dir + "/config.json", config);
  const uint64_t hash = config_hash(config);
  out << "config_hash " << hex64(hash) << "\n";

  const UtteranceStore store = UtteranceStore::open(corpus_dir, manifest_name);
  out << "training on " << store.size() << " utterances from " << corpus_dir
      << "/" << manifest_name << "\n";

  TrainConfig tcfg;
  tcfg.epochs = config.epochs;
  tcfg.batch_size = config.batch_size;
  tcfg.seed = config.seed;
  tcfg.crop_len_s = config.crop_len_s;
  tcfg.num_workers = config.num_workers;
  tcfg.config_hash = hash;
  tcfg.augment = config.augment;
  tcfg.loss = config.loss;
  tcfg.model = config.model;
  tcfg.optim = config.optim;
  tcfg.metrics_path = config.out_dir + "/metrics.csv";
  tcfg.checkpoint_path = config.out_dir + "/model.ckpt";
  tcfg.checkpoint_every_epochs = config.checkpoint_every_epochs;

  const TrainResult result = train(store, tcfg, resume_checkpoint);
  out << "epochs " << result.epochs_completed << "  steps " << result.steps
      << "\n";
  out << "first_epoch_mean_loss " << result.first_epoch_mean_loss << "\n";
  out << "final_epoch_mean_loss " << result.final_epoch_mean_loss << "\n";
  out << "final_margin " << result.final_margin << "\n";
  out << "checkpoint " << tcfg.checkpoint_path << "\n";
  out << "metrics " << tcfg.metrics_path << "\n";
}

EvalReport cmd_evaluate(const ExperimentConfig& config,
                        const std::string& corpus_dir,
                        const std::string& trial_list,
                        const std::string& checkpoint, bool untrained,
                        bool noisy, std::ostream& out) {
  config.validate();
  if (untrained == !checkpoint.empty())
    throw std::invalid_argument(
        "evaluate needs exactly one of --checkpoint and --untrained");

  const TrialSet trials = read_trial_list(trial_list);
  if (trials.trials.empty())
    throw std::invalid_argument("trial list is empty: " + trial_list);

  Model model = [&] {
    if (untrained) {
      Model m(config.model);
      Rng rng(derive_seed(config.seed, kUntrainedLane));
      m.init(rng);
      return m;
    }
    return model_from_checkpoint(load_checkpoint(checkpoint));
  }();

  const SyntheticCorpus corpus = load_corpus(corpus_dir);
  std::map<std::string, const CorpusEntry*> by_id;
  for (const auto& e : corpus.manifest) by_id[e.utterance_id] = &e;

  std::set<std::string> wanted;
  for (const auto& t : trials.trials) {
    wanted.insert(t.enroll_id);
    wanted.insert(t.test_id);
  }

  // The noisy condition reuses the default augmentation policy so a model
  // trained without augmentation still faces corrupted test audio. Noise is
  // keyed per utterance id, so every model sees identical corruption.
  std::optional<NoiseBank> bank;
  AugmentPolicy noisy_policy;
  if (noisy)
    bank.emplace(derive_seed(config.seed, kEvalNoiseLane),
                 config.corpus.utterance_len_s);

  const FeatureConfig fcfg;
  std::map<std::string, Eigen::VectorXd> embeddings;
  for (const auto& id : wanted) {
    const auto it = by_id.find(id);
    if (it == by_id.end())
      throw std::invalid_argument("trial utterance " + id +
                                  " not in corpus manifest");
    Waveform w = read_wav(corpus_audio_path(corpus, *it->second));
    if (noisy) {
      Rng rng(derive_seed(config.seed, kEvalNoiseLane, fnv1a(id)));
      w = augment_view(w, noisy_policy, *bank, rng);
    }
    embeddings[id] = embed_utterance(w, model, fcfg, config.eval_num_frames,
                                     config.eval_frame_len_s);
  }

  const ScoreSet scores = score_trials(trials, embeddings);
  EvalReport report;
  report.num_trials = scores.scores.size();
  for (const auto& s : scores.scores)
    (s.trial.label == 1 ? report.num_targets : report.num_nontargets)++;
  report.det = compute_det_metrics(scores);
  report.stats = score_stats(scores);

  fs::create_directories(config.out_dir);
  write_scores_csv(config.out_dir + "/scores.csv", scores);
  write_histogram_csv(config.out_dir + "/histogram.csv", report.stats);
  nlohmann::json j{{"num_trials", report.num_trials},
                   {"num_targets", report.num_targets},
                   {"num_nontargets", report.num_nontargets},
                   {"eer", report.det.eer},
                   {"eer_pct", 100.0 * report.det.eer},
                   {"eer_threshold", report.det.eer_threshold},
                   {"min_dcf", report.det.min_dcf},
                   {"min_dcf_threshold", report.det.min_dcf_threshold},
                   {"mean_pos", report.stats.mean_pos},
                   {"mean_neg", report.stats.mean_neg},
                   {"gap", report.stats.gap},
                   {"noisy", noisy},
                   {"untrained", untrained},
                   {"checkpoint", checkpoint}};
  {
    std::ofstream jf(config.out_dir + "/eval.json", std::ios::trunc);
    if (!jf) throw std::runtime_error("cannot write eval.json");
    jf << j.dump(2) << "\n";
  }

  out << "trials " << report.num_trials << "  targets " << report.num_targets
      << "  nontargets " << report.num_nontargets << "\n";
  out << "eer_pct " << 100.0 * report.det.eer << "\n";
  out << "eer_threshold " << report.det.eer_threshold << "\n";
  out << "min_dcf " << report.det.min_dcf << "\n";
  out << "min_dcf_threshold " << report.det.min_dcf_threshold << "\n";
  out << "mean_pos " << report.stats.mean_pos << "  mean_neg "
      << report.stats.mean_neg << "  gap " << report.stats.gap << "\n";
  out << "wrote " << config.out_dir << "/{scores.csv,histogram.csv,eval.json}"
      << "\n";
  return report;
}

bool cmd_losscheck(uint64_t seed, int grad_batches, int batch_size,
                   bool fault_am_sign_flip, std::ostream& out) {
  struct FaultGuard {
    explicit FaultGuard(bool on) { faults::am_grad_sign_flip = on; }
    ~FaultGuard() { faults::am_grad_sign_flip = false; }
  } guard(fault_am_sign_flip);

  const auto results = run_loss_checks(seed, grad_batches, batch_size);
  size_t passed = 0;
  for (const auto& r : results) {
    out << (r.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(52)
        << r.name << std::right << "  worst " << std::scientific
        << std::setprecision(3) << r.metric << "  tol " << std::setprecision(0)
        << r.tolerance << std::defaultfloat << "\n";
    passed += r.pass ? 1 : 0;
  }
  out << passed << "/" << results.size() << " checks passed\n";
  return passed == results.size();
}

ScoreStats cmd_score_stats(const std::string& scores_csv,
                           const std::string& histogram_out,
                           std::ostream& out) {
  const ScoreSet scores = read_scores_csv(scores_csv);
  if (scores.scores.empty())
    throw std::invalid_argument("no scores in " + scores_csv);
  const ScoreStats stats = score_stats(scores);
  size_t targets = 0;
  for (const auto& s : scores.scores) targets += s.trial.label == 1 ? 1 : 0;
  out << "scores " << scores.scores.size() << "  targets " << targets
      << "  nontargets " << scores.scores.size() - targets << "\n";
  out << "mean_pos " << stats.mean_pos << "\n";
  out << "mean_neg " << stats.mean_neg << "\n";
  out << "gap " << stats.gap << "\n";
  if (!histogram_out.empty()) {
    write_histogram_csv(histogram_out, stats);
    out << "wrote " << histogram_out << "\n";
  }
  return stats;
}

}  // namespace marginsv
