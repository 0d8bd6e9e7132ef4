// core/include/marginsv/eval.h

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

#ifndef MARGINSV_EVAL_H_
#define MARGINSV_EVAL_H_

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "marginsv/features.h"
#include "marginsv/model.h"
#include "marginsv/synth.h"
#include "marginsv/wav.h"

namespace marginsv {

// One verification trial: does the test utterance belong to the enrolled
// speaker? label 1 = target (same speaker), 0 = nontarget.
struct Trial {
  int label = 0;
  std::string enroll_id;
  std::string test_id;
};

struct TrialSet {
  std::vector<Trial> trials;
};

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

struct ScoreSet {
  std::vector<ScoredTrial> scores;
};

// Text format: one `label enroll_id test_id` per line, label in {1, 0}.
TrialSet read_trial_list(const std::string& path);
void write_trial_list(const std::string& path, const TrialSet& trials);

// All same-speaker utterance pairs as targets plus an equal number of
// deterministic random cross-speaker pairs as nontargets.
TrialSet make_balanced_trials(const std::vector<CorpusEntry>& entries,
                              uint64_t seed);

// Fixed-count evenly spaced crops, each mapped to its representation y,
// averaged over crops and l2-normalized. Uses y, not the projector output.
Eigen::VectorXd embed_utterance(const Waveform& w, const Model& model,
                                const FeatureConfig& fcfg, int num_frames = 6,
                                double frame_len_s = 2.0);

// Cosine score per trial; throws naming any utterance that lacks an
// embedding.
ScoreSet score_trials(const TrialSet& trials,
                      const std::map<std::string, Eigen::VectorXd>& embeddings);

struct RocPoint {
  double threshold = 0.0;
  double far = 0.0;  // P(nontarget score >= threshold)
  double frr = 0.0;  // P(target score < threshold)
};

struct DetMetrics {
  double eer = 0.0;
  double eer_threshold = 0.0;
  double min_dcf = 0.0;
  double min_dcf_threshold = 0.0;
  std::vector<RocPoint> roc;
};

// Threshold sweep over all distinct scores plus a reject-all point. EER is
// linearly interpolated between the bracketing operating points; minDCF is
// the normalized minimum of c_miss*FRR*p + c_fa*FAR*(1-p).
DetMetrics compute_det_metrics(const ScoreSet& scores, double p_target = 0.01,
                               double c_miss = 1.0, double c_fa = 1.0);

std::pair<double, double> compute_eer(const ScoreSet& scores);
std::pair<double, double> compute_min_dcf(const ScoreSet& scores,
                                          double p_target = 0.01,
                                          double c_miss = 1.0,
                                          double c_fa = 1.0);

struct ScoreStats {
  double mean_pos = 0.0;
  double mean_neg = 0.0;
  double gap = 0.0;  // mean_pos - mean_neg
  // 100 bins of width 0.02 spanning [-1, 1].
  std::vector<int64_t> pos_hist;
  std::vector<int64_t> neg_hist;
};

ScoreStats score_stats(const ScoreSet& scores);

// CSV `enroll_id,test_id,label,score`.
void write_scores_csv(const std::string& path, const ScoreSet& scores);
ScoreSet read_scores_csv(const std::string& path);

// CSV `bin_left,pos_count,neg_count`.
void write_histogram_csv(const std::string& path, const ScoreStats& stats);

}  // namespace marginsv

#endif  // MARGINSV_EVAL_H_
