// core/src/eval.cc

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

#include "marginsv/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "marginsv/losses.h"
#include "marginsv/rng.h"

namespace marginsv {

namespace {

constexpr int kHistBins = 100;  // width 0.02 over [-1, 1]

void split_scores(const ScoreSet& s, std::vector<double>* targets,
                  std::vector<double>* nontargets) {
  for (const auto& st : s.scores) {
    if (!std::isfinite(st.score))
      throw std::invalid_argument("metrics: non-finite score");
    (st.trial.label == 1 ? targets : nontargets)->push_back(st.score);
  }
  if (targets->empty() || nontargets->empty())
    throw std::invalid_argument(
        "metrics: need at least one target and one nontarget trial");
}

}  // namespace

TrialSet read_trial_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("trials: cannot open " + path);
  TrialSet set;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    Trial t;
    if (!(ss >> t.label >> t.enroll_id >> t.test_id) ||
        (t.label != 0 && t.label != 1))
      throw std::runtime_error("trials: bad line " + std::to_string(lineno) +
                               " in " + path);
    set.trials.push_back(std::move(t));
  }
  return set;
}

void write_trial_list(const std::string& path, const TrialSet& trials) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("trials: cannot write " + path);
  for (const auto& t : trials.trials)
    out << t.label << ' ' << t.enroll_id << ' ' << t.test_id << '\n';
}

TrialSet make_balanced_trials(const std::vector<CorpusEntry>& entries,
                              uint64_t seed) {
  std::map<std::string, std::vector<std::string>> by_speaker;
  for (const auto& e : entries)
    by_speaker[e.speaker_id].push_back(e.utterance_id);
  if (by_speaker.size() < 2)
    throw std::invalid_argument("trials: need at least two speakers");

  TrialSet set;
  for (const auto& [spk, utts] : by_speaker)
    for (size_t i = 0; i < utts.size(); ++i)
      for (size_t j = i + 1; j < utts.size(); ++j)
        set.trials.push_back({1, utts[i], utts[j]});
  if (set.trials.empty())
    throw std::invalid_argument("trials: no same-speaker pairs available");

  const size_t num_targets = set.trials.size();
  std::vector<std::string> speakers;
  for (const auto& [spk, utts] : by_speaker) speakers.push_back(spk);

  Rng rng(seed);
  std::set<std::pair<std::string, std::string>> seen;
  size_t added = 0;
  while (added < num_targets) {
    const auto& s1 = speakers[rng.uniform_index(speakers.size())];
    const auto& s2 = speakers[rng.uniform_index(speakers.size())];
    if (s1 == s2) continue;
    const auto& u1 = by_speaker[s1][rng.uniform_index(by_speaker[s1].size())];
    const auto& u2 = by_speaker[s2][rng.uniform_index(by_speaker[s2].size())];
    if (!seen.insert({u1, u2}).second) continue;
    set.trials.push_back({0, u1, u2});
    ++added;
  }
  return set;
}

Eigen::VectorXd embed_utterance(const Waveform& w, const Model& model,
                                const FeatureConfig& fcfg, int num_frames,
                                double frame_len_s) {
  if (num_frames < 1)
    throw std::invalid_argument("embed: num_frames must be >= 1");
  const auto len = static_cast<int64_t>(w.samples.size());
  const auto crop =
      static_cast<int64_t>(std::llround(frame_len_s * w.sample_rate));
  if (len < crop)
    throw std::invalid_argument("embed: utterance shorter than one frame");

  // Evenly spaced crop starts; duplicates collapse when the utterance is
  // barely longer than one crop.
  std::vector<int64_t> starts;
  for (int i = 0; i < num_frames; ++i) {
    const double frac =
        num_frames == 1 ? 0.0
                        : static_cast<double>(i) / (num_frames - 1);
    const auto s = static_cast<int64_t>(std::llround(frac * (len - crop)));
    if (starts.empty() || s != starts.back()) starts.push_back(s);
  }

  Eigen::VectorXd sum = Eigen::VectorXd::Zero(model.config().repr_dim);
  for (const int64_t s : starts) {
    Waveform view;
    view.sample_rate = w.sample_rate;
    view.samples.assign(w.samples.begin() + s, w.samples.begin() + s + crop);
    sum += model.represent(extract_features(view, fcfg));
  }
  Eigen::VectorXd mean = sum / static_cast<double>(starts.size());
  const double norm = mean.norm();
  if (norm <= 0.0)
    throw std::runtime_error("embed: zero-norm utterance embedding");
  return mean / norm;
}

ScoreSet score_trials(
    const TrialSet& trials,
    const std::map<std::string, Eigen::VectorXd>& embeddings) {
  ScoreSet out;
  out.scores.reserve(trials.trials.size());
  for (const auto& t : trials.trials) {
    const auto e = embeddings.find(t.enroll_id);
    if (e == embeddings.end())
      throw std::runtime_error("scoring: no embedding for " + t.enroll_id);
    const auto u = embeddings.find(t.test_id);
    if (u == embeddings.end())
      throw std::runtime_error("scoring: no embedding for " + t.test_id);
    out.scores.push_back({t, cosine_similarity(e->second, u->second)});
  }
  return out;
}

DetMetrics compute_det_metrics(const ScoreSet& scores, double p_target,
                               double c_miss, double c_fa) {
  std::vector<double> tar, non;
  split_scores(scores, &tar, &non);
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());

  std::vector<double> thresholds;
  thresholds.reserve(tar.size() + non.size() + 1);
  for (double s : tar) thresholds.push_back(s);
  for (double s : non) thresholds.push_back(s);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());
  // Reject-all sentinel above every score (FAR 0, FRR 1).
  thresholds.push_back(thresholds.back() + 1.0);

  DetMetrics out;
  out.roc.reserve(thresholds.size());
  for (double t : thresholds) {
    RocPoint p;
    p.threshold = t;
    const auto non_below =
        std::lower_bound(non.begin(), non.end(), t) - non.begin();
    p.far = static_cast<double>(non.size() - non_below) / non.size();
    const auto tar_below =
        std::lower_bound(tar.begin(), tar.end(), t) - tar.begin();
    p.frr = static_cast<double>(tar_below) / tar.size();
    out.roc.push_back(p);
  }

  // FAR - FRR decreases monotonically along the sweep; the EER sits where
  // it crosses zero.
  size_t k = 0;
  while (k < out.roc.size() && out.roc[k].far - out.roc[k].frr > 0.0) ++k;
  if (k == out.roc.size()) {
    // No crossing (all-negative differences are impossible at the lowest
    // threshold, so this means a degenerate single-point sweep).
    out.eer = 0.5 * (out.roc.back().far + out.roc.back().frr);
    out.eer_threshold = out.roc.back().threshold;
  } else if (out.roc[k].far == out.roc[k].frr) {
    out.eer = out.roc[k].far;
    out.eer_threshold = out.roc[k].threshold;
  } else {
    const RocPoint& a = out.roc[k - 1];
    const RocPoint& b = out.roc[k];
    const double da = a.far - a.frr;
    const double db = b.far - b.frr;
    const double alpha = da / (da - db);
    out.eer = a.far + alpha * (b.far - a.far);
    out.eer_threshold = a.threshold + alpha * (b.threshold - a.threshold);
  }

  const double floor_cost = std::min(c_miss * p_target, c_fa * (1.0 - p_target));
  double best = std::numeric_limits<double>::infinity();
  double best_t = out.roc.front().threshold;
  for (const auto& p : out.roc) {
    const double cost =
        c_miss * p.frr * p_target + c_fa * p.far * (1.0 - p_target);
    if (cost < best) {
      best = cost;
      best_t = p.threshold;
    }
  }
  out.min_dcf = best / floor_cost;
  out.min_dcf_threshold = best_t;
  return out;
}

std::pair<double, double> compute_eer(const ScoreSet& scores) {
  const DetMetrics m = compute_det_metrics(scores);
  return {m.eer, m.eer_threshold};
}

std::pair<double, double> compute_min_dcf(const ScoreSet& scores,
                                          double p_target, double c_miss,
                                          double c_fa) {
  const DetMetrics m = compute_det_metrics(scores, p_target, c_miss, c_fa);
  return {m.min_dcf, m.min_dcf_threshold};
}

ScoreStats score_stats(const ScoreSet& scores) {
  std::vector<double> tar, non;
  split_scores(scores, &tar, &non);
  ScoreStats st;
  st.pos_hist.assign(kHistBins, 0);
  st.neg_hist.assign(kHistBins, 0);
  double ps = 0.0, ns = 0.0;
  for (double s : tar) {
    ps += s;
    const int bin = std::clamp(
        static_cast<int>(std::floor((s + 1.0) / 0.02)), 0, kHistBins - 1);
    ++st.pos_hist[bin];
  }
  for (double s : non) {
    ns += s;
    const int bin = std::clamp(
        static_cast<int>(std::floor((s + 1.0) / 0.02)), 0, kHistBins - 1);
    ++st.neg_hist[bin];
  }
  st.mean_pos = ps / tar.size();
  st.mean_neg = ns / non.size();
  st.gap = st.mean_pos - st.mean_neg;
  return st;
}

void write_scores_csv(const std::string& path, const ScoreSet& scores) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("scores: cannot write " + path);
  out << std::setprecision(17);
  out << "enroll_id,test_id,label,score\n";
  for (const auto& s : scores.scores)
    out << s.trial.enroll_id << ',' << s.trial.test_id << ','
        << s.trial.label << ',' << s.score << '\n';
}

ScoreSet read_scores_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("scores: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "enroll_id,test_id,label,score")
    throw std::runtime_error("scores: bad header in " + path);
  ScoreSet set;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    ScoredTrial st;
    std::string label, score;
    if (!std::getline(ss, st.trial.enroll_id, ',') ||
        !std::getline(ss, st.trial.test_id, ',') ||
        !std::getline(ss, label, ',') || !std::getline(ss, score))
      throw std::runtime_error("scores: bad row: " + line);
    st.trial.label = std::stoi(label);
    st.score = std::stod(score);
    set.scores.push_back(std::move(st));
  }
  return set;
}

void write_histogram_csv(const std::string& path, const ScoreStats& stats) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("histogram: cannot write " + path);
  out << "bin_left,pos_count,neg_count\n";
  for (int b = 0; b < kHistBins; ++b)
    out << (-1.0 + 0.02 * b) << ',' << stats.pos_hist[b] << ','
        << stats.neg_hist[b] << '\n';
}

}  // namespace marginsv
