#include "rcpd/miner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rcpd/errors.hpp"
#include "rcpd/rng.hpp"

namespace rcpd {

void MinerParams::validate() const {
  if (depth < 1 || depth > 6) {
    throw ValidationError("miner: depth must lie in 1..6");
  }
  if (n_trees < 1) throw ValidationError("miner: n_trees must be >= 1");
  if (learning_rate <= 0.0 || learning_rate > 1.0) {
    throw ValidationError("miner: learning_rate must lie in (0,1]");
  }
  if (positive_weight < 0.0) {
    throw ValidationError("miner: positive_weight must be >= 0");
  }
  if (max_rules < 1) throw ValidationError("miner: max_rules must be >= 1");
}

std::array<double, kNumFeatures> MinedModel::features_of(
    const RankWindow& w) const {
  std::array<double, kNumFeatures> x;
  x[0] = static_cast<double>(std::min(w.current, rank_cap));
  for (int i = 0; i < static_cast<int>(kHistoryLen); ++i) {
    x[i + 1] = static_cast<double>(std::min(w.history[i], rank_cap));
  }
  if (log2_features) {
    for (double& v : x) v = std::log2(v);
  }
  return x;
}

double MinedModel::predict_score(
    const std::array<double, kNumFeatures>& x) const {
  double score = base_score;
  for (const auto& tree : trees) {
    int node = 0;
    while (!tree.nodes[node].is_leaf()) {
      const auto& n = tree.nodes[node];
      node = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    score += learning_rate * tree.nodes[node].value;
  }
  return score;
}

double MinedModel::predict_proba(const RankWindow& w) const {
  return 1.0 / (1.0 + std::exp(-predict_score(features_of(w))));
}

namespace {

struct Sample {
  std::array<double, kNumFeatures> x;
  bool label = false;
  double weight = 1.0;
  double grad = 0.0;  // residual y - p
  double hess = 0.0;  // p (1 - p)
};

struct Split {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

// Least-squares gain of splitting the gradient residuals, with samples
// ordered canonically by (feature value, residual) so accumulation order,
// and therefore every bit of the result, is independent of input order.
Split best_split(std::vector<Sample*>& node, int feature) {
  std::sort(node.begin(), node.end(), [feature](const Sample* a, const Sample* b) {
    if (a->x[feature] != b->x[feature]) return a->x[feature] < b->x[feature];
    return a->grad < b->grad;
  });
  double total_wg = 0.0, total_w = 0.0;
  for (const Sample* s : node) {
    total_wg += s->weight * s->grad;
    total_w += s->weight;
  }
  const double parent = total_wg * total_wg / total_w;

  Split best;
  double left_wg = 0.0, left_w = 0.0;
  for (std::size_t i = 0; i + 1 < node.size(); ++i) {
    left_wg += node[i]->weight * node[i]->grad;
    left_w += node[i]->weight;
    if (node[i]->x[feature] == node[i + 1]->x[feature]) continue;
    const double right_wg = total_wg - left_wg;
    const double right_w = total_w - left_w;
    const double gain =
        left_wg * left_wg / left_w + right_wg * right_wg / right_w - parent;
    if (gain > best.gain) {
      best.gain = gain;
      best.feature = feature;
      best.threshold = 0.5 * (node[i]->x[feature] + node[i + 1]->x[feature]);
    }
  }
  return best;
}

constexpr double kMinGain = 1e-9;

void grow(Tree& tree, int node_index, std::vector<Sample*> samples, int depth,
          const MinerParams& params,
          std::array<double, kNumFeatures>& gain_accum) {
  double wg = 0.0, wh = 0.0;
  for (const Sample* s : samples) {
    wg += s->weight * s->grad;
    wh += s->weight * s->hess;
  }
  auto& node = tree.nodes[node_index];
  node.value = wg / (wh + 1e-9);

  if (depth >= params.depth || samples.size() < 2) return;

  Split best;
  for (int feature = 0; feature < kNumFeatures; ++feature) {
    // Strict improvement breaks gain ties toward the lowest feature index;
    // within a feature, best_split already keeps the lowest threshold.
    const Split candidate = best_split(samples, feature);
    if (candidate.gain > best.gain) best = candidate;
  }
  if (best.feature < 0 || best.gain <= kMinGain) return;

  std::vector<Sample*> left, right;
  left.reserve(samples.size());
  right.reserve(samples.size());
  for (Sample* s : samples) {
    (s->x[best.feature] <= best.threshold ? left : right).push_back(s);
  }
  samples.clear();
  samples.shrink_to_fit();

  const int left_index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const int right_index = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  // Write through the index: the emplacements above may have reallocated.
  TreeNode& parent = tree.nodes[node_index];
  parent.feature = best.feature;
  parent.threshold = best.threshold;
  parent.gain = best.gain;
  parent.left = left_index;
  parent.right = right_index;
  gain_accum[best.feature] += best.gain;

  grow(tree, left_index, std::move(left), depth + 1, params, gain_accum);
  grow(tree, right_index, std::move(right), depth + 1, params, gain_accum);
}

}  // namespace

MinedModel train(const std::vector<LabeledWindow>& windows,
                 const MinerParams& params) {
  params.validate();
  if (windows.empty()) throw ValidationError("miner: no training windows");

  MinedModel model;
  model.learning_rate = params.learning_rate;
  model.log2_features = params.log2_features;
  model.rank_cap = params.rank_cap;

  std::size_t positives = 0;
  for (const auto& w : windows) positives += w.is_rcp ? 1 : 0;
  const std::size_t negatives = windows.size() - positives;
  if (positives == 0 || negatives == 0) {
    throw ValidationError("miner: training windows contain a single class");
  }
  const double w_pos = params.positive_weight > 0.0
                           ? params.positive_weight
                           : static_cast<double>(negatives) /
                                 static_cast<double>(positives);

  std::vector<Sample> samples(windows.size());
  double sum_wy = 0.0, sum_w = 0.0;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    samples[i].x = model.features_of(windows[i].window);
    samples[i].label = windows[i].is_rcp;
    samples[i].weight = windows[i].is_rcp ? w_pos : 1.0;
    sum_wy += samples[i].label ? samples[i].weight : 0.0;
    sum_w += samples[i].weight;
  }
  const double prior = std::clamp(sum_wy / sum_w, 1e-9, 1.0 - 1e-9);
  model.base_score = std::log(prior / (1.0 - prior));

  std::vector<double> score(samples.size(), model.base_score);
  std::array<double, kNumFeatures> gain_accum{};

  for (int round = 0; round < params.n_trees; ++round) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-score[i]));
      samples[i].grad = (samples[i].label ? 1.0 : 0.0) - p;
      samples[i].hess = std::max(p * (1.0 - p), 1e-12);
    }
    Tree tree;
    tree.nodes.emplace_back();
    std::vector<Sample*> root(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) root[i] = &samples[i];
    grow(tree, 0, std::move(root), 0, params, gain_accum);

    for (std::size_t i = 0; i < samples.size(); ++i) {
      int node = 0;
      while (!tree.nodes[node].is_leaf()) {
        const auto& n = tree.nodes[node];
        node = samples[i].x[n.feature] <= n.threshold ? n.left : n.right;
      }
      score[i] += params.learning_rate * tree.nodes[node].value;
    }
    model.trees.push_back(std::move(tree));
  }

  const double total_gain =
      std::accumulate(gain_accum.begin(), gain_accum.end(), 0.0);
  if (total_gain > 0.0) {
    for (int f = 0; f < kNumFeatures; ++f) {
      model.importance[f] = 100.0 * gain_accum[f] / total_gain;
    }
  } else {
    // No split carried information; spread the shares evenly rather than
    // report a vector that does not sum to 100.
    model.importance.fill(100.0 / kNumFeatures);
  }

  model.distilled_rules = distill_rules(model, params.max_rules);
  return model;
}

namespace {

struct Candidate {
  // Upper bounds per feature in rank units; rank_cap means unconstrained.
  std::array<Rank, kNumFeatures> bound;
  double gain = 0.0;
};

Rank threshold_to_rank(double threshold, bool log2_features, Rank cap) {
  const double raw = log2_features ? std::exp2(threshold) : threshold;
  if (raw < 1.0) return 1;
  if (raw >= static_cast<double>(cap)) return cap;
  return static_cast<Rank>(std::floor(raw));
}

void collect_paths(const MinedModel& model, const Tree& tree, int node_index,
                   std::array<double, kNumFeatures> upper, double gain,
                   std::vector<Candidate>& out) {
  const auto& node = tree.nodes[node_index];
  if (node.is_leaf()) {
    if (node.value <= 0.0) return;
    Candidate c;
    c.gain = gain;
    for (int f = 0; f < kNumFeatures; ++f) {
      c.bound[f] =
          threshold_to_rank(upper[f], model.log2_features, model.rank_cap);
    }
    // Every stop rule needs a cap on the current rank; a path that never
    // bounded it describes no actionable stopping condition.
    if (c.bound[0] >= model.rank_cap) return;
    out.push_back(c);
    return;
  }
  auto left_upper = upper;
  left_upper[node.feature] =
      std::min(left_upper[node.feature], node.threshold);
  collect_paths(model, tree, node.left, left_upper, gain + node.gain, out);
  // Right branches carry lower bounds only, which a <=-threshold rule
  // cannot express; the path is still walked for its leaves' upper bounds.
  collect_paths(model, tree, node.right, upper, gain + node.gain, out);
}

bool dominated_by(const Candidate& a, const Candidate& b) {
  // a is dominated when every bound is at most b's: anything a stops,
  // b stops too.
  for (int f = 0; f < kNumFeatures; ++f) {
    if (a.bound[f] > b.bound[f]) return false;
  }
  return true;
}

}  // namespace

RuleSet distill_rules(const MinedModel& model, int max_rules) {
  if (max_rules < 1) throw ValidationError("distill: max_rules must be >= 1");

  std::vector<Candidate> candidates;
  std::array<double, kNumFeatures> unbounded;
  unbounded.fill(std::numeric_limits<double>::infinity());
  for (const auto& tree : model.trees) {
    if (tree.nodes.empty()) continue;
    collect_paths(model, tree, 0, unbounded, 0.0, candidates);
  }

  // Identical bound vectors keep their best gain.
  std::map<std::array<Rank, kNumFeatures>, double> merged;
  for (const auto& c : candidates) {
    auto [it, inserted] = merged.try_emplace(c.bound, c.gain);
    if (!inserted) it->second = std::max(it->second, c.gain);
  }
  candidates.clear();
  for (const auto& [bound, gain] : merged) {
    candidates.push_back({bound, gain});
  }

  std::vector<bool> drop(candidates.size(), false);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (i == j || drop[j]) continue;
      if (candidates[i].bound == candidates[j].bound) continue;
      if (dominated_by(candidates[i], candidates[j])) {
        drop[i] = true;
        break;
      }
    }
  }

  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!drop[i]) kept.push_back(candidates[i]);
  }
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    if (a.gain != b.gain) return a.gain > b.gain;
    return a.bound < b.bound;
  });
  if (static_cast<int>(kept.size()) > max_rules) {
    kept.resize(static_cast<std::size_t>(max_rules));
  }

  RuleSet rules;
  for (std::size_t i = 0; i < kept.size(); ++i) {
    StepRule rule;
    rule.rule_id = "M" + std::to_string(i + 1);
    rule.current_threshold = kept[i].bound[0];
    for (int f = 1; f < kNumFeatures; ++f) {
      if (kept[i].bound[f] < model.rank_cap) {
        rule.history_thresholds.emplace_back(f, kept[i].bound[f]);
      }
    }
    rules.rules.push_back(std::move(rule));
  }
  rules.validate();
  return rules;
}

CvMetrics cross_validate(const std::vector<LabeledWindow>& windows, int folds,
                         const MinerParams& params) {
  params.validate();
  if (folds < 2) throw ValidationError("cross_validate: folds must be >= 2");
  std::size_t positives = 0;
  for (const auto& w : windows) positives += w.is_rcp ? 1 : 0;
  if (positives < static_cast<std::size_t>(folds)) {
    throw ValidationError("cross_validate: fewer positive windows (" +
                          std::to_string(positives) + ") than folds (" +
                          std::to_string(folds) + ")");
  }

  // Deterministic assignment by (seed, ordinal): stable across runs and
  // platforms, independent of container iteration quirks.
  std::vector<int> fold_of(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    fold_of[i] = static_cast<int>(
        Rng::substream(params.seed, i).next_u64() % static_cast<std::uint64_t>(folds));
  }

  CvMetrics metrics;
  double near_hits = 0.0, near_total = 0.0;
  for (int fold = 0; fold < folds; ++fold) {
    std::vector<LabeledWindow> training;
    training.reserve(windows.size());
    for (std::size_t i = 0; i < windows.size(); ++i) {
      if (fold_of[i] != fold) training.push_back(windows[i]);
    }
    const MinedModel model = train(training, params);

    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < windows.size(); ++i) {
      if (fold_of[i] != fold) continue;
      const bool predicted = model.predict(windows[i].window);
      if (windows[i].is_rcp) {
        predicted ? ++tp : ++fn;
        near_total += 1.0;
        // Detection counts when the model fires at the annotated stop or
        // one sentence to either side of it.
        bool near = predicted;
        if (!near) {
          for (std::size_t j = 0; j < windows.size() && !near; ++j) {
            if (windows[j].trace_ordinal == windows[i].trace_ordinal &&
                std::abs(windows[j].sentence_index - windows[i].rcp_index) ==
                    1 &&
                model.predict(windows[j].window)) {
              near = true;
            }
          }
        }
        near_hits += near ? 1.0 : 0.0;
      } else if (predicted) {
        ++fp;
      }
    }

    FoldMetrics fm;
    fm.degenerate = (tp + fp == 0) || (tp + fn == 0);
    fm.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
    fm.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
    fm.f1 = fm.precision + fm.recall > 0.0
                ? 2.0 * fm.precision * fm.recall / (fm.precision + fm.recall)
                : 0.0;
    metrics.folds.push_back(fm);
  }

  for (const auto& fm : metrics.folds) {
    metrics.mean.precision += fm.precision;
    metrics.mean.recall += fm.recall;
    metrics.mean.f1 += fm.f1;
    metrics.mean.degenerate = metrics.mean.degenerate || fm.degenerate;
  }
  const double k = static_cast<double>(metrics.folds.size());
  metrics.mean.precision /= k;
  metrics.mean.recall /= k;
  metrics.mean.f1 /= k;
  metrics.recall_near_rcp = near_total > 0.0 ? near_hits / near_total : 0.0;
  return metrics;
}

}  // namespace rcpd
