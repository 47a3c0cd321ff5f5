#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rcpd/rules.hpp"
#include "rcpd/synth.hpp"

namespace rcpd {

/// Features per window: current rank, then history offsets 1..5.
inline constexpr int kNumFeatures = 6;

struct MinerParams {
  /// Deep enough for one root-to-leaf path to bound the current rank plus
  /// every history offset, so one positive leaf can hold a full stop rule.
  int depth = 6;  // 1..6
  int n_trees = 50;
  double learning_rate = 0.1;
  std::uint64_t seed = 7;
  /// Train on log2(rank) rather than raw ranks.
  bool log2_features = true;
  /// Weight on positive samples; 0 means negatives/positives (balanced).
  double positive_weight = 0.0;
  Rank rank_cap = kDefaultRankCap;
  int max_rules = 4;

  void validate() const;
};

/// One regression-tree node. Internal nodes route x[feature] <= threshold
/// to the left child; leaves carry the raw additive value.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  double value = 0.0;
  double gain = 0.0;
  int left = -1;
  int right = -1;
  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;
};

/// Boosted logistic model over rank windows plus what was distilled out of
/// it: gain-based importance shares and threshold stop rules.
struct MinedModel {
  std::vector<Tree> trees;
  double base_score = 0.0;
  double learning_rate = 0.1;
  bool log2_features = true;
  Rank rank_cap = kDefaultRankCap;
  /// Per-feature share of total split gain; sums to 100.
  std::array<double, kNumFeatures> importance{};
  RuleSet distilled_rules;

  std::array<double, kNumFeatures> features_of(const RankWindow& w) const;
  double predict_score(const std::array<double, kNumFeatures>& x) const;
  double predict_proba(const RankWindow& w) const;
  bool predict(const RankWindow& w) const { return predict_proba(w) >= 0.5; }
};

/// Trains the boosted model. Deterministic: equal inputs give equal models,
/// and the result is invariant to permutations of the training windows.
/// Throws ValidationError on single-class input.
MinedModel train(const std::vector<LabeledWindow>& windows,
                 const MinerParams& params = {});

/// Extracts threshold rules from positive-value leaves, highest path gain
/// first. Each root-to-leaf path contributes its per-feature upper bounds;
/// paths without an upper bound on the current rank are skipped, dominated
/// rules (every threshold at most another rule's) are removed, and at most
/// max_rules survive. Returns an empty set when no leaf predicts positive.
RuleSet distill_rules(const MinedModel& model, int max_rules = 4);

struct FoldMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  /// Set when the fold had no predicted or no actual positives.
  bool degenerate = false;
};

struct CvMetrics {
  std::vector<FoldMetrics> folds;
  FoldMetrics mean;
  /// Share of held-out positives detected within one sentence of the
  /// annotated stopping point.
  double recall_near_rcp = 0.0;
};

/// K-fold cross-validation with deterministic fold assignment derived from
/// (params.seed, window ordinal). Throws ValidationError when folds < 2 or
/// there are fewer positives than folds.
CvMetrics cross_validate(const std::vector<LabeledWindow>& windows, int folds,
                         const MinerParams& params = {});

}  // namespace rcpd
