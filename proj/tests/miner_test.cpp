// Rule miner: boosted-tree training, gain-based importance, rule
// distillation, and cross-validation.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "rcpd/errors.hpp"
#include "rcpd/miner.hpp"
#include "rcpd/rng.hpp"
#include "rcpd/rules.hpp"
#include "rcpd/synth.hpp"

using namespace rcpd;

namespace {

LabeledWindow labeled(Rank current, std::vector<Rank> history, bool is_rcp,
                      int ordinal = 0, int sentence = 0, int rcp = 0) {
  LabeledWindow lw;
  lw.window = make_window(current, history);
  lw.is_rcp = is_rcp;
  lw.trace_ordinal = ordinal;
  lw.sentence_index = sentence;
  lw.rcp_index = rcp;
  return lw;
}

// Positive exactly when the current rank is in the top 5; history is noise.
// Guarantees currents 5 and 6 both occur so the learned cut is pinned.
std::vector<LabeledWindow> separable_windows(std::uint64_t seed, int n) {
  Rng rng = Rng::substream(seed, 0);
  std::vector<LabeledWindow> out;
  for (int i = 0; i < n; ++i) {
    const bool pos = i % 5 == 0;
    // Both sides of the 5/6 border stay dense so any subset of the data
    // still pins the separating cut to the same integer boundary.
    Rank current;
    if (i == 0) {
      current = 5;
    } else if (i == 1) {
      current = 6;
    } else if (pos) {
      current = i % 3 == 0 ? static_cast<Rank>(rng.uniform_int(1, 5)) : 5;
    } else {
      current = i % 3 == 0 ? static_cast<Rank>(rng.uniform_int(6, 1000)) : 6;
    }
    std::vector<Rank> hist;
    for (int b = 0; b < kHistoryLen; ++b) {
      hist.push_back(static_cast<Rank>(rng.uniform_int(1, 1000)));
    }
    // Each "trace" holds one positive at its annotated stopping sentence.
    out.push_back(labeled(current, hist, pos, i / 5, pos ? 7 : 1 + i % 5, 7));
  }
  return out;
}

Tree stump(int feature, double threshold, double gain, double left_value,
           double right_value) {
  Tree t;
  t.nodes.resize(3);
  t.nodes[0] = {feature, threshold, 0.0, gain, 1, 2};
  t.nodes[1].value = left_value;
  t.nodes[2].value = right_value;
  return t;
}

}  // namespace

TEST_CASE("a separable cut is learned at the exact boundary") {
  const auto windows = separable_windows(5, 60);

  MinerParams params;
  params.depth = 1;
  params.n_trees = 1;
  const auto model = train(windows, params);

  REQUIRE(model.trees.size() == 1);
  const auto& root = model.trees[0].nodes[0];
  REQUIRE(!root.is_leaf());
  CHECK(root.feature == 0);
  // Split in log2 space; mapped back it admits rank 5 and excludes 6.
  const double cut = std::exp2(root.threshold);
  CHECK(cut >= 5.0);
  CHECK(cut < 6.0);

  CHECK(model.importance[0] == doctest::Approx(100.0));
  for (int f = 1; f < kNumFeatures; ++f) {
    CHECK(model.importance[f] == doctest::Approx(0.0));
  }

  REQUIRE(model.distilled_rules.rules.size() == 1);
  const auto& rule = model.distilled_rules.rules[0];
  CHECK(rule.current_threshold == 5);
  CHECK(rule.history_thresholds.empty());
}

TEST_CASE("the separable shape survives deep trees and many rounds") {
  const auto windows = separable_windows(6, 80);
  const auto model = train(windows, MinerParams{});

  CHECK(model.importance[0] == doctest::Approx(100.0));
  REQUIRE(model.distilled_rules.rules.size() == 1);
  CHECK(model.distilled_rules.rules[0].current_threshold == 5);
  CHECK(model.distilled_rules.rules[0].history_thresholds.empty());

  // The ensemble agrees with its own distillation everywhere that matters.
  for (const auto& w : windows) {
    CHECK(model.predict(w.window) == w.is_rcp);
  }
}

TEST_CASE("raw-feature mode pins the same integer boundary") {
  const auto windows = separable_windows(7, 60);
  MinerParams params;
  params.depth = 1;
  params.n_trees = 1;
  params.log2_features = false;
  const auto model = train(windows, params);
  const auto& root = model.trees[0].nodes[0];
  CHECK(root.feature == 0);
  CHECK(root.threshold >= 5.0);
  CHECK(root.threshold < 6.0);
  REQUIRE(!model.distilled_rules.rules.empty());
  CHECK(model.distilled_rules.rules[0].current_threshold == 5);
}

TEST_CASE("training is deterministic and order-independent") {
  auto windows = separable_windows(8, 70);
  const auto a = train(windows, MinerParams{});

  const auto b = train(windows, MinerParams{});
  CHECK(a.importance == b.importance);
  CHECK(a.base_score == b.base_score);
  CHECK(a.distilled_rules == b.distilled_rules);

  std::mt19937 shuffler(123);
  std::shuffle(windows.begin(), windows.end(), shuffler);
  const auto c = train(windows, MinerParams{});
  CHECK(a.importance == c.importance);
  CHECK(a.base_score == c.base_score);
  CHECK(a.distilled_rules == c.distilled_rules);
  Rng rng = Rng::substream(31, 0);
  for (int i = 0; i < 200; ++i) {
    std::vector<Rank> hist;
    for (int b2 = 0; b2 < kHistoryLen; ++b2) {
      hist.push_back(static_cast<Rank>(rng.uniform_int(1, kDefaultRankCap)));
    }
    const auto w = make_window(static_cast<Rank>(rng.uniform_int(1, kDefaultRankCap)), hist);
    CHECK(a.predict_proba(w) == c.predict_proba(w));
  }
}

TEST_CASE("uninformative labels spread importance across features") {
  for (std::uint64_t rep = 0; rep < 10; ++rep) {
    Rng rng = Rng::substream(100 + rep, 0);
    std::vector<LabeledWindow> windows;
    for (int i = 0; i < 120; ++i) {
      std::vector<Rank> hist;
      for (int b = 0; b < kHistoryLen; ++b) {
        hist.push_back(static_cast<Rank>(rng.uniform_int(1, 1000)));
      }
      windows.push_back(labeled(static_cast<Rank>(rng.uniform_int(1, 1000)),
                                hist, rng.bernoulli(0.3)));
    }
    MinerParams params;
    params.n_trees = 10;
    const auto model = train(windows, params);
    const double top =
        *std::max_element(model.importance.begin(), model.importance.end());
    CAPTURE(rep);
    CHECK(top <= 60.0);

    double sum = 0.0;
    for (double v : model.importance) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(100.0).epsilon(1e-9));
  }
}

TEST_CASE("degenerate training inputs are rejected") {
  CHECK_THROWS_WITH_AS(train({}, MinerParams{}),
                       doctest::Contains("no training"), ValidationError);

  std::vector<LabeledWindow> all_neg;
  for (int i = 0; i < 10; ++i) all_neg.push_back(labeled(100, {7, 8, 9}, false));
  CHECK_THROWS_WITH_AS(train(all_neg, MinerParams{}),
                       doctest::Contains("single class"), ValidationError);

  std::vector<LabeledWindow> all_pos;
  for (int i = 0; i < 10; ++i) all_pos.push_back(labeled(2, {7, 8, 9}, true));
  CHECK_THROWS_WITH_AS(train(all_pos, MinerParams{}),
                       doctest::Contains("single class"), ValidationError);
}

TEST_CASE("parameter validation rejects out-of-range settings") {
  const auto reject = [](auto&& mutate) {
    MinerParams p;
    mutate(p);
    CHECK_THROWS_AS(p.validate(), ValidationError);
  };
  reject([](MinerParams& p) { p.depth = 0; });
  reject([](MinerParams& p) { p.depth = 7; });
  reject([](MinerParams& p) { p.n_trees = 0; });
  reject([](MinerParams& p) { p.learning_rate = 0.0; });
  reject([](MinerParams& p) { p.learning_rate = 1.5; });
  reject([](MinerParams& p) { p.positive_weight = -1.0; });
  reject([](MinerParams& p) { p.max_rules = 0; });
}

TEST_CASE("prediction routes through hand-built trees") {
  MinedModel model;
  model.base_score = 0.0;
  model.learning_rate = 1.0;
  model.log2_features = false;
  model.trees.push_back(stump(0, 5.5, 1.0, 1.0, -1.0));

  const auto low = make_window(3, std::vector<Rank>{});
  const auto high = make_window(100, std::vector<Rank>{});
  CHECK(model.predict_proba(low) == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  CHECK(model.predict_proba(high) == doctest::Approx(1.0 / (1.0 + std::exp(1.0))));
  CHECK(model.predict(low));
  CHECK(!model.predict(high));

  // Sentinel history maps to the cap before the (optional) log transform.
  model.log2_features = true;
  const auto x = model.features_of(make_window(1, std::vector<Rank>{}));
  CHECK(x[0] == doctest::Approx(0.0));
  for (int f = 1; f < kNumFeatures; ++f) {
    CHECK(x[f] == doctest::Approx(std::log2(static_cast<double>(kDefaultRankCap))));
  }
}

TEST_CASE("distillation keeps gain-ranked undominated positive paths") {
  MinedModel model;
  model.log2_features = false;
  model.learning_rate = 1.0;

  // {current <= 5}, gain 10.
  model.trees.push_back(stump(0, 5.5, 10.0, 1.0, -1.0));
  // {current <= 4}, gain 3: stops strictly less than the rule above.
  model.trees.push_back(stump(0, 4.5, 3.0, 0.5, -0.5));
  // {history[1] <= 50 and current <= 10}, gain 8 + 5.
  {
    Tree t;
    t.nodes.resize(5);
    t.nodes[0] = {1, 50.5, 0.0, 8.0, 1, 2};
    t.nodes[1] = {0, 10.5, 0.0, 5.0, 3, 4};
    t.nodes[2].value = -1.0;
    t.nodes[3].value = 1.0;
    t.nodes[4].value = -0.5;
    model.trees.push_back(t);
  }
  // Positive leaf that never bounds the current rank: not a stop rule.
  model.trees.push_back(stump(2, 20.5, 4.0, 2.0, -2.0));
  // Duplicate of the first conjunction at lower gain: merged away.
  model.trees.push_back(stump(0, 5.5, 1.0, 0.2, -0.2));

  const auto rules = distill_rules(model, 4);
  REQUIRE(rules.rules.size() == 2);
  CHECK(rules.rules[0].rule_id == "M1");
  CHECK(rules.rules[0].current_threshold == 10);
  REQUIRE(rules.rules[0].history_thresholds.size() == 1);
  CHECK(rules.rules[0].history_thresholds[0] == std::pair<int, Rank>{1, 50});
  CHECK(rules.rules[1].rule_id == "M2");
  CHECK(rules.rules[1].current_threshold == 5);
  CHECK(rules.rules[1].history_thresholds.empty());

  const auto only_one = distill_rules(model, 1);
  REQUIRE(only_one.rules.size() == 1);
  CHECK(only_one.rules[0].current_threshold == 10);

  CHECK_THROWS_AS(distill_rules(model, 0), ValidationError);

  // All-negative leaves distill to nothing.
  MinedModel negative;
  negative.log2_features = false;
  negative.trees.push_back(stump(0, 5.5, 10.0, -1.0, -2.0));
  CHECK(distill_rules(negative, 4).rules.empty());
}

TEST_CASE("synthetic corpus mining recovers the landing band first") {
  const auto corpus = generate(SynthParams::paper_like());
  const auto windows = label_windows(corpus);
  const auto model = train(windows, MinerParams{});

  // The current rank carries almost all of the signal; lookback offsets
  // contribute in strictly fading shares (closer sentences separate more
  // feint classes).
  CHECK(model.importance[0] > 90.0);
  for (int f = 1; f < kNumFeatures; ++f) {
    CHECK(model.importance[f] > 0.0);
    CHECK(model.importance[f] < model.importance[f - 1]);
  }

  REQUIRE(!model.distilled_rules.rules.empty());
  CHECK(model.distilled_rules.rules[0].current_threshold == 5);
  for (const auto& rule : model.distilled_rules.rules) {
    CHECK(rule.current_threshold <= 5);
  }
}

TEST_CASE("distilled rules match the ensemble on held-out traces") {
  auto params = SynthParams::paper_like();
  params.n_traces = 200;
  params.seed = 11;
  const auto corpus = generate(params);
  const auto windows = label_windows(corpus);

  std::vector<LabeledWindow> training, holdout;
  for (const auto& lw : windows) {
    (lw.trace_ordinal % 5 == 0 ? holdout : training).push_back(lw);
  }
  const auto model = train(training, MinerParams{});

  const auto f1_of = [&](auto&& predict) {
    double tp = 0, fp = 0, fn = 0;
    for (const auto& lw : holdout) {
      const bool hit = predict(lw.window);
      if (lw.is_rcp) {
        (hit ? tp : fn) += 1;
      } else if (hit) {
        fp += 1;
      }
    }
    return 2.0 * tp / (2.0 * tp + fp + fn);
  };
  const double ensemble_f1 = f1_of([&](const RankWindow& w) { return model.predict(w); });
  const double rules_f1 = f1_of([&](const RankWindow& w) {
    return evaluate(w, model.distilled_rules).action == StopAction::kTerminateThinking;
  });
  CHECK(ensemble_f1 > 0.9);
  CHECK(rules_f1 >= 0.9 * ensemble_f1);
}

TEST_CASE("cross-validation separates folds and reports means") {
  const auto windows = separable_windows(9, 100);
  const auto metrics = cross_validate(windows, 5, MinerParams{});
  REQUIRE(metrics.folds.size() == 5);
  for (const auto& fm : metrics.folds) {
    CHECK(fm.f1 == doctest::Approx(1.0));
    CHECK(!fm.degenerate);
  }
  CHECK(metrics.mean.precision == doctest::Approx(1.0));
  CHECK(metrics.mean.recall == doctest::Approx(1.0));
  CHECK(metrics.mean.f1 == doctest::Approx(1.0));
  CHECK(!metrics.mean.degenerate);
  CHECK(metrics.recall_near_rcp == doctest::Approx(1.0));
}

TEST_CASE("cross-validation flags folds without predicted positives") {
  const auto windows = separable_windows(10, 100);
  MinerParams params;
  params.n_trees = 2;
  // Down-weighted positives put the base score near -3 while leaf values
  // are bounded by 1/prior, so two rounds at this learning rate cannot
  // lift any probability past 0.5: no fold predicts a single positive.
  params.positive_weight = 0.2;
  params.learning_rate = 0.01;
  const auto metrics = cross_validate(windows, 4, params);
  CHECK(metrics.mean.degenerate);
  CHECK(metrics.recall_near_rcp == doctest::Approx(0.0));
}

TEST_CASE("cross-validation rejects impossible fold counts") {
  const auto windows = separable_windows(11, 100);
  CHECK_THROWS_WITH_AS(cross_validate(windows, 1, MinerParams{}),
                       doctest::Contains("folds"), ValidationError);

  std::vector<LabeledWindow> few = separable_windows(12, 100);
  int positives_kept = 0;
  std::vector<LabeledWindow> trimmed;
  for (const auto& lw : few) {
    if (lw.is_rcp && positives_kept >= 3) continue;
    positives_kept += lw.is_rcp ? 1 : 0;
    trimmed.push_back(lw);
  }
  CHECK_THROWS_WITH_AS(cross_validate(trimmed, 5, MinerParams{}),
                       doctest::Contains("fewer positive"), ValidationError);
}
