#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rcpd/rules.hpp"
#include "rcpd/trace.hpp"

namespace rcpd {

struct IntRange {
  int lo = 0;
  int hi = 0;  // inclusive
};

struct RealRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Generator parameters. Defaults are the "paper-like" preset: traces whose
/// boundary ranks start far from the top, descend geometrically across an
/// approach window to land within the top 5 at a designated sentence S*,
/// whose truncated-answer quality ramps up to a plateau just before S*, and
/// whose content length shrinks linearly as cuts approach S* (earlier cuts
/// force longer compensating answers).
struct SynthParams {
  int n_traces = 500;
  std::uint64_t seed = 42;

  /// Mean length of the shallow opening stage (flat low accuracy).
  int stage1_len = 6;
  /// S* is drawn uniformly from this range.
  IntRange rcp_index_dist{18, 26};
  /// Log-uniform rank range before the approach window.
  RealRange rank_far{200.0, 5000.0};
  /// Sentences over which ranks decay geometrically toward the top-5
  /// landing at S*.
  int approach_window = 8;
  /// Fraction of traces containing one exploration feint just before the
  /// approach window: an interrupted approach that dips into the top 5 but
  /// whose lookback shows where it snapped back to far ranks. Feints are
  /// scheduled at this exact rate (not sampled per trace) so the mix of
  /// snap-back offsets is stable; they are the hard negatives for rule
  /// mining (only lookback separates them from S*) and the occasional
  /// premature stop in replay.
  double p_false_approach = 0.10;

  double p_correct_stage1 = 0.1;
  double p_correct_plateau = 0.8;
  /// Content tokens added per sentence cut short of S*.
  double compensation_slope = 40.0;
  std::int64_t content_base = 300;
  /// Thinking tokens per sentence after S* (the reflective tail).
  std::int64_t reflection_tokens_per_sentence = 60;
  /// Chance the untruncated run loops until the token cap.
  double p_loop = 0.04;
  std::int64_t token_cap = 8000;

  IntRange tokens_per_sentence{45, 70};
  /// Mean sentences after S* in the untruncated trace.
  int post_rcp_sentences = 12;
  /// Content noise stddev as a fraction of content_base.
  double content_noise_scale = 0.05;
  /// The accuracy plateau is reached this many sentences before S*.
  int accuracy_ramp_lead = 2;
  /// Exponent shaping the accuracy ramp between the opening stage and the
  /// plateau: p(correct) follows frac^shape of the ramp span, so values
  /// below 1 rise quickly right after the opening stage.
  double accuracy_ramp_shape = 0.15;
  /// Record an outcome every this many sentence depths.
  int outcome_stride = 1;
  Rank rank_cap = kDefaultRankCap;

  static SynthParams paper_like() { return {}; }
  static SynthParams tiny();

  void validate() const;

  /// Depth window where every generated trace is still compensating:
  /// [stage1_len, rcp_index_dist.lo].
  std::pair<int, int> compensatory_window() const {
    return {stage1_len, rcp_index_dist.lo};
  }
};

/// Deterministic generation: equal params give byte-identical corpora, and
/// each trace is drawn from its own (seed, ordinal) substream.
Corpus generate(const SynthParams& params);

/// One rank window per sentence, labeled with whether the sentence is the
/// designated stopping point.
struct LabeledWindow {
  RankWindow window;
  bool is_rcp = false;
  int trace_ordinal = 0;
  int sentence_index = 0;
  int rcp_index = 0;
};

/// Throws ValidationError if any trace lacks an rcp_index annotation.
std::vector<LabeledWindow> label_windows(const Corpus& corpus,
                                         Rank rank_cap = kDefaultRankCap);

}  // namespace rcpd
