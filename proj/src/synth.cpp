#include "rcpd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "rcpd/errors.hpp"
#include "rcpd/rng.hpp"
#include "rcpd/strategies.hpp"

namespace rcpd {

SynthParams SynthParams::tiny() {
  SynthParams p;
  p.n_traces = 20;
  p.rcp_index_dist = {10, 14};
  p.stage1_len = 3;
  p.approach_window = 4;
  p.post_rcp_sentences = 6;
  p.token_cap = 4000;
  return p;
}

void SynthParams::validate() const {
  if (n_traces < 1) throw ValidationError("synth: n_traces must be >= 1");
  if (rcp_index_dist.lo > rcp_index_dist.hi || rcp_index_dist.lo < 1) {
    throw ValidationError("synth: bad rcp_index_dist range");
  }
  if (rank_far.lo <= 0.0 || rank_far.lo > rank_far.hi) {
    throw ValidationError("synth: bad rank_far range");
  }
  if (approach_window < 1) {
    throw ValidationError("synth: approach_window must be >= 1");
  }
  if (p_false_approach < 0.0 || p_false_approach > 1.0) {
    throw ValidationError("synth: p_false_approach must lie in [0,1]");
  }
  if (accuracy_ramp_shape <= 0.0 || accuracy_ramp_shape > 1.0) {
    throw ValidationError("synth: accuracy_ramp_shape must lie in (0,1]");
  }
  if (stage1_len < 1) throw ValidationError("synth: stage1_len must be >= 1");
  if (stage1_len + accuracy_ramp_lead + 1 > rcp_index_dist.lo) {
    throw ValidationError(
        "synth: stage1_len + accuracy_ramp_lead must leave room for the "
        "accuracy ramp before the earliest rcp index");
  }
  for (const double p : {p_correct_stage1, p_correct_plateau, p_loop}) {
    if (p < 0.0 || p > 1.0) {
      throw ValidationError("synth: probabilities must lie in [0,1]");
    }
  }
  if (p_correct_stage1 > p_correct_plateau) {
    throw ValidationError("synth: accuracy must ramp upward");
  }
  if (compensation_slope < 0.0) {
    throw ValidationError("synth: compensation_slope must be >= 0");
  }
  if (tokens_per_sentence.lo < 1 ||
      tokens_per_sentence.lo > tokens_per_sentence.hi) {
    throw ValidationError("synth: bad tokens_per_sentence range");
  }
  if (content_base < 1) throw ValidationError("synth: content_base must be >= 1");
  if (reflection_tokens_per_sentence < 1) {
    throw ValidationError("synth: reflection_tokens_per_sentence must be >= 1");
  }
  if (outcome_stride < 1) {
    throw ValidationError("synth: outcome_stride must be >= 1");
  }
  if (rank_cap < 8) throw ValidationError("synth: rank_cap too small");
}

namespace {

Rank clamp_rank(double value, Rank cap) {
  if (value < 1.0) return 1;
  if (value >= static_cast<double>(cap)) return cap;
  return static_cast<Rank>(value);
}

// Feint schedule: trace `ordinal` carries a feint iff the running quota
// floor((ordinal + 1) * rate) advances there. This spreads feints evenly at
// the exact configured rate instead of leaving the per-corpus count to
// chance, so replay accuracy and rule-mining signal do not drift with the
// seed. The snap-back offset cycles through a fixed 25-slot interleave
// (10/6/4/3/2 slots for offsets 1..5), holding the class mix constant so
// each offset's share of the separating signal is graded and stable.
bool feint_scheduled(double rate, int ordinal) {
  return std::floor((ordinal + 1) * rate) > std::floor(ordinal * rate);
}

int feint_tell_offset(double rate, int ordinal) {
  static constexpr int kCycle[25] = {1, 2, 1, 3, 1, 2, 4, 1, 3, 1, 2, 5, 1,
                                     4, 1, 2, 3, 1, 2, 1, 4, 3, 5, 1, 2};
  const int count_before = static_cast<int>(std::floor(ordinal * rate));
  return kCycle[count_before % 25];
}

ReasoningTrace generate_trace(const SynthParams& p, int ordinal) {
  Rng rng = Rng::substream(p.seed, static_cast<std::uint64_t>(ordinal));

  // Draw order below is part of the determinism contract; append new draws
  // at the end only.
  const int rcp =
      static_cast<int>(rng.uniform_int(p.rcp_index_dist.lo, p.rcp_index_dist.hi));
  int stage1 = static_cast<int>(
      rng.uniform_int(std::max(1, p.stage1_len - 2), p.stage1_len + 2));
  stage1 = std::min(stage1, rcp - p.accuracy_ramp_lead - 1);
  const int tail = static_cast<int>(rng.uniform_int(
      std::max(1, p.post_rcp_sentences - 4), p.post_rcp_sentences + 4));
  const int n_sentences = rcp + 1 + tail;

  ReasoningTrace trace;
  char id[32];
  std::snprintf(id, sizeof(id), "synth-%05d", ordinal);
  trace.trace_id = id;
  trace.rcp_index = rcp;
  trace.meta = {{"source", "synth"}};

  // Thinking cost per sentence: full-width sentences up to S*, shorter
  // reflective sentences after it.
  std::int64_t cum = 0;
  std::vector<std::int64_t> cum_tokens(n_sentences);
  for (int i = 0; i < n_sentences; ++i) {
    std::int64_t step;
    if (i <= rcp) {
      step = rng.uniform_int(p.tokens_per_sentence.lo, p.tokens_per_sentence.hi);
    } else {
      step = std::max<std::int64_t>(
          1, p.reflection_tokens_per_sentence + rng.uniform_int(-10, 10));
    }
    cum += step;
    cum_tokens[i] = cum;
  }

  // Rank trajectory: far ranks, then a geometric decay across the approach
  // window landing in the top 5 exactly at S*, then a low noisy reflective
  // regime. The decay follows a shared profile anchored at the top of the
  // top-5 band, rank(S*-j) = 5 * (anchor/5)^(j/window) with anchor at the
  // geometric center of the far range, so each lookback offset has a tight
  // rank distribution across traces. Decayed values never enter the top 5,
  // keeping the window minimum at S*.
  const Rank landing = static_cast<Rank>(rng.uniform_int(1, 5));
  const int approach_start = rcp - p.approach_window;
  const double anchor = std::sqrt(p.rank_far.lo * p.rank_far.hi);
  const auto profile = [&p, anchor](int back) {
    return 5.0 * std::pow(anchor / 5.0, static_cast<double>(back) /
                                            static_cast<double>(p.approach_window));
  };

  std::vector<double> rank_raw(n_sentences);
  for (int i = 0; i < n_sentences; ++i) {
    if (i < approach_start) {
      rank_raw[i] = rng.log_uniform(p.rank_far.lo, p.rank_far.hi);
    } else if (i < rcp) {
      const double jitter = std::exp(rng.normal(0.0, 0.15));
      rank_raw[i] = std::max(profile(rcp - i) * jitter, 6.0);
    } else if (i == rcp) {
      rank_raw[i] = landing;
    } else {
      // Reflective tail: the end-of-thinking token hovers near the top but
      // above the top-5 band whose first entry defines S*.
      rank_raw[i] = rng.log_uniform(6.0, 80.0);
    }
  }

  // Exploration feint: an interrupted approach whose ranks trace the decay
  // profile into the top 5 one sentence before the real approach window
  // opens, except that one history slot snapped back to the far regime
  // where the approach restarted. Looking back from the dip, the feint
  // matches a true landing at every offset but the snap-back one, so each
  // lookback offset separates exactly its own feint class, and the scheduled
  // class mix grades how much separating signal each offset carries.
  if (feint_scheduled(p.p_false_approach, ordinal) && approach_start >= 7) {
    const int t = approach_start - 1;
    const int tell = feint_tell_offset(p.p_false_approach, ordinal);
    const double f_landing = static_cast<double>(rng.uniform_int(1, 5));
    const double snap_back = rng.log_uniform(p.rank_far.lo, p.rank_far.hi);
    rank_raw[t] = f_landing;
    for (int back = 1; back <= 5; ++back) {
      const double jitter = std::exp(rng.normal(0.0, 0.15));
      rank_raw[t - back] = back == tell
                               ? snap_back
                               : std::max(profile(back) * jitter, 6.0);
    }
  }

  for (int i = 0; i < n_sentences; ++i) {
    SentenceRecord s;
    s.index = i;
    s.think_tokens_cum = cum_tokens[i];
    s.eot_rank = clamp_rank(rank_raw[i], p.rank_cap);
    s.trigger_word = rng.bernoulli(i > rcp ? 0.5 : 0.15);
    const double conf =
        0.25 + 0.72 / (1.0 + std::exp(-(i - rcp - 2) / 1.5)) +
        rng.normal(0.0, 0.02);
    s.boxed_confidence = std::clamp(conf, 0.0, 1.0);
    trace.sentences.push_back(std::move(s));
  }

  // One latent draw decides correctness at every depth, so accuracy is a
  // deterministic step function of the depth-dependent success probability:
  // cuts past the ramp are correct exactly when the full run is.
  const double latent = rng.uniform();
  const int ramp_end = rcp - p.accuracy_ramp_lead;
  const auto p_correct = [&](int depth) {
    if (depth >= ramp_end) return p.p_correct_plateau;
    if (depth <= stage1) return p.p_correct_stage1;
    // Concave ramp: most of the quality is recovered soon after the opening
    // stage, with convergence completing at the plateau.
    const double t = std::pow(static_cast<double>(depth - stage1) /
                                  static_cast<double>(ramp_end - stage1),
                              p.accuracy_ramp_shape);
    return p.p_correct_stage1 + t * (p.p_correct_plateau - p.p_correct_stage1);
  };

  const std::int64_t full_think = cum_tokens[n_sentences - 1];
  trace.full_think_tokens = full_think;

  const double full_content_raw =
      static_cast<double>(p.content_base) +
      rng.normal(0.0, p.content_noise_scale * static_cast<double>(p.content_base));
  const bool loops = rng.bernoulli(p.p_loop);

  TruncationOutcome full_outcome;
  if (loops) {
    full_outcome.content_tokens = std::max<std::int64_t>(
        p.token_cap - full_think, static_cast<std::int64_t>(p.content_base));
    full_outcome.correct = false;
    full_outcome.looped = true;
  } else {
    full_outcome.content_tokens = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::lround(full_content_raw)));
    full_outcome.correct = latent < p.p_correct_plateau;
    full_outcome.looped = false;
  }
  const std::int64_t full_total = full_think + full_outcome.content_tokens;

  for (int depth = 0; depth < n_sentences; depth += p.outcome_stride) {
    const double compensation =
        p.compensation_slope * static_cast<double>(std::max(0, rcp - depth));
    const double noise =
        rng.normal(0.0, p.content_noise_scale * static_cast<double>(p.content_base));
    std::int64_t content = std::max<std::int64_t>(
        1, static_cast<std::int64_t>(
               std::lround(static_cast<double>(p.content_base) + compensation +
                           noise)));
    // Every cut must cost no more than the untruncated run.
    const std::int64_t think = depth == 0 ? 0 : cum_tokens[depth];
    content = std::min(content, full_total - think);
    TruncationOutcome out;
    out.content_tokens = std::max<std::int64_t>(1, content);
    out.correct = latent < p_correct(depth);
    out.looped = false;
    trace.outcomes[TruncateAt::at(depth)] = out;
  }
  trace.outcomes[TruncateAt::full()] = full_outcome;
  return trace;
}

}  // namespace

Corpus generate(const SynthParams& params) {
  params.validate();
  Corpus corpus;
  corpus.name = "synth";
  corpus.traces.reserve(params.n_traces);
  for (int i = 0; i < params.n_traces; ++i) {
    corpus.traces.push_back(generate_trace(params, i));
  }
  validate_corpus(corpus);
  return corpus;
}

std::vector<LabeledWindow> label_windows(const Corpus& corpus, Rank rank_cap) {
  std::vector<LabeledWindow> out;
  for (std::size_t t = 0; t < corpus.traces.size(); ++t) {
    const auto& trace = corpus.traces[t];
    if (!trace.rcp_index) {
      throw ValidationError("trace " + trace.trace_id +
                            ": rcp_index annotation required to label windows");
    }
    for (const auto& s : trace.sentences) {
      LabeledWindow lw;
      lw.window = window_at(trace, s.index, rank_cap);
      lw.is_rcp = s.index == *trace.rcp_index;
      lw.trace_ordinal = static_cast<int>(t);
      lw.sentence_index = s.index;
      lw.rcp_index = *trace.rcp_index;
      out.push_back(lw);
    }
  }
  return out;
}

}  // namespace rcpd
