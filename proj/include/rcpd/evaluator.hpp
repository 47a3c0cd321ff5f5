#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rcpd/strategies.hpp"
#include "rcpd/trace.hpp"

namespace rcpd {

/// Aggregate replay result for one strategy over one corpus.
struct StrategyReport {
  std::string strategy;
  double avg_total_tokens = 0.0;
  double accuracy_pct = 0.0;
  /// 100 * avg_total_tokens / the full strategy's avg_total_tokens.
  double compression_rate_pct = 0.0;
  double loop_rate_pct = 0.0;
  int n_traces = 0;
};

/// Replays every strategy over every trace. The full baseline is always
/// computed as the compression anchor and is prepended to the result when
/// not among the requested configs.
std::vector<StrategyReport> evaluate_corpus(
    const Corpus& corpus, const std::vector<StrategyConfig>& configs);

enum class ReportFormat { kTable, kCsv };

/// Renders reports with columns strategy, Token, Acc, CR, loop%.
/// Table output is monospace-aligned; CSV carries a header row. Output is
/// byte-stable for equal inputs.
std::string emit_report(const std::vector<StrategyReport>& reports,
                        ReportFormat format);

/// Mean content tokens and accuracy for one truncation depth across traces.
struct DepthBucket {
  int truncate_at = 0;
  double mean_content_tokens = 0.0;
  double accuracy_pct = 0.0;
  int n = 0;
};

/// Same aggregation keyed by distance from each trace's rcp_index.
struct RcpOffsetBucket {
  int offset = 0;
  double mean_content_tokens = 0.0;
  double accuracy_pct = 0.0;
  int n = 0;
};

struct StageStats {
  std::vector<DepthBucket> buckets;
  /// Pearson correlation between depth and content tokens over all
  /// (depth, outcome) pairs inside [window_lo, window_hi].
  double pearson_r = 0.0;
  /// Set when either variable had zero variance; pearson_r is then 0.
  bool degenerate_r = false;
  int window_lo = 0;
  int window_hi = 0;
  /// Empty when no trace carries an rcp_index annotation.
  std::vector<RcpOffsetBucket> rcp_aligned;
};

/// Profiles recorded outcomes by truncation depth. Every trace must carry
/// at least five integer truncation depths; otherwise throws ValidationError
/// ("insufficient truncation coverage"). The window defaults to the range
/// of depths present in every trace.
StageStats stage_profile(const Corpus& corpus,
                         std::optional<std::pair<int, int>> depth_window = {});

}  // namespace rcpd
