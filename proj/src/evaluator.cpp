#include "rcpd/evaluator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "rcpd/errors.hpp"

namespace rcpd {

namespace {

StrategyReport replay_one(const Corpus& corpus, const StrategyConfig& config) {
  StrategyReport report;
  report.strategy = config.display_name();
  report.n_traces = static_cast<int>(corpus.traces.size());
  std::int64_t total = 0;
  int correct = 0;
  int looped = 0;
  for (const auto& trace : corpus.traces) {
    const StrategyOutcome out = run_strategy(config, trace);
    total += out.total_tokens;
    correct += out.correct ? 1 : 0;
    looped += out.looped ? 1 : 0;
  }
  const double n = static_cast<double>(report.n_traces);
  report.avg_total_tokens = static_cast<double>(total) / n;
  report.accuracy_pct = 100.0 * correct / n;
  report.loop_rate_pct = 100.0 * looped / n;
  return report;
}

}  // namespace

std::vector<StrategyReport> evaluate_corpus(
    const Corpus& corpus, const std::vector<StrategyConfig>& configs) {
  validate_corpus(corpus);
  for (const auto& config : configs) config.validate();

  std::vector<StrategyConfig> all = configs;
  const bool has_full =
      std::any_of(configs.begin(), configs.end(), [](const StrategyConfig& c) {
        return c.kind == StrategyKind::kFull;
      });
  if (!has_full) all.insert(all.begin(), StrategyConfig::full());

  std::vector<StrategyReport> reports;
  reports.reserve(all.size());
  double full_avg = 0.0;
  for (const auto& config : all) {
    StrategyReport report = replay_one(corpus, config);
    if (config.kind == StrategyKind::kFull) {
      full_avg = report.avg_total_tokens;
    }
    reports.push_back(std::move(report));
  }
  for (auto& report : reports) {
    report.compression_rate_pct =
        full_avg > 0.0 ? 100.0 * report.avg_total_tokens / full_avg : 0.0;
  }
  return reports;
}

namespace {

std::string fixed1(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.1f", value);
  return buf;
}

}  // namespace

std::string emit_report(const std::vector<StrategyReport>& reports,
                        ReportFormat format) {
  const char* const header[] = {"strategy", "Token", "Acc", "CR", "loop%"};
  std::vector<std::array<std::string, 5>> rows;
  for (const auto& r : reports) {
    rows.push_back({r.strategy, fixed1(r.avg_total_tokens),
                    fixed1(r.accuracy_pct), fixed1(r.compression_rate_pct),
                    fixed1(r.loop_rate_pct)});
  }

  std::string out;
  if (format == ReportFormat::kCsv) {
    out = "strategy,Token,Acc,CR,loop%\n";
    for (const auto& row : rows) {
      out += row[0];
      for (int i = 1; i < 5; ++i) {
        out += ',';
        out += row[i];
      }
      out += '\n';
    }
    return out;
  }

  std::array<std::size_t, 5> width{};
  for (int i = 0; i < 5; ++i) width[i] = std::string(header[i]).size();
  for (const auto& row : rows) {
    for (int i = 0; i < 5; ++i) width[i] = std::max(width[i], row[i].size());
  }
  const auto pad_left = [](const std::string& s, std::size_t w) {
    return std::string(w - s.size(), ' ') + s;
  };
  const auto pad_right = [](const std::string& s, std::size_t w) {
    return s + std::string(w - s.size(), ' ');
  };
  out += pad_right(header[0], width[0]);
  for (int i = 1; i < 5; ++i) {
    out += "  ";
    out += pad_left(header[i], width[i]);
  }
  out += '\n';
  for (const auto& row : rows) {
    out += pad_right(row[0], width[0]);
    for (int i = 1; i < 5; ++i) {
      out += "  ";
      out += pad_left(row[i], width[i]);
    }
    out += '\n';
  }
  return out;
}

StageStats stage_profile(const Corpus& corpus,
                         std::optional<std::pair<int, int>> depth_window) {
  validate_corpus(corpus);

  // Depths present in every trace bound the default window; each trace needs
  // enough recorded cuts for depth aggregates to mean anything.
  int common_lo = 0;
  int common_hi = std::numeric_limits<int>::max();
  for (const auto& trace : corpus.traces) {
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    int count = 0;
    for (const auto& [at, outcome] : trace.outcomes) {
      if (at.is_full()) continue;
      lo = std::min(lo, at.index());
      hi = std::max(hi, at.index());
      ++count;
    }
    if (count < 5) {
      throw ValidationError("insufficient truncation coverage: trace " +
                            trace.trace_id + " has " + std::to_string(count) +
                            " truncation depths (need at least 5)");
    }
    common_lo = std::max(common_lo, lo);
    common_hi = std::min(common_hi, hi);
  }

  StageStats stats;
  stats.window_lo = depth_window ? depth_window->first : common_lo;
  stats.window_hi = depth_window ? depth_window->second : common_hi;
  if (stats.window_lo > stats.window_hi) {
    throw ValidationError("stage profile window is empty");
  }

  struct Acc {
    double content = 0.0;
    int correct = 0;
    int n = 0;
  };
  std::map<int, Acc> by_depth;
  std::map<int, Acc> by_offset;
  double sum_d = 0.0, sum_c = 0.0, sum_dd = 0.0, sum_cc = 0.0, sum_dc = 0.0;
  std::int64_t pairs = 0;

  for (const auto& trace : corpus.traces) {
    for (const auto& [at, outcome] : trace.outcomes) {
      if (at.is_full()) continue;
      const int depth = at.index();
      auto& acc = by_depth[depth];
      acc.content += static_cast<double>(outcome.content_tokens);
      acc.correct += outcome.correct ? 1 : 0;
      acc.n += 1;
      if (trace.rcp_index) {
        auto& off = by_offset[depth - *trace.rcp_index];
        off.content += static_cast<double>(outcome.content_tokens);
        off.correct += outcome.correct ? 1 : 0;
        off.n += 1;
      }
      if (depth >= stats.window_lo && depth <= stats.window_hi) {
        const double d = depth;
        const double c = static_cast<double>(outcome.content_tokens);
        sum_d += d;
        sum_c += c;
        sum_dd += d * d;
        sum_cc += c * c;
        sum_dc += d * c;
        ++pairs;
      }
    }
  }

  for (const auto& [depth, acc] : by_depth) {
    stats.buckets.push_back({depth, acc.content / acc.n,
                             100.0 * acc.correct / acc.n, acc.n});
  }
  for (const auto& [offset, acc] : by_offset) {
    stats.rcp_aligned.push_back({offset, acc.content / acc.n,
                                 100.0 * acc.correct / acc.n, acc.n});
  }

  if (pairs >= 2) {
    const double n = static_cast<double>(pairs);
    const double var_d = sum_dd - sum_d * sum_d / n;
    const double var_c = sum_cc - sum_c * sum_c / n;
    const double cov = sum_dc - sum_d * sum_c / n;
    if (var_d <= 0.0 || var_c <= 0.0) {
      stats.degenerate_r = true;
    } else {
      stats.pearson_r = cov / std::sqrt(var_d * var_c);
    }
  } else {
    stats.degenerate_r = true;
  }
  return stats;
}

}  // namespace rcpd
