#pragma once

// Hand-built traces and corpora shared across test suites.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rcpd/rng.hpp"
#include "rcpd/trace.hpp"

namespace rcpd::testing {

// A trace with the given boundary ranks, one sentence per rank, 100 think
// tokens per sentence, and an outcome recorded at every cut. Content shrinks
// with depth so deeper cuts are cheaper overall; everything at depth >=
// correct_from is correct.
inline ReasoningTrace make_trace(const std::string& id,
                                 const std::vector<Rank>& ranks,
                                 int correct_from = 0,
                                 std::optional<int> rcp = {}) {
  ReasoningTrace t;
  t.trace_id = id;
  t.rcp_index = rcp;
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    SentenceRecord s;
    s.index = static_cast<int>(i);
    s.think_tokens_cum = static_cast<std::int64_t>(100 * (i + 1));
    s.eot_rank = ranks[i];
    t.sentences.push_back(s);
  }
  t.full_think_tokens = t.sentences.back().think_tokens_cum;
  const int n = static_cast<int>(ranks.size());
  for (int d = 0; d <= n; ++d) {
    TruncationOutcome o;
    o.content_tokens = 50 + 10 * (n - d);
    o.correct = d >= correct_from;
    t.outcomes[d < n ? TruncateAt::at(d) : TruncateAt::full()] = o;
  }
  return t;
}

// Random but valid rank vector for property tests; ranks cluster at both
// the interesting low thresholds and the sentinel.
inline std::vector<Rank> random_ranks(Rng& rng, int n, Rank cap) {
  static constexpr Rank kAnchors[] = {1, 4, 5, 6, 10, 11, 20, 21,
                                      50, 51, 100, 101, 1000, 1001};
  std::vector<Rank> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    if (rng.bernoulli(0.5)) {
      out.push_back(std::min(kAnchors[rng.uniform_int(0, 13)], cap));
    } else {
      out.push_back(static_cast<Rank>(rng.uniform_int(1, cap)));
    }
  }
  return out;
}

// Unique path under the system temp directory; removed by the caller.
inline std::filesystem::path temp_file(const std::string& stem) {
  static int counter = 0;
  auto dir = std::filesystem::temp_directory_path() / "rcpd_tests";
  std::filesystem::create_directories(dir);
  return dir / (stem + "_" + std::to_string(counter++));
}

}  // namespace rcpd::testing
