#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcpd/rules.hpp"
#include "rcpd/segmenter.hpp"

namespace rcpd {

struct StreamOptions {
  RuleSet rules = default_rcpd_rules();
  SegmenterOptions segmenter;
  Rank rank_cap = kDefaultRankCap;
  /// Also test the rule window against every raw token, not only at
  /// sentence boundaries.
  bool per_token = false;
};

/// One live generation being watched. Ranks observed at confirmed sentence
/// boundaries feed the rule window; state is O(1) in stream length.
class StreamSession {
 public:
  StreamSession(std::string session_id, StreamOptions options);

  /// Decision for one streamed token: continue, or stop naming the fired
  /// rule and sentence. Throws ReplayError once stopped.
  nlohmann::json handle_token(const std::string& text, Rank eot_rank);

  /// Final summary; flushes a pending boundary at end of stream first.
  nlohmann::json handle_end();

  bool stopped() const { return stopped_; }
  int sentences_seen() const { return sentences_seen_; }

 private:
  nlohmann::json check_boundary(const BoundaryEvent& boundary);

  std::string session_id_;
  StreamOptions options_;
  Segmenter segmenter_;
  /// Boundary ranks, most recent first, capped at kHistoryLen entries.
  std::vector<Rank> history_;
  std::int64_t next_step_ = 0;
  int sentences_seen_ = 0;
  bool stopped_ = false;
  std::optional<std::string> fired_rule_;
  std::optional<int> fired_sentence_;
};

/// Routes NDJSON messages to sessions. Requests carry a "type" of "start",
/// "token" or "end"; replies are "ack", "decision", "summary" or "error".
/// A malformed line yields an error reply and leaves every session intact.
class StreamController {
 public:
  explicit StreamController(StreamOptions defaults = {});

  /// One reply object per request object.
  nlohmann::json handle_message(const nlohmann::json& message);

  /// One reply line per request line; never throws.
  std::string handle_line(const std::string& line);

  /// Pumps an NDJSON conversation: reads lines from `in` until EOF, writes
  /// one reply line each to `out`.
  void serve(std::istream& in, std::ostream& out);

 private:
  StreamOptions defaults_;
  std::map<std::string, StreamSession> sessions_;
};

}  // namespace rcpd
