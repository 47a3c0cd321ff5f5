#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "rcpd/rules.hpp"

namespace rcpd {

/// One decoded token with the end-of-thinking rank probed at that step.
struct TokenEvent {
  std::int64_t step = 0;
  std::string text;
  Rank eot_rank = kDefaultRankCap;
};

struct BoundaryEvent {
  int sentence_index = 0;
  /// Step of the token holding the boundary character.
  std::int64_t at_step = 0;
  Rank eot_rank_at_boundary = kDefaultRankCap;
  bool operator==(const BoundaryEvent&) const = default;
};

struct SegmenterOptions {
  /// Characters that may end a sentence when followed by whitespace or the
  /// end of the stream.
  std::string boundary_punctuation = ".?!";
  /// Suppress '.' with a digit on both sides. Subsumed by the whitespace
  /// requirement (a digit after the mark is never whitespace); kept as
  /// explicit config beside the abbreviation list.
  bool decimal_guard = true;
  /// Suppress '.' immediately after any of these strings ("e.g", "Dr", ...).
  std::vector<std::string> abbreviations;
  /// A blank line ("\n\n") ends a sentence even without punctuation.
  bool blank_line_boundary = true;
  /// Every newline ends a sentence (for line-oriented text).
  bool single_newline_boundary = false;
};

/// Streaming sentence-boundary detector over a token stream.
///
/// Pure character-level state machine: the boundary set depends only on the
/// concatenated text, never on where token edges fall, so feeding the whole
/// text as one token yields the same boundaries as any token split. Because
/// "punctuation followed by whitespace" needs one character of lookahead, a
/// boundary at a token-final punctuation mark is confirmed by the next
/// token's first character, or by finish() at end of stream.
///
/// Memory is O(1) in stream length. Consecutive punctuation marks yield one
/// boundary; a sentence must contain at least one non-whitespace,
/// non-punctuation character.
class Segmenter {
 public:
  explicit Segmenter(SegmenterOptions options = {});

  /// Feeds the next token; steps must be consecutive from 0. Returns the
  /// first boundary this token confirmed, if any.
  std::optional<BoundaryEvent> feed(const TokenEvent& event);

  /// Drains further boundaries confirmed by the same feed, in order.
  std::optional<BoundaryEvent> poll();

  /// Ends the stream, resolving a still-pending boundary at the last token.
  std::optional<BoundaryEvent> finish();

  int sentences_emitted() const { return emitted_; }

 private:
  void process_char(char c);
  void emit_pending();
  void emit_here();
  bool abbreviation_before_dot() const;

  SegmenterOptions options_;
  std::size_t max_abbrev_len_ = 0;

  std::int64_t expected_step_ = 0;
  std::int64_t cur_step_ = 0;
  Rank cur_rank_ = kDefaultRankCap;

  bool pending_ = false;
  std::int64_t pending_step_ = 0;
  Rank pending_rank_ = 0;

  bool seen_content_ = false;
  int newline_run_ = 0;
  std::string tail_;
  std::deque<BoundaryEvent> out_;
  int emitted_ = 0;
  bool finished_ = false;
};

}  // namespace rcpd
