#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcpd/rules.hpp"

namespace rcpd {

/// Corpus line format version; written on every trace line.
inline constexpr int kSchemaVersion = 1;

/// Where a replay cuts thinking: at a sentence boundary (keep sentences
/// 0..index, where index 0 keeps none and costs zero thinking tokens) or
/// not at all. Full compares greater than any index.
class TruncateAt {
 public:
  constexpr TruncateAt() = default;
  static constexpr TruncateAt full() { return TruncateAt{}; }
  static constexpr TruncateAt at(int index) {
    TruncateAt t;
    t.index_ = index;
    return t;
  }

  constexpr bool is_full() const { return index_ < 0; }
  /// Only meaningful when !is_full().
  constexpr int index() const { return index_; }

  /// Key used in serialized outcome maps: "full" or the decimal index.
  std::string key() const;
  static TruncateAt from_key(const std::string& key);

  friend constexpr bool operator==(TruncateAt, TruncateAt) = default;
  friend constexpr auto operator<=>(TruncateAt a, TruncateAt b) {
    return a.order_key() <=> b.order_key();
  }

 private:
  constexpr std::int64_t order_key() const {
    return is_full() ? std::numeric_limits<std::int64_t>::max() : index_;
  }
  int index_ = -1;
};

/// Per-sentence measurements taken at a sentence boundary inside thinking.
struct SentenceRecord {
  int index = 0;
  /// Thinking tokens consumed through the end of this sentence.
  std::int64_t think_tokens_cum = 0;
  /// Rank of the end-of-thinking token at this boundary (capped).
  Rank eot_rank = kDefaultRankCap;
  /// Sentence opens with a reconsideration cue ("Wait", "Alternatively", ...).
  bool trigger_word = false;
  /// Confidence of the provisional boxed answer probed at this boundary.
  std::optional<double> boxed_confidence;
  std::optional<std::string> text_digest;
  bool operator==(const SentenceRecord&) const = default;
};

/// What happened when generation was forced to answer after a given cut.
struct TruncationOutcome {
  std::int64_t content_tokens = 0;
  bool correct = false;
  bool looped = false;
  bool operator==(const TruncationOutcome&) const = default;
};

struct ReasoningTrace {
  std::string trace_id;
  /// Sentence index where the answer is already determined, when annotated.
  std::optional<int> rcp_index;
  std::vector<SentenceRecord> sentences;
  /// Recorded replay outcomes; always contains the full() entry.
  std::map<TruncateAt, TruncationOutcome> outcomes;
  std::int64_t full_think_tokens = 0;
  std::map<std::string, std::string> meta;
  bool operator==(const ReasoningTrace&) const = default;

  /// Thinking-token cost of a cut: 0 at index 0, cumulative tokens at the
  /// cut sentence otherwise, full_think_tokens for full().
  std::int64_t think_tokens_at(TruncateAt at) const;
};

struct Corpus {
  std::string name;
  std::vector<ReasoningTrace> traces;
  int schema_version = kSchemaVersion;
  bool operator==(const Corpus&) const = default;
};

/// Throws ValidationError naming the trace id and offending field.
void validate_trace(const ReasoningTrace& trace);
void validate_corpus(const Corpus& corpus);

/// Exact outcome lookup; missing entries raise ReplayError naming the trace
/// and cut. Outcomes are never interpolated.
const TruncationOutcome& lookup_outcome(const ReasoningTrace& trace,
                                        TruncateAt at);

nlohmann::json trace_to_json(const ReasoningTrace& trace);
ReasoningTrace trace_from_json(const nlohmann::json& doc);

/// One trace per line. Serialization is byte-stable: keys are emitted in a
/// fixed order and optional fields are omitted when absent.
std::string corpus_to_text(const Corpus& corpus);
Corpus corpus_from_text(const std::string& text, const std::string& name);

/// File variants; the corpus name is the file stem.
Corpus parse_corpus(const std::string& path);
void write_corpus(const Corpus& corpus, const std::string& path);

}  // namespace rcpd
