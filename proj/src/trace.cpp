#include "rcpd/trace.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "rcpd/errors.hpp"

namespace rcpd {

std::string TruncateAt::key() const {
  return is_full() ? "full" : std::to_string(index_);
}

TruncateAt TruncateAt::from_key(const std::string& key) {
  if (key == "full") return full();
  int value = 0;
  const auto [ptr, ec] =
      std::from_chars(key.data(), key.data() + key.size(), value);
  if (ec != std::errc{} || ptr != key.data() + key.size() || value < 0) {
    throw ParseError("bad outcome key: \"" + key + "\"");
  }
  return at(value);
}

std::int64_t ReasoningTrace::think_tokens_at(TruncateAt at) const {
  if (at.is_full()) return full_think_tokens;
  if (at.index() == 0) return 0;
  const auto i = static_cast<std::size_t>(at.index());
  if (i >= sentences.size()) {
    throw ValidationError("trace " + trace_id + ": truncation index " +
                          std::to_string(at.index()) +
                          " beyond last sentence");
  }
  return sentences[i].think_tokens_cum;
}

void validate_trace(const ReasoningTrace& trace) {
  if (trace.trace_id.empty()) {
    throw ValidationError("trace with empty trace_id");
  }
  const std::string who = "trace " + trace.trace_id;
  if (trace.sentences.empty()) {
    throw ValidationError(who + ": sentences is empty");
  }
  std::int64_t prev_cum = 0;
  for (std::size_t i = 0; i < trace.sentences.size(); ++i) {
    const auto& s = trace.sentences[i];
    if (s.index != static_cast<int>(i)) {
      throw ValidationError(who + ": sentence index " +
                            std::to_string(s.index) + " at position " +
                            std::to_string(i) + " (must be contiguous from 0)");
    }
    if (s.think_tokens_cum <= prev_cum) {
      throw ValidationError(who +
                            ": think_tokens_cum must increase at sentence " +
                            std::to_string(i));
    }
    prev_cum = s.think_tokens_cum;
    if (s.eot_rank < 1) {
      throw ValidationError(who + ": eot_rank below 1 at sentence " +
                            std::to_string(i));
    }
    if (s.boxed_confidence &&
        (*s.boxed_confidence < 0.0 || *s.boxed_confidence > 1.0)) {
      throw ValidationError(who + ": boxed_confidence outside [0,1]" +
                            " at sentence " + std::to_string(i));
    }
  }
  if (trace.full_think_tokens != prev_cum) {
    throw ValidationError(
        who + ": full_think_tokens must equal the last think_tokens_cum");
  }
  if (!trace.outcomes.contains(TruncateAt::full())) {
    throw ValidationError(who + ": outcomes missing the \"full\" entry");
  }
  for (const auto& [at, outcome] : trace.outcomes) {
    if (!at.is_full() &&
        at.index() >= static_cast<int>(trace.sentences.size())) {
      throw ValidationError(who + ": outcome key " + at.key() +
                            " beyond last sentence");
    }
    if (outcome.content_tokens < 0) {
      throw ValidationError(who + ": negative content_tokens at outcome " +
                            at.key());
    }
    if (outcome.looped && outcome.correct) {
      throw ValidationError(who + ": outcome " + at.key() +
                            " is looped yet marked correct");
    }
  }
  if (trace.rcp_index &&
      (*trace.rcp_index < 0 ||
       *trace.rcp_index >= static_cast<int>(trace.sentences.size()))) {
    throw ValidationError(who + ": rcp_index outside sentence range");
  }
}

void validate_corpus(const Corpus& corpus) {
  if (corpus.traces.empty()) {
    throw ValidationError("empty corpus: " + corpus.name);
  }
  std::set<std::string> ids;
  for (const auto& trace : corpus.traces) {
    validate_trace(trace);
    if (!ids.insert(trace.trace_id).second) {
      throw ValidationError("duplicate trace_id: " + trace.trace_id);
    }
  }
}

const TruncationOutcome& lookup_outcome(const ReasoningTrace& trace,
                                        TruncateAt at) {
  const auto it = trace.outcomes.find(at);
  if (it == trace.outcomes.end()) {
    throw ReplayError("outcome not recorded for trace " + trace.trace_id +
                      " at " + at.key());
  }
  return it->second;
}

nlohmann::json trace_to_json(const ReasoningTrace& trace) {
  nlohmann::json sentences = nlohmann::json::array();
  for (const auto& s : trace.sentences) {
    nlohmann::json rec{{"index", s.index},
                       {"think_tokens_cum", s.think_tokens_cum},
                       {"eot_rank", s.eot_rank}};
    if (s.trigger_word) rec["trigger_word"] = true;
    if (s.boxed_confidence) rec["boxed_confidence"] = *s.boxed_confidence;
    if (s.text_digest) rec["text_digest"] = *s.text_digest;
    sentences.push_back(std::move(rec));
  }
  nlohmann::json outcomes = nlohmann::json::object();
  for (const auto& [at, outcome] : trace.outcomes) {
    outcomes[at.key()] = {{"content_tokens", outcome.content_tokens},
                          {"correct", outcome.correct},
                          {"looped", outcome.looped}};
  }
  nlohmann::json doc{{"trace_id", trace.trace_id},
                     {"schema_version", kSchemaVersion},
                     {"full_think_tokens", trace.full_think_tokens},
                     {"sentences", std::move(sentences)},
                     {"outcomes", std::move(outcomes)}};
  if (trace.rcp_index) doc["rcp_index"] = *trace.rcp_index;
  if (!trace.meta.empty()) doc["meta"] = trace.meta;
  return doc;
}

namespace {

template <typename T>
T require(const nlohmann::json& doc, const char* field,
          const std::string& who) {
  if (!doc.contains(field)) {
    throw ParseError(who + ": missing field \"" + field + "\"");
  }
  try {
    return doc.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(who + ": field \"" + field + "\" has the wrong type");
  }
}

}  // namespace

ReasoningTrace trace_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("trace line is not a JSON object");
  ReasoningTrace trace;
  trace.trace_id = require<std::string>(doc, "trace_id", "trace");
  const std::string who = "trace " + trace.trace_id;

  const int version = require<int>(doc, "schema_version", who);
  if (version != kSchemaVersion) {
    throw ParseError(who + ": unsupported schema_version " +
                     std::to_string(version));
  }
  trace.full_think_tokens =
      require<std::int64_t>(doc, "full_think_tokens", who);
  if (doc.contains("rcp_index")) {
    trace.rcp_index = require<int>(doc, "rcp_index", who);
  }
  if (doc.contains("meta")) {
    trace.meta = require<std::map<std::string, std::string>>(doc, "meta", who);
  }

  if (!doc.contains("sentences") || !doc.at("sentences").is_array()) {
    throw ParseError(who + ": missing field \"sentences\"");
  }
  for (const auto& rec : doc.at("sentences")) {
    SentenceRecord s;
    s.index = require<int>(rec, "index", who);
    s.think_tokens_cum = require<std::int64_t>(rec, "think_tokens_cum", who);
    s.eot_rank = require<Rank>(rec, "eot_rank", who);
    if (rec.contains("trigger_word")) {
      s.trigger_word = require<bool>(rec, "trigger_word", who);
    }
    if (rec.contains("boxed_confidence")) {
      s.boxed_confidence = require<double>(rec, "boxed_confidence", who);
    }
    if (rec.contains("text_digest")) {
      s.text_digest = require<std::string>(rec, "text_digest", who);
    }
    trace.sentences.push_back(std::move(s));
  }

  if (!doc.contains("outcomes") || !doc.at("outcomes").is_object()) {
    throw ParseError(who + ": missing field \"outcomes\"");
  }
  for (const auto& [key, value] : doc.at("outcomes").items()) {
    TruncationOutcome outcome;
    outcome.content_tokens = require<std::int64_t>(value, "content_tokens", who);
    outcome.correct = require<bool>(value, "correct", who);
    outcome.looped = require<bool>(value, "looped", who);
    trace.outcomes[TruncateAt::from_key(key)] = outcome;
  }

  validate_trace(trace);
  return trace;
}

std::string corpus_to_text(const Corpus& corpus) {
  validate_corpus(corpus);
  std::string out;
  for (const auto& trace : corpus.traces) {
    out += trace_to_json(trace).dump();
    out += '\n';
  }
  return out;
}

Corpus corpus_from_text(const std::string& text, const std::string& name) {
  Corpus corpus;
  corpus.name = name;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    try {
      corpus.traces.push_back(trace_from_json(doc));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  validate_corpus(corpus);
  return corpus;
}

Corpus parse_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open corpus file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return corpus_from_text(buf.str(), std::filesystem::path(path).stem());
}

void write_corpus(const Corpus& corpus, const std::string& path) {
  const std::string text = corpus_to_text(corpus);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open corpus file for writing: " + path);
  out << text;
}

}  // namespace rcpd
