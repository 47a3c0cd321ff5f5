#include "rcpd/stream.hpp"

#include "rcpd/errors.hpp"

namespace rcpd {

StreamSession::StreamSession(std::string session_id, StreamOptions options)
    : session_id_(std::move(session_id)),
      options_(std::move(options)),
      segmenter_(options_.segmenter) {}

nlohmann::json StreamSession::check_boundary(const BoundaryEvent& boundary) {
  ++sentences_seen_;
  const RankWindow window = make_window(boundary.eot_rank_at_boundary,
                                        history_, options_.rank_cap);
  const StopDecision decision =
      evaluate(window, options_.rules, options_.rank_cap);
  if (decision.action == StopAction::kTerminateThinking) {
    stopped_ = true;
    fired_rule_ = decision.fired_rule;
    fired_sentence_ = boundary.sentence_index;
    return {{"type", "decision"},
            {"session_id", session_id_},
            {"action", "stop"},
            {"rule", *decision.fired_rule},
            {"sentence_index", boundary.sentence_index}};
  }
  history_.insert(history_.begin(),
                  std::min(boundary.eot_rank_at_boundary, options_.rank_cap));
  if (history_.size() > kHistoryLen) history_.resize(kHistoryLen);
  return nullptr;
}

nlohmann::json StreamSession::handle_token(const std::string& text,
                                           Rank eot_rank) {
  if (stopped_) {
    throw ReplayError("session already stopped: " + session_id_);
  }
  TokenEvent event{next_step_++, text, eot_rank};
  auto boundary = segmenter_.feed(event);
  while (boundary) {
    const nlohmann::json reply = check_boundary(*boundary);
    if (!reply.is_null()) return reply;
    boundary = segmenter_.poll();
  }
  if (options_.per_token) {
    const RankWindow window =
        make_window(eot_rank, history_, options_.rank_cap);
    const StopDecision decision =
        evaluate(window, options_.rules, options_.rank_cap);
    if (decision.action == StopAction::kTerminateThinking) {
      stopped_ = true;
      fired_rule_ = decision.fired_rule;
      fired_sentence_ = sentences_seen_;
      return {{"type", "decision"},
              {"session_id", session_id_},
              {"action", "stop"},
              {"rule", *decision.fired_rule},
              {"sentence_index", sentences_seen_}};
    }
  }
  return {{"type", "decision"},
          {"session_id", session_id_},
          {"action", "continue"}};
}

nlohmann::json StreamSession::handle_end() {
  if (!stopped_) {
    auto boundary = segmenter_.finish();
    while (boundary) {
      const nlohmann::json reply = check_boundary(*boundary);
      if (!reply.is_null()) break;  // stop recorded; summary reflects it
      boundary = segmenter_.poll();
    }
  }
  nlohmann::json reply{{"type", "summary"},
                       {"session_id", session_id_},
                       {"sentences_seen", sentences_seen_}};
  if (fired_rule_) {
    reply["fired_rule"] = *fired_rule_;
    reply["fired_sentence"] = *fired_sentence_;
  }
  return reply;
}

StreamController::StreamController(StreamOptions defaults)
    : defaults_(std::move(defaults)) {
  defaults_.rules.validate();
}

namespace {

nlohmann::json error_reply(const std::string& reason,
                           const std::optional<std::string>& session_id = {}) {
  nlohmann::json reply{{"type", "error"}, {"reason", reason}};
  if (session_id) reply["session_id"] = *session_id;
  return reply;
}

}  // namespace

nlohmann::json StreamController::handle_message(const nlohmann::json& message) {
  if (!message.is_object() || !message.contains("type") ||
      !message.at("type").is_string()) {
    return error_reply("malformed message: missing \"type\"");
  }
  const std::string type = message.at("type").get<std::string>();
  if (!message.contains("session_id") ||
      !message.at("session_id").is_string()) {
    return error_reply("malformed message: missing \"session_id\"");
  }
  const std::string session_id = message.at("session_id").get<std::string>();

  if (type == "start") {
    if (sessions_.contains(session_id)) {
      return error_reply("session already started", session_id);
    }
    StreamOptions options = defaults_;
    if (message.contains("rules")) {
      try {
        options.rules = rules_from_json(message.at("rules"));
      } catch (const Error& e) {
        return error_reply(std::string("bad rules: ") + e.what(), session_id);
      }
    }
    sessions_.emplace(session_id, StreamSession(session_id, std::move(options)));
    return {{"type", "ack"}, {"session_id", session_id}};
  }

  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    return error_reply("unknown session", session_id);
  }

  if (type == "token") {
    if (!message.contains("text") || !message.at("text").is_string() ||
        !message.contains("eot_rank") ||
        !message.at("eot_rank").is_number_unsigned()) {
      return error_reply(
          "malformed message: token needs \"text\" and \"eot_rank\"",
          session_id);
    }
    try {
      return it->second.handle_token(message.at("text").get<std::string>(),
                                     message.at("eot_rank").get<Rank>());
    } catch (const Error& e) {
      return error_reply(e.what(), session_id);
    }
  }

  if (type == "end") {
    const nlohmann::json reply = it->second.handle_end();
    sessions_.erase(it);
    return reply;
  }

  return error_reply("unknown message type: \"" + type + "\"", session_id);
}

std::string StreamController::handle_line(const std::string& line) {
  nlohmann::json message;
  try {
    message = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(std::string("malformed message: ") + e.what()).dump();
  }
  return handle_message(message).dump();
}

void StreamController::serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out << handle_line(line) << "\n";
    out.flush();
  }
}

}  // namespace rcpd
