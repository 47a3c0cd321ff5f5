#include "rcpd/segmenter.hpp"

#include <algorithm>
#include <cctype>

#include "rcpd/errors.hpp"

namespace rcpd {

namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

}  // namespace

Segmenter::Segmenter(SegmenterOptions options) : options_(std::move(options)) {
  for (const auto& abbrev : options_.abbreviations) {
    max_abbrev_len_ = std::max(max_abbrev_len_, abbrev.size());
  }
}

std::optional<BoundaryEvent> Segmenter::feed(const TokenEvent& event) {
  if (finished_) throw ValidationError("segmenter fed after finish()");
  if (event.step != expected_step_) {
    throw ValidationError("token step " + std::to_string(event.step) +
                          " out of order (expected " +
                          std::to_string(expected_step_) + ")");
  }
  ++expected_step_;
  cur_step_ = event.step;
  cur_rank_ = event.eot_rank;
  for (const char c : event.text) process_char(c);
  return poll();
}

std::optional<BoundaryEvent> Segmenter::poll() {
  if (out_.empty()) return std::nullopt;
  BoundaryEvent b = out_.front();
  out_.pop_front();
  return b;
}

std::optional<BoundaryEvent> Segmenter::finish() {
  if (!finished_) {
    finished_ = true;
    // End of stream counts as the whitespace that confirms a pending mark.
    if (pending_) emit_pending();
  }
  return poll();
}

void Segmenter::emit_pending() {
  out_.push_back({emitted_++, pending_step_, pending_rank_});
  pending_ = false;
  seen_content_ = false;
}

void Segmenter::emit_here() {
  out_.push_back({emitted_++, cur_step_, cur_rank_});
  seen_content_ = false;
}

bool Segmenter::abbreviation_before_dot() const {
  for (const auto& abbrev : options_.abbreviations) {
    if (abbrev.size() <= tail_.size() &&
        std::equal(abbrev.rbegin(), abbrev.rend(), tail_.rbegin())) {
      return true;
    }
  }
  return false;
}

void Segmenter::process_char(char c) {
  const bool space = is_space(c);

  if (pending_) {
    if (space) {
      // Punctuation followed by whitespace: the boundary is confirmed at
      // the step that held the mark.
      emit_pending();
    } else {
      // Followed by text instead: not a boundary. A decimal point ("3.14")
      // always resolves here because its next character is a digit, never
      // whitespace, so the decimal guard is subsumed by the whitespace rule.
      pending_ = false;
    }
  }

  if (c == '\n') {
    ++newline_run_;
    const bool blank_line =
        options_.blank_line_boundary && newline_run_ == 2 && seen_content_;
    const bool every_line = options_.single_newline_boundary && seen_content_;
    if (blank_line || every_line) emit_here();
  } else {
    newline_run_ = 0;
  }

  const bool is_mark =
      options_.boundary_punctuation.find(c) != std::string::npos;
  if (is_mark) {
    if (seen_content_) {
      const bool guarded = c == '.' && !options_.abbreviations.empty() &&
                           abbreviation_before_dot();
      if (!guarded) {
        pending_ = true;
        pending_step_ = cur_step_;
        pending_rank_ = cur_rank_;
      }
    }
  } else if (!space) {
    seen_content_ = true;
  }

  if (max_abbrev_len_ > 0) {
    tail_.push_back(c);
    if (tail_.size() > max_abbrev_len_) tail_.erase(tail_.begin());
  }
}

}  // namespace rcpd
