#include "rcpd/config.hpp"

#include <fstream>

#include "rcpd/errors.hpp"

namespace rcpd {

namespace {

template <typename T>
void maybe(const nlohmann::json& doc, const char* key, T& target) {
  if (!doc.contains(key)) return;
  try {
    target = doc.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ParseError(std::string("config: bad value for \"") + key + "\"");
  }
}

void read_range(const nlohmann::json& doc, const char* key, IntRange& range) {
  if (!doc.contains(key)) return;
  const auto& value = doc.at(key);
  if (!value.is_array() || value.size() != 2) {
    throw ParseError(std::string("config: \"") + key + "\" must be [lo, hi]");
  }
  range.lo = value[0].get<int>();
  range.hi = value[1].get<int>();
}

void read_range(const nlohmann::json& doc, const char* key, RealRange& range) {
  if (!doc.contains(key)) return;
  const auto& value = doc.at(key);
  if (!value.is_array() || value.size() != 2) {
    throw ParseError(std::string("config: \"") + key + "\" must be [lo, hi]");
  }
  range.lo = value[0].get<double>();
  range.hi = value[1].get<double>();
}

}  // namespace

ToolkitConfig ToolkitConfig::from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  ToolkitConfig config;

  maybe(doc, "rank_cap", config.rank_cap);
  if (doc.contains("rules")) config.rules = rules_from_json(doc.at("rules"));
  if (doc.contains("report_format")) {
    const auto format = doc.at("report_format").get<std::string>();
    if (format == "table") {
      config.report_format = ReportFormat::kTable;
    } else if (format == "csv") {
      config.report_format = ReportFormat::kCsv;
    } else {
      throw ParseError("config: report_format must be \"table\" or \"csv\"");
    }
  }

  if (doc.contains("segmenter")) {
    const auto& seg = doc.at("segmenter");
    maybe(seg, "boundary_punctuation", config.segmenter.boundary_punctuation);
    maybe(seg, "decimal_guard", config.segmenter.decimal_guard);
    maybe(seg, "abbreviations", config.segmenter.abbreviations);
    maybe(seg, "blank_line_boundary", config.segmenter.blank_line_boundary);
    maybe(seg, "single_newline_boundary",
          config.segmenter.single_newline_boundary);
  }

  if (doc.contains("synth")) {
    const auto& synth = doc.at("synth");
    maybe(synth, "n_traces", config.synth.n_traces);
    maybe(synth, "seed", config.synth.seed);
    maybe(synth, "stage1_len", config.synth.stage1_len);
    read_range(synth, "rcp_index_dist", config.synth.rcp_index_dist);
    read_range(synth, "rank_far", config.synth.rank_far);
    maybe(synth, "approach_window", config.synth.approach_window);
    maybe(synth, "p_false_approach", config.synth.p_false_approach);
    maybe(synth, "p_correct_stage1", config.synth.p_correct_stage1);
    maybe(synth, "p_correct_plateau", config.synth.p_correct_plateau);
    maybe(synth, "compensation_slope", config.synth.compensation_slope);
    maybe(synth, "content_base", config.synth.content_base);
    maybe(synth, "reflection_tokens_per_sentence",
          config.synth.reflection_tokens_per_sentence);
    maybe(synth, "p_loop", config.synth.p_loop);
    maybe(synth, "token_cap", config.synth.token_cap);
    read_range(synth, "tokens_per_sentence", config.synth.tokens_per_sentence);
    maybe(synth, "post_rcp_sentences", config.synth.post_rcp_sentences);
    maybe(synth, "content_noise_scale", config.synth.content_noise_scale);
    maybe(synth, "accuracy_ramp_lead", config.synth.accuracy_ramp_lead);
    maybe(synth, "accuracy_ramp_shape", config.synth.accuracy_ramp_shape);
    maybe(synth, "outcome_stride", config.synth.outcome_stride);
  }

  if (doc.contains("miner")) {
    const auto& miner = doc.at("miner");
    maybe(miner, "depth", config.miner.depth);
    maybe(miner, "n_trees", config.miner.n_trees);
    maybe(miner, "learning_rate", config.miner.learning_rate);
    maybe(miner, "seed", config.miner.seed);
    maybe(miner, "log2_features", config.miner.log2_features);
    maybe(miner, "positive_weight", config.miner.positive_weight);
    maybe(miner, "max_rules", config.miner.max_rules);
  }

  if (doc.contains("stream")) {
    maybe(doc.at("stream"), "per_token", config.stream_per_token);
  }

  // One cap governs the whole toolkit, whether or not the sub-sections
  // appeared in the file.
  config.synth.rank_cap = config.rank_cap;
  config.miner.rank_cap = config.rank_cap;
  return config;
}

ToolkitConfig ToolkitConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("config file " + path + ": " + e.what());
  }
  return from_json(doc);
}

}  // namespace rcpd
