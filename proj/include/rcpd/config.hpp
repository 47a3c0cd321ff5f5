#pragma once

#include <string>

#include "json.hpp"
#include "rcpd/evaluator.hpp"
#include "rcpd/miner.hpp"
#include "rcpd/segmenter.hpp"
#include "rcpd/stream.hpp"
#include "rcpd/synth.hpp"

namespace rcpd {

/// Whole-toolkit configuration. Every key is optional in the file; absent
/// keys keep their defaults, and command-line flags override file values.
struct ToolkitConfig {
  Rank rank_cap = kDefaultRankCap;
  RuleSet rules = default_rcpd_rules();
  SegmenterOptions segmenter;
  ReportFormat report_format = ReportFormat::kTable;
  SynthParams synth;
  MinerParams miner;
  bool stream_per_token = false;

  static ToolkitConfig from_json(const nlohmann::json& doc);
  static ToolkitConfig load(const std::string& path);
};

}  // namespace rcpd
