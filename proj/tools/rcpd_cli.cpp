// Command-line front end: synthesize corpora, replay stopping strategies,
// mine stop rules, and serve the streaming decision protocol.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rcpd/config.hpp"
#include "rcpd/errors.hpp"
#include "rcpd/evaluator.hpp"
#include "rcpd/miner.hpp"
#include "rcpd/stream.hpp"
#include "rcpd/synth.hpp"
#include "rcpd/trace.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rcpd::Error("cannot open output file: " + path);
  out << text;
}

int run_synth(const rcpd::ToolkitConfig& config, int n, std::uint64_t seed,
              bool seed_set, const std::string& preset,
              const std::string& out_path) {
  rcpd::SynthParams params = config.synth;
  if (preset == "paper-like") {
    params = rcpd::SynthParams::paper_like();
  } else if (preset == "tiny") {
    params = rcpd::SynthParams::tiny();
  } else if (!preset.empty()) {
    throw rcpd::ValidationError("unknown preset: \"" + preset + "\"");
  }
  if (!preset.empty()) {
    // A preset resets every generator knob; keep the config-level cap.
    params.rank_cap = config.synth.rank_cap;
  }
  if (n > 0) params.n_traces = n;
  if (seed_set) params.seed = seed;
  const rcpd::Corpus corpus = rcpd::generate(params);
  rcpd::write_corpus(corpus, out_path);
  std::cerr << "wrote " << corpus.traces.size() << " traces to " << out_path
            << "\n";
  return kExitOk;
}

int run_replay(const rcpd::ToolkitConfig& config, const std::string& corpus_path,
               const std::vector<std::string>& strategy_names,
               const std::vector<std::int64_t>& budgets, double deer_threshold,
               const std::string& rules_path, const std::string& format_name,
               const std::string& out_path) {
  const rcpd::Corpus corpus = rcpd::parse_corpus(corpus_path);

  rcpd::RuleSet rules = config.rules;
  if (!rules_path.empty()) rules = rcpd::load_rules_file(rules_path);

  std::vector<rcpd::StrategyConfig> configs;
  for (const auto& name : strategy_names) {
    if (name == "budget_force") {
      const auto& list =
          budgets.empty() ? std::vector<std::int64_t>{1000} : budgets;
      for (const std::int64_t budget : list) {
        configs.push_back(rcpd::StrategyConfig::budget_force(budget));
      }
      continue;
    }
    rcpd::StrategyConfig strategy = rcpd::strategy_from_name(name);
    if (strategy.kind == rcpd::StrategyKind::kDeer) {
      strategy.deer_confidence_threshold = deer_threshold;
    }
    if (strategy.kind == rcpd::StrategyKind::kRcpd) {
      strategy.rules = rules;
    }
    strategy.rank_cap = config.rank_cap;
    configs.push_back(std::move(strategy));
  }

  rcpd::ReportFormat format = config.report_format;
  if (format_name == "table") {
    format = rcpd::ReportFormat::kTable;
  } else if (format_name == "csv") {
    format = rcpd::ReportFormat::kCsv;
  } else if (!format_name.empty()) {
    throw rcpd::ValidationError("unknown format: \"" + format_name + "\"");
  }

  const auto reports = rcpd::evaluate_corpus(corpus, configs);
  write_output(out_path, rcpd::emit_report(reports, format));
  return kExitOk;
}

struct MineFlags {
  std::optional<int> depth;
  std::optional<int> trees;
  std::optional<double> learning_rate;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_rules;
  int folds = 0;
  std::string emit_rules_path;
};

int run_mine(const rcpd::ToolkitConfig& config, const std::string& corpus_path,
             const MineFlags& flags) {
  const rcpd::Corpus corpus = rcpd::parse_corpus(corpus_path);
  const auto windows = rcpd::label_windows(corpus, config.rank_cap);

  // Flags given on the command line override the config file; everything
  // else keeps the configured (or built-in) value.
  rcpd::MinerParams params = config.miner;
  if (flags.depth) params.depth = *flags.depth;
  if (flags.trees) params.n_trees = *flags.trees;
  if (flags.learning_rate) params.learning_rate = *flags.learning_rate;
  if (flags.seed) params.seed = *flags.seed;
  if (flags.max_rules) params.max_rules = *flags.max_rules;
  params.rank_cap = config.rank_cap;

  const rcpd::MinedModel model = rcpd::train(windows, params);

  std::printf("feature importance (%% of split gain):\n");
  const char* const names[] = {"current", "prev_1", "prev_2",
                               "prev_3",  "prev_4", "prev_5"};
  for (int f = 0; f < rcpd::kNumFeatures; ++f) {
    std::printf("  %-8s %6.2f\n", names[f], model.importance[f]);
  }

  if (model.distilled_rules.rules.empty()) {
    std::printf("warning: no positive-predicting leaf; no rules distilled\n");
  } else {
    std::printf("distilled rules:\n%s\n",
                rcpd::rules_to_json(model.distilled_rules).dump(2).c_str());
  }

  if (flags.folds >= 2) {
    const auto cv = rcpd::cross_validate(windows, flags.folds, params);
    std::printf(
        "cv (%d folds): precision %.3f  recall %.3f  f1 %.3f  "
        "recall@rcp±1 %.3f%s\n",
        flags.folds, cv.mean.precision, cv.mean.recall, cv.mean.f1,
        cv.recall_near_rcp, cv.mean.degenerate ? "  [degenerate fold]" : "");
  }

  if (!flags.emit_rules_path.empty()) {
    rcpd::save_rules_file(model.distilled_rules, flags.emit_rules_path);
    std::cerr << "wrote rules to " << flags.emit_rules_path << "\n";
  }
  return kExitOk;
}

int run_stream(const rcpd::ToolkitConfig& config,
               const std::string& rules_path, bool per_token) {
  rcpd::StreamOptions options;
  options.rules = rules_path.empty() ? config.rules
                                     : rcpd::load_rules_file(rules_path);
  options.segmenter = config.segmenter;
  options.rank_cap = config.rank_cap;
  options.per_token = per_token || config.stream_per_token;
  rcpd::StreamController controller(options);
  controller.serve(std::cin, std::cout);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reasoning-trace stopping toolkit"};
  app.set_version_flag("--version",
                       "schema_version " + std::to_string(rcpd::kSchemaVersion));
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  int synth_n = 0;
  std::uint64_t synth_seed = 0;
  std::string synth_preset;
  std::string synth_out;
  synth->add_option("--n", synth_n, "number of traces");
  auto* seed_opt = synth->add_option("--seed", synth_seed, "generator seed");
  synth->add_option("--preset", synth_preset, "paper-like or tiny");
  synth->add_option("--out", synth_out, "output corpus path")->required();

  auto* replay = app.add_subcommand("replay", "replay stopping strategies");
  std::string replay_corpus;
  std::vector<std::string> replay_strategies{"full", "rcpd"};
  std::vector<std::int64_t> replay_budgets;
  double replay_deer_threshold = 0.95;
  std::string replay_rules;
  std::string replay_format;
  std::string replay_out = "-";
  replay->add_option("--corpus", replay_corpus, "corpus file")->required();
  replay->add_option("--strategy", replay_strategies,
                     "full no_think budget_force think_rank_5 deer rcpd");
  replay->add_option("--budgets", replay_budgets,
                     "token budgets for budget_force");
  replay->add_option("--deer-threshold", replay_deer_threshold,
                     "confidence threshold for deer");
  replay->add_option("--rules-file", replay_rules, "rules for rcpd");
  replay->add_option("--format", replay_format, "table or csv");
  replay->add_option("--out", replay_out, "output path, - for stdout");

  auto* mine = app.add_subcommand("mine", "mine stop rules from a corpus");
  std::string mine_corpus;
  int mine_depth = 6;
  int mine_trees = 50;
  double mine_lr = 0.1;
  std::uint64_t mine_seed = 7;
  MineFlags mine_flags;
  int mine_max_rules = 4;
  mine->add_option("--corpus", mine_corpus, "corpus file")->required();
  auto* mine_depth_opt = mine->add_option("--depth", mine_depth, "tree depth 1..6");
  auto* mine_trees_opt = mine->add_option("--trees", mine_trees, "boosting rounds");
  auto* mine_lr_opt = mine->add_option("--lr", mine_lr, "learning rate");
  auto* mine_seed_opt = mine->add_option("--seed", mine_seed, "fold-assignment seed");
  mine->add_option("--folds", mine_flags.folds,
                   "cross-validation folds, 0 = skip");
  auto* mine_rules_opt =
      mine->add_option("--max-rules", mine_max_rules, "distilled rule budget");
  mine->add_option("--emit-rules", mine_flags.emit_rules_path,
                   "write distilled rules here");

  auto* stream = app.add_subcommand("stream", "serve NDJSON stop decisions");
  std::string stream_rules;
  bool stream_per_token = false;
  stream->add_option("--rules-file", stream_rules, "rules file");
  stream->add_flag("--per-token", stream_per_token,
                   "evaluate at every token, not only boundaries");

  auto* rules_cmd = app.add_subcommand("rules", "inspect rule sets");
  auto* rules_show = rules_cmd->add_subcommand("show", "print a rule set");
  std::string rules_file;
  rules_show->add_option("--rules-file", rules_file,
                         "rules file (default: built-in rules)");
  rules_cmd->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    rcpd::ToolkitConfig config;
    if (!config_path.empty()) config = rcpd::ToolkitConfig::load(config_path);

    if (*synth) {
      return run_synth(config, synth_n, synth_seed, seed_opt->count() > 0,
                       synth_preset, synth_out);
    }
    if (*replay) {
      return run_replay(config, replay_corpus, replay_strategies,
                        replay_budgets, replay_deer_threshold, replay_rules,
                        replay_format, replay_out);
    }
    if (*mine) {
      if (mine_depth_opt->count()) mine_flags.depth = mine_depth;
      if (mine_trees_opt->count()) mine_flags.trees = mine_trees;
      if (mine_lr_opt->count()) mine_flags.learning_rate = mine_lr;
      if (mine_seed_opt->count()) mine_flags.seed = mine_seed;
      if (mine_rules_opt->count()) mine_flags.max_rules = mine_max_rules;
      return run_mine(config, mine_corpus, mine_flags);
    }
    if (*stream) {
      return run_stream(config, stream_rules, stream_per_token);
    }
    if (*rules_show) {
      const rcpd::RuleSet rules = rules_file.empty()
                                      ? rcpd::default_rcpd_rules()
                                      : rcpd::load_rules_file(rules_file);
      std::cout << rcpd::rules_to_json(rules).dump(2) << "\n";
      return kExitOk;
    }
  } catch (const rcpd::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
