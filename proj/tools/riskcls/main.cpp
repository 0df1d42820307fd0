// riskcls: command-line front end for the risk classification pipeline.
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "riskcls/commands.hpp"
#include "riskcls/errors.hpp"
#include "riskcls/metrics.hpp"

namespace fs = std::filesystem;
using namespace riskcls;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool config_required) {
  auto* opt = cmd->add_option("--config", f.config, "Experiment config (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "Override the config seed");
  cmd->add_option("--out-dir", f.out_dir, "Output directory");
}

std::optional<ExperimentConfig> load_config(const CommonFlags& f) {
  if (f.config.empty()) return std::nullopt;
  auto cfg = load_experiment_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  return cfg;
}

ExperimentConfig require_config(const CommonFlags& f) {
  auto cfg = load_config(f);
  if (!cfg) throw ConfigError("--config is required");
  return *cfg;
}

fs::path out_or(const CommonFlags& f, const fs::path& fallback) { return f.out_dir.empty() ? fallback : fs::path(f.out_dir); }

// One line, key=value, message JSON-quoted so it survives any characters.
int report_error(const std::string& verb, const std::string& kind, const std::string& message, int code) {
  std::cerr << "riskcls: error verb=" << (verb.empty() ? "-" : verb) << " kind=" << kind
            << " message=" << nlohmann::json(message).dump() << '\n';
  return code;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly supervised user-level suicide risk classification"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "riskcls 0.1.0");

  CommonFlags common;

  auto* preprocess = app.add_subcommand("preprocess", "Normalize, split and chunk the configured corpora");
  add_common(preprocess, common, true);

  auto* pretrain = app.add_subcommand("pretrain", "Masked-LM pre-training on the unlabeled corpus");
  add_common(pretrain, common, true);

  auto* train = app.add_subcommand("train", "Train the configured approach into a new run directory");
  add_common(train, common, true);
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> threads;
  train->add_option("--epochs", epochs, "Override train.epochs");
  train->add_option("--threads", threads, "Override train.threads");

  auto* eval = app.add_subcommand("eval", "Score a trained run on a labeled corpus");
  add_common(eval, common, false);
  std::string run_dir;
  std::string corpus;
  eval->add_option("--run-dir", run_dir, "Run directory holding model.ckpt")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--test", corpus, "Labeled test corpus (defaults to the config's data.test)");

  auto* sweep = app.add_subcommand("sweep", "Pseudo-label ratio or mixing sweep");
  add_common(sweep, common, true);
  std::string ratios;
  std::string mixes;
  std::size_t workers = 1;
  auto* ratio_opt = sweep->add_option("--ratios", ratios, "Comma-separated ratios, e.g. 2%,8%,16%,32%");
  auto* mix_opt = sweep->add_option("--mix", mixes, "Comma-separated mixing weights, e.g. 1:5,1:2,1:1");
  ratio_opt->excludes(mix_opt);
  sweep->add_option("--epochs", epochs, "Epochs per cell (default 10)");
  sweep->add_option("--workers", workers, "Cells trained in parallel");

  auto* assess = app.add_subcommand("assess", "Predict risk levels for every user of a corpus");
  add_common(assess, common, false);
  assess->add_option("--run-dir", run_dir, "Run directory holding model.ckpt")->required()->check(CLI::ExistingDirectory);
  assess->add_option("--corpus", corpus, "Corpus to assess (defaults to the config's data.unlabeled)");

  auto* report = app.add_subcommand("report", "Render a JSON report as a text table");
  add_common(report, common, false);
  std::string report_path;
  std::string format = "text";
  report->add_option("report", report_path, "eval_report.json or assessment_report.json")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_option("--format", format, "text or json")->check(CLI::IsMember({"text", "json"}));

  auto* synth = app.add_subcommand("synth", "Write synthetic stand-in corpora");
  add_common(synth, common, false);
  SynthOptions synth_opts;
  synth->add_option("--train-users", synth_opts.train_users, "Labeled training users")->capture_default_str();
  synth->add_option("--test-users", synth_opts.test_users, "Labeled test users")->capture_default_str();
  synth->add_option("--unlabeled-users", synth_opts.unlabeled_users, "Unlabeled users for pre-training")
      ->capture_default_str();
  synth->add_option("--auxiliary-users", synth_opts.auxiliary_users, "Users per pseudo-label source")
      ->capture_default_str();
  synth->add_option("--assess-users", synth_opts.assess_users, "Users in the assessment corpus")->capture_default_str();
  synth->add_option("--class-word-share", synth_opts.class_word_share, "Fraction of words drawn from class vocabularies")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    return report_error(subs.empty() ? "" : subs.front()->get_name(), "usage", e.what(), 2);
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "preprocess") {
      const auto cfg = require_config(common);
      cmd_preprocess(cfg, out_or(common, cfg.out_dir / "preprocessed" / cfg.name), std::cout);
    } else if (verb == "pretrain") {
      const auto cfg = require_config(common);
      cmd_pretrain(cfg, out_or(common, cfg.out_dir / ("pretrain-" + cfg.name)), std::cout);
    } else if (verb == "train") {
      auto cfg = require_config(common);
      if (epochs) cfg.train.epochs = *epochs;
      if (threads) cfg.train.threads = *threads;
      const auto out = cmd_train(cfg, out_or(common, cfg.out_dir), std::cout);
      std::cout << "run_dir=" << out.run_dir.string() << '\n';
    } else if (verb == "eval") {
      const auto cfg = load_config(common);
      fs::path test = corpus;
      if (test.empty()) {
        if (!cfg || !cfg->test_path) throw ConfigError("eval needs --test or a config with data.test");
        test = *cfg->test_path;
      }
      cmd_eval(run_dir, test, out_or(common, run_dir), std::cout, common.seed);
    } else if (verb == "sweep") {
      const auto cfg = require_config(common);
      if (ratios.empty() && mixes.empty()) throw ConfigError("sweep needs --ratios or --mix");
      const auto kind = ratios.empty() ? SweepKind::Mix : SweepKind::Ratio;
      const auto grid = split_list(ratios.empty() ? mixes : ratios);
      const auto out = cmd_sweep(cfg, kind, grid, epochs, out_or(common, cfg.out_dir / ("sweep-" + cfg.name)),
                                 std::cout, workers);
      std::cout << "table=" << out.table.string() << '\n';
    } else if (verb == "assess") {
      const auto cfg = load_config(common);
      fs::path input = corpus;
      if (input.empty()) {
        if (!cfg || !cfg->unlabeled_path) throw ConfigError("assess needs --corpus or a config with data.unlabeled");
        input = *cfg->unlabeled_path;
      }
      cmd_assess(run_dir, input, out_or(common, run_dir), std::cout, common.seed);
    } else if (verb == "report") {
      std::ifstream in(report_path);
      const auto doc = nlohmann::json::parse(in);
      std::cout << (format == "json" ? doc.dump(2) + "\n" : render_report_text(doc));
    } else if (verb == "synth") {
      if (common.seed) synth_opts.seed = *common.seed;
      cmd_synth(synth_opts, out_or(common, "data/synthetic"), std::cout);
    }
  } catch (const Error& e) {
    return report_error(verb, e.kind(), e.what(), 1);
  } catch (const nlohmann::json::exception& e) {
    return report_error(verb, "parse", e.what(), 1);
  } catch (const std::exception& e) {
    return report_error(verb, "internal", e.what(), 1);
  }
  return 0;
}
