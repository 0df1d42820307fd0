#include "riskcls/commands.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <mutex>
#include <sstream>
#include <thread>

#include <fmt/format.h>

#include "riskcls/errors.hpp"
#include "riskcls/metrics.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kStreamSplit = 101;
constexpr std::uint64_t kStreamPseudo = 102;

// Logs to the caller's stream and to a file in the run directory.
class RunLog {
 public:
  RunLog(std::ostream& out, const fs::path& file) : out_(out), file_(file) {
    if (!file_) throw IoError("cannot write '" + file.string() + "'");
  }
  void line(const std::string& text) {
    out_ << text << '\n';
    file_ << text << '\n';
  }

 private:
  std::ostream& out_;
  std::ofstream file_;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

void write_json_file(const fs::path& path, const json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << '\n';
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

bool looks_processed(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto doc = json::parse(line, nullptr, false);
    return doc.is_object() && doc.contains("passages");
  }
  return false;
}

std::vector<ProcessedEntry> processed_from(const LabeledDataset& ds, const PreprocessConfig& pp,
                                           std::vector<std::string>& dropped) {
  auto pc = preprocess_dataset(ds, pp);
  dropped.insert(dropped.end(), pc.dropped_users.begin(), pc.dropped_users.end());
  return std::move(pc.entries);
}

std::vector<ProcessedUser> users_of(std::span<const ProcessedEntry> entries) {
  std::vector<ProcessedUser> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.user);
  return out;
}

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

fs::path fresh_run_dir(const fs::path& root, const std::string& name) {
  const auto base = name + "-" + utc_stamp();
  fs::path dir = root / base;
  for (int i = 2; fs::exists(dir); ++i) dir = root / (base + "-" + std::to_string(i));
  fs::create_directories(dir);
  return dir;
}

json histogram_json(std::span<const ProcessedEntry> entries, std::size_t max_len) {
  constexpr std::size_t kBucket = 16;
  const std::size_t n_buckets = (max_len + kBucket - 1) / kBucket;
  std::vector<std::size_t> counts(n_buckets + 1, 0);
  for (const auto& e : entries) {
    for (const auto& p : e.user.passages) {
      const auto w = p.word_count();
      counts[w > max_len ? n_buckets : (w == 0 ? 0 : (w - 1) / kBucket)]++;
    }
  }
  json h = json::array();
  for (std::size_t b = 0; b < n_buckets; ++b) {
    h.push_back({{"words", fmt::format("{}-{}", b * kBucket + 1, std::min(max_len, (b + 1) * kBucket))},
                 {"passages", counts[b]}});
  }
  h.push_back({{"words", fmt::format(">{}", max_len)}, {"passages", counts[n_buckets]}});
  return h;
}

json corpus_summary(const LoadedCorpus& c, std::size_t max_len) {
  std::size_t passages = 0;
  for (const auto& e : c.entries) passages += e.user.passages.size();
  return {{"users", c.entries.size()},
          {"passages", passages},
          {"dropped_users", c.dropped_users},
          {"passage_words_histogram", histogram_json(c.entries, max_len)}};
}

Provenance provenance_for_source(const std::string& id) {
  try {
    return parse_provenance("pseudo_" + id);
  } catch (const Error&) {
    return Provenance::Synthetic;
  }
}

Vocabulary tap_vocabulary(const ExperimentConfig& config, const PreprocessConfig& pp, std::ostream& log) {
  std::vector<ProcessedUser> users;
  for (const auto& e : load_any_corpus(config.train_path, pp).entries) users.push_back(e.user);
  if (config.unlabeled_path) {
    for (const auto& e : load_any_corpus(*config.unlabeled_path, pp).entries) users.push_back(e.user);
  }
  auto vocab = build_vocabulary(users, config.min_freq);
  log << "vocabulary: " << vocab.size() << " tokens\n";
  return vocab;
}

std::vector<ProcessedUser> unlabeled_users(const ExperimentConfig& config, const PreprocessConfig& pp) {
  if (!config.unlabeled_path) throw ConfigError("pre-training needs data.unlabeled");
  auto corpus = load_any_corpus(*config.unlabeled_path, pp);
  if (corpus.entries.empty()) throw ValidationError("unlabeled corpus '" + config.unlabeled_path->string() + "' is empty");
  return users_of(corpus.entries);
}

json tap_record_json(const TapEpochRecord& r) {
  return {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"heldout_loss", r.heldout_loss}};
}

json tap_summary_json(const TapResult& tap, std::size_t vocab_size) {
  return {{"vocab_size", vocab_size},
          {"uniform_loss", tap.uniform_loss},
          {"initial_heldout_loss", tap.initial_heldout_loss},
          {"best_epoch", tap.best_epoch},
          {"epochs_run", tap.curve.size()},
          {"stop_reason", tap.stop_reason}};
}

Checkpoint load_model(const fs::path& run_dir) {
  const auto path = run_dir / kModelFile;
  if (!fs::exists(path)) throw IoError("missing checkpoint '" + path.string() + "'");
  auto ckpt = load_checkpoint(path);
  if (!ckpt.classifier) throw ValidationError("checkpoint '" + path.string() + "' has no classifier head");
  return ckpt;
}

// Preprocessing settings recorded with the run, so evaluation sees the same
// passages as training did.
PreprocessConfig run_preprocess_config(const fs::path& run_dir, std::optional<std::uint64_t> seed) {
  PreprocessConfig pp;
  const auto snapshot = run_dir / "config.json";
  if (fs::exists(snapshot)) pp = parse_experiment_config(read_json_file(snapshot), run_dir).preprocess_config();
  if (seed) pp.seed = *seed;
  return pp;
}

std::string percent_key(const Rational& r) {
  const auto scaled = r.num * 100;
  if (scaled % r.den == 0) return fmt::format("{}%", scaled / r.den);
  return fmt::format("{:g}%", 100.0 * r.value());
}


std::vector<std::string> split_mix_cell(const std::string& cell) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : cell) {
    if (ch == ':') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

std::string sanitize(const std::string& key) {
  std::string out;
  for (char ch : key) out += std::isalnum(static_cast<unsigned char>(ch)) ? ch : '_';
  return out;
}

}  // namespace

LoadedCorpus load_any_corpus(const fs::path& path, const PreprocessConfig& config) {
  LoadedCorpus out;
  if (looks_processed(path)) {
    std::ifstream in(path);
    out.entries = parse_processed(in, path.string());
    return out;
  }
  out.was_raw = true;
  out.entries = processed_from(load_corpus(path), config, out.dropped_users);
  return out;
}

PreprocessOutput cmd_preprocess(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  const auto pp = config.preprocess_config();
  std::vector<std::pair<std::string, fs::path>> roles{{"train", config.train_path}};
  if (config.valid_path) roles.emplace_back("valid", *config.valid_path);
  if (config.test_path) roles.emplace_back("test", *config.test_path);
  if (config.unlabeled_path) roles.emplace_back("unlabeled", *config.unlabeled_path);
  if (config.pl) {
    for (const auto& s : config.pl->sources) roles.emplace_back("pl_" + sanitize(s.id), s.path);
  }

  PreprocessOutput result;
  result.summary = {{"schema_version", kReportSchemaVersion}, {"kind", "preprocess"}};
  for (const auto& [role, path] : roles) {
    const auto corpus = load_any_corpus(path, pp);
    const auto file = out_dir / (role + ".processed.jsonl");
    auto out = open_out(file);
    write_processed(corpus.entries, out);
    result.files.push_back(file);
    auto summary = corpus_summary(corpus, config.max_passage_len);
    summary["source"] = path.string();
    summary["output"] = file.filename().string();
    log << fmt::format("preprocess {}: {} users, {} passages, {} dropped\n", role, corpus.entries.size(),
                       summary["passages"].get<std::size_t>(), corpus.dropped_users.size());
    for (const auto& u : corpus.dropped_users) log << "  dropped user " << u << " (empty after preprocessing)\n";
    result.summary["corpora"][role] = std::move(summary);
  }
  write_json_file(out_dir / "preprocess_summary.json", result.summary);
  return result;
}

PretrainOutput cmd_pretrain(const ExperimentConfig& config, const fs::path& out_dir, std::ostream& log) {
  config.validate();
  const auto pp = config.preprocess_config();
  const auto users = unlabeled_users(config, pp);
  const auto vocab = tap_vocabulary(config, pp, log);
  fs::create_directories(out_dir);

  auto curve = open_out(out_dir / "tap_curve.jsonl");
  PretrainOutput result;
  result.tap = tap_pretrain(users, config.train_config(), vocab, std::nullopt, [&](const TapEpochRecord& r) {
    curve << tap_record_json(r).dump() << '\n';
    log << fmt::format("tap epoch {}: train_loss={:.6f} heldout_loss={:.6f}\n", r.epoch, r.train_loss, r.heldout_loss);
  });
  log << "tap stop: " << result.tap.stop_reason << '\n';
  result.checkpoint = out_dir / "encoder.ckpt";
  save_checkpoint({vocab, result.tap.encoder, std::nullopt}, result.checkpoint);
  write_json_file(out_dir / "tap_summary.json", tap_summary_json(result.tap, vocab.size()));
  return result;
}

TrainOutput train_into(const ExperimentConfig& config, const fs::path& run_dir, std::ostream& out) {
  config.validate();
  fs::create_directories(run_dir);
  write_json_file(run_dir / "config.json", experiment_config_json(config));
  RunLog log(out, run_dir / "train.log");
  log.line(fmt::format("experiment {} approach={} seed={}", config.name, approach_name(config.approach), config.seed));

  const auto pp = config.preprocess_config();
  auto train_corpus = load_any_corpus(config.train_path, pp);
  std::vector<std::string> dropped = train_corpus.dropped_users;
  std::vector<ProcessedEntry> train_entries;
  std::vector<ProcessedEntry> valid_entries;
  if (config.valid_path) {
    train_entries = std::move(train_corpus.entries);
    auto v = load_any_corpus(*config.valid_path, pp);
    dropped.insert(dropped.end(), v.dropped_users.begin(), v.dropped_users.end());
    valid_entries = std::move(v.entries);
  } else {
    std::vector<RiskLevel> labels;
    for (const auto& e : train_corpus.entries) {
      if (!e.label) throw ValidationError("training user '" + e.user.user_id + "' has no label");
      labels.push_back(*e.label);
    }
    const auto in_valid =
        stratified_valid_mask(labels, config.valid_fraction, derive_seed(config.seed, kStreamSplit));
    for (std::size_t i = 0; i < train_corpus.entries.size(); ++i) {
      (in_valid[i] ? valid_entries : train_entries).push_back(std::move(train_corpus.entries[i]));
    }
  }
  for (const auto& u : dropped) log.line("dropped user " + u + " (empty after preprocessing)");

  TrainOutput result;
  result.run_dir = run_dir;
  result.train_users = train_entries.size();
  result.valid_users = valid_entries.size();

  if (config.pl) {
    MixSpec spec;
    spec.total_count = pseudo_count_for(train_entries.size(), config.pl->ratio.value());
    std::map<std::string, LabeledDataset> sources;
    for (const auto& s : config.pl->sources) {
      spec.components.push_back({s.id, s.assigned, s.weight, provenance_for_source(s.id)});
      sources.emplace(s.id, load_corpus(s.path));
    }
    const auto counts = realized_counts(spec);
    const auto pseudo = mix_pseudo_sources(spec, sources, derive_seed(config.seed, kStreamPseudo));
    std::vector<std::string> pseudo_dropped;
    auto pseudo_entries = processed_from(pseudo, pp, pseudo_dropped);
    std::string breakdown;
    for (std::size_t i = 0; i < counts.size(); ++i) {
      const auto& s = config.pl->sources[i];
      breakdown += fmt::format("{}{} {} as {}", i ? ", " : "", counts[i], s.id,
                               s.assigned ? std::string(1, risk_level_letter(*s.assigned)) : "own labels");
    }
    result.pseudo_users = pseudo_entries.size();
    log.line(fmt::format("+{} pseudo users ({}; ratio {} of {} training users)", result.pseudo_users, breakdown,
                         config.pl->ratio_text, train_entries.size()));
    for (const auto& u : pseudo_dropped) log.line("dropped pseudo user " + u + " (empty after preprocessing)");
    std::set<std::string> ids;
    for (const auto& e : train_entries) ids.insert(e.user.user_id);
    for (const auto& e : valid_entries) ids.insert(e.user.user_id);
    for (auto& e : pseudo_entries) {
      if (!ids.insert(e.user.user_id).second) {
        throw ValidationError("pseudo user '" + e.user.user_id + "' collides with a gold user id");
      }
      train_entries.push_back(std::move(e));
    }
  }

  const auto train_set = labeled_users(train_entries);
  const auto valid_set = labeled_users(valid_entries);
  auto train_cfg = config.train_config();

  Vocabulary vocab;
  std::optional<EncoderParams> initial;
  if (config.approach == Approach::TAP) {
    if (config.tap->checkpoint) {
      auto ckpt = load_checkpoint(*config.tap->checkpoint);
      log.line("initializing encoder from " + config.tap->checkpoint->string());
      vocab = std::move(ckpt.vocab);
      initial = std::move(ckpt.encoder);
    } else {
      std::ostringstream vocab_log;
      vocab = tap_vocabulary(config, pp, vocab_log);
      const auto users = unlabeled_users(config, pp);
      auto curve = open_out(run_dir / "tap_curve.jsonl");
      auto tap = tap_pretrain(users, train_cfg, vocab, std::nullopt, [&](const TapEpochRecord& r) {
        curve << tap_record_json(r).dump() << '\n';
        log.line(fmt::format("tap epoch {}: train_loss={:.6f} heldout_loss={:.6f}", r.epoch, r.train_loss,
                             r.heldout_loss));
      });
      log.line("tap stop: " + tap.stop_reason);
      write_json_file(run_dir / "tap_summary.json", tap_summary_json(tap, vocab.size()));
      initial = std::move(tap.encoder);
    }
  } else {
    vocab = build_vocabulary(users_of(train_entries), config.min_freq);
  }
  log.line(fmt::format("train users {} (incl. {} pseudo), valid users {}, vocabulary {}", train_set.size(),
                       result.pseudo_users, valid_set.size(), vocab.size()));

  auto metrics = open_out(run_dir / "metrics.jsonl");
  const bool with_view = train_cfg.view.has_value();
  result.state = train(train_set, valid_set, train_cfg, vocab, initial, [&](const EpochRecord& r) {
    json rec = {{"epoch", r.epoch}, {"train_loss", r.train_loss}, {"clf_loss", r.clf_loss}};
    if (with_view) rec["kl_loss"] = r.kl_loss;
    rec["valid_macro_precision"] = r.valid.macro_precision;
    rec["valid_macro_recall"] = r.valid.macro_recall;
    rec["valid_macro_f1"] = r.valid.macro_f1;
    metrics << rec.dump() << '\n';
    metrics.flush();
    log.line(fmt::format("epoch {:>2}: loss={:.6f} clf={:.6f}{} valid P/R/F1={}", r.epoch, r.train_loss, r.clf_loss,
                         with_view ? fmt::format(" kl={:.6f}", r.kl_loss) : std::string{}, format_prf(r.valid)));
  });
  log.line("stop: " + result.state.stop_reason);
  log.line(fmt::format("best epoch {} valid macro-F1 {:.4f}", result.state.best_epoch, result.state.best_macro_f1));

  const auto& best = result.state.best;
  save_checkpoint({best.vocab, best.encoder, best.classifier}, run_dir / kModelFile);
  write_json_file(run_dir / "summary.json", {{"name", config.name},
                                             {"approach", std::string(approach_name(config.approach))},
                                             {"best_epoch", result.state.best_epoch},
                                             {"best_valid_macro_f1", result.state.best_macro_f1},
                                             {"epochs_run", result.state.epoch},
                                             {"stop_reason", result.state.stop_reason},
                                             {"train_users", result.train_users},
                                             {"pseudo_users", result.pseudo_users},
                                             {"valid_users", result.valid_users},
                                             {"dropped_users", dropped},
                                             {"vocab_size", vocab.size()}});
  return result;
}

TrainOutput cmd_train(const ExperimentConfig& config, const fs::path& out_root, std::ostream& log) {
  config.validate();
  const auto dir = fresh_run_dir(out_root, config.name);
  log << "run directory: " << dir.string() << '\n';
  auto result = train_into(config, dir, log);
  if (config.test_path) cmd_eval(dir, *config.test_path, dir, log);
  return result;
}

json cmd_eval(const fs::path& run_dir, const fs::path& test_corpus, const fs::path& out_dir, std::ostream& log,
              std::optional<std::uint64_t> seed) {
  const auto ckpt = load_model(run_dir);
  const Model model{ckpt.vocab, ckpt.encoder, *ckpt.classifier};
  const auto corpus = load_any_corpus(test_corpus, run_preprocess_config(run_dir, seed));
  if (corpus.entries.empty()) throw ValidationError("test corpus '" + test_corpus.string() + "' has no usable users");
  const auto users = labeled_users(corpus.entries);
  std::vector<RiskLevel> golds;
  for (const auto& u : users) golds.push_back(u.label);
  const auto preds = predict_all(model, users);
  auto report = evaluation_report(confusion_matrix(preds, golds));
  report["skipped_users"] = corpus.dropped_users;
  write_json_file(out_dir / "eval_report.json", report);
  log << render_report_text(report);
  return report;
}

json cmd_assess(const fs::path& run_dir, const fs::path& corpus_path, const fs::path& out_dir, std::ostream& log,
                std::optional<std::uint64_t> seed) {
  const auto ckpt = load_model(run_dir);
  const Model model{ckpt.vocab, ckpt.encoder, *ckpt.classifier};
  const auto pp = run_preprocess_config(run_dir, seed);

  // Raw input keeps its user order, including users dropped in preprocessing.
  std::vector<std::string> order;
  LoadedCorpus corpus;
  if (looks_processed(corpus_path)) {
    corpus = load_any_corpus(corpus_path, pp);
    for (const auto& e : corpus.entries) order.push_back(e.user.user_id);
  } else {
    const auto raw = load_corpus(corpus_path);
    for (const auto& e : raw.entries()) order.push_back(e.user.user_id);
    corpus.was_raw = true;
    corpus.entries = processed_from(raw, pp, corpus.dropped_users);
  }
  if (order.empty()) throw ValidationError("corpus '" + corpus_path.string() + "' is empty");
  if (corpus.entries.empty()) throw ValidationError("no user in '" + corpus_path.string() + "' survives preprocessing");

  std::map<std::string, const ProcessedUser*> by_id;
  for (const auto& e : corpus.entries) by_id[e.user.user_id] = &e.user;
  std::vector<RiskLevel> preds;
  auto out = open_out(out_dir / "predictions.jsonl");
  for (const auto& id : order) {
    json line = {{"user_id", id}};
    if (auto it = by_id.find(id); it != by_id.end()) {
      const auto trace = forward_user(model.encoder, model.classifier, it->second->passages, model.vocab);
      const auto pred = argmax_risk(trace.logits);
      preds.push_back(pred);
      line["prediction"] = std::string(1, risk_level_letter(pred));
      line["probs"] = ProbDist::from_logits(trace.logits).probs;
    } else {
      line["prediction"] = nullptr;
      line["reason"] = "empty_after_preprocessing";
    }
    out << line.dump() << '\n';
  }
  auto report = assessment_report(risk_distribution(preds));
  report["skipped_users"] = corpus.dropped_users;
  write_json_file(out_dir / "assessment_report.json", report);
  log << render_report_text(report);
  return report;
}

std::string render_sweep_table(SweepKind kind, std::span<const SweepCell> cells, std::span<const std::string> ids) {
  std::string head;
  if (kind == SweepKind::Ratio) {
    head = "#(pseudo) / #(training)";
  } else {
    for (std::size_t i = 0; i < ids.size(); ++i) head += (i ? ":" : "") + ids[i];
  }
  std::string out = fmt::format("| {} | Macro-F1 on validation set |\n|---|---|\n", head);
  for (const auto& c : cells) {
    out += fmt::format("| {} | {} |\n", c.key,
                       c.valid_macro_f1 ? fmt::format("{:.3f}", *c.valid_macro_f1) : "failed: " + c.error);
  }
  return out;
}

SweepOutput cmd_sweep(const ExperimentConfig& base, SweepKind kind, std::span<const std::string> grid,
                      std::optional<std::size_t> epochs, const fs::path& out_dir, std::ostream& log,
                      std::size_t workers) {
  base.validate();
  if (!base.pl) throw ConfigError("sweep needs a config with a 'pl' section (approach pl or pl+mvl)");
  if (grid.empty()) throw ConfigError("sweep grid is empty");
  fs::create_directories(out_dir);

  SweepOutput result;
  result.cells.resize(grid.size());
  std::vector<std::string> cell_logs(grid.size());
  auto run_cell = [&](std::size_t i) {
    auto& cell = result.cells[i];
    std::ostringstream cell_log;
    cell.key = grid[i];
    try {
      auto cfg = base;
      cfg.seed = derive_seed(base.seed, i);
      cfg.train.epochs = epochs.value_or(kSweepDefaultEpochs);
      if (kind == SweepKind::Ratio) {
        cfg.pl->ratio = Rational::parse(grid[i]);
        cfg.pl->ratio_text = grid[i];
        cell.key = percent_key(cfg.pl->ratio);
      } else {
        const auto parts = split_mix_cell(grid[i]);
        if (parts.size() != cfg.pl->sources.size()) {
          throw ConfigError(fmt::format("mix cell '{}' has {} weights for {} sources", grid[i], parts.size(),
                                        cfg.pl->sources.size()));
        }
        for (std::size_t k = 0; k < parts.size(); ++k) {
          cfg.pl->sources[k].weight = Rational::parse(parts[k]);
          cfg.pl->sources[k].weight_text = parts[k];
        }
      }
      cfg.validate();
      const auto out = train_into(cfg, out_dir / fmt::format("cell-{:02}-{}", i + 1, sanitize(cell.key)), cell_log);
      cell.valid_macro_f1 = out.state.best_macro_f1;
      cell.pseudo_users = out.pseudo_users;
    } catch (const std::exception& e) {
      cell.error = e.what();
      cell_log << "cell " << cell.key << " failed: " << e.what() << '\n';
    }
    cell_logs[i] = cell_log.str();
  };

  workers = std::max<std::size_t>(1, std::min(workers, grid.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < grid.size(); i += workers) run_cell(i);
      });
    }
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    log << "== sweep cell " << result.cells[i].key << " ==\n" << cell_logs[i];
  }

  std::vector<std::string> ids;
  for (const auto& s : base.pl->sources) ids.push_back(s.id);
  json doc = {{"schema_version", kReportSchemaVersion},
              {"kind", kind == SweepKind::Ratio ? "ratio_sweep" : "mix_sweep"},
              {"sources", ids},
              {"epochs", epochs.value_or(kSweepDefaultEpochs)}};
  for (const auto& c : result.cells) {
    json row = {{"cell", c.key}, {"pseudo_users", c.pseudo_users}};
    row["valid_macro_f1"] = c.valid_macro_f1 ? json(*c.valid_macro_f1) : json(nullptr);
    if (!c.error.empty()) row["error"] = c.error;
    doc["rows"].push_back(row);
  }
  write_json_file(out_dir / "sweep.json", doc);
  const auto table = render_sweep_table(kind, result.cells, ids);
  result.table = out_dir / "sweep.md";
  open_out(result.table) << table;
  log << table;
  return result;
}

std::vector<fs::path> cmd_synth(const SynthOptions& o, const fs::path& out_dir, std::ostream& log) {
  auto profile = make_separable_profile(60, 30, o.class_word_share);
  std::vector<fs::path> files;
  auto emit = [&](const std::string& name, const LabeledDataset& ds) {
    const auto path = out_dir / (name + ".jsonl");
    save_corpus(ds, path);
    files.push_back(path);
    log << fmt::format("wrote {} ({} users)\n", path.string(), ds.size());
  };
  fs::create_directories(out_dir);

  auto gold = profile;
  gold.class_proportions = {0.25, 0.13, 0.22, 0.40};
  gold.provenance = Provenance::Gold;
  gold.user_prefix = "train";
  emit("train", generate_synthetic_corpus(gold, o.train_users, derive_seed(o.seed, 1)));
  gold.user_prefix = "test";
  emit("test", generate_synthetic_corpus(gold, o.test_users, derive_seed(o.seed, 2)));

  auto unlabeled = gold;
  unlabeled.emit_labels = false;
  unlabeled.provenance = Provenance::Synthetic;
  unlabeled.user_prefix = "sw";
  emit("unlabeled", generate_synthetic_corpus(unlabeled, o.unlabeled_users, derive_seed(o.seed, 3)));

  auto aux = unlabeled;
  aux.subreddit = "depression";
  aux.user_prefix = "dep";
  aux.provenance = Provenance::PseudoDepression;
  emit("depression", generate_class_corpus(aux, RiskLevel::C_MediumRisk, o.auxiliary_users, derive_seed(o.seed, 4)));
  aux.subreddit = "Anxiety";
  aux.user_prefix = "anx";
  aux.provenance = Provenance::PseudoAnxiety;
  emit("anxiety", generate_class_corpus(aux, RiskLevel::B_LowRisk, o.auxiliary_users, derive_seed(o.seed, 5)));

  auto taskc = profile;
  taskc.class_proportions = {0.70, 0.10, 0.10, 0.10};
  taskc.subreddit = "sports";
  taskc.user_prefix = "tc";
  taskc.provenance = Provenance::PseudoTaskC;
  emit("taskc", generate_synthetic_corpus(taskc, o.auxiliary_users, derive_seed(o.seed, 6)));

  auto assess = unlabeled;
  assess.subreddit = "opiates";
  assess.user_prefix = "op";
  emit("assess", generate_synthetic_corpus(assess, o.assess_users, derive_seed(o.seed, 7)));
  return files;
}

}  // namespace riskcls
