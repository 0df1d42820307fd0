#include "riskcls/experiment_config.hpp"

#include <fstream>
#include <initializer_list>
#include <memory>
#include <set>

#include "riskcls/errors.hpp"

namespace riskcls {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Reads fields of one JSON object and rejects keys nobody asked for.
class Section {
 public:
  Section(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  const json& raw(const std::string& key) { return (seen_.insert(key), obj_.at(key)); }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (!has(key)) return fallback;
    return as<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(where_ + ": missing '" + key + "'");
    return as<T>(key);
  }

  Section child(const std::string& key) { return Section(raw(key), where_ + "." + key); }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(where_ + ": unknown key '" + it.key() + "'");
    }
  }

  const std::string& where() const { return where_; }

 private:
  template <class T>
  T as(const std::string& key) {
    try {
      return obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + "." + key + ": wrong type");
    }
  }

  const json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

// Ratios and weights are written as strings ("0.08", "1/2") or numbers.
std::pair<Rational, std::string> read_rational(const json& v, const std::string& where) {
  std::string text;
  if (v.is_string()) {
    text = v.get<std::string>();
  } else if (v.is_number_integer()) {
    text = std::to_string(v.get<std::int64_t>());
  } else if (v.is_number()) {
    text = json(v.get<double>()).dump();
  } else {
    throw ConfigError(where + ": expected a number or a ratio string");
  }
  try {
    return {Rational::parse(text), text};
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

std::string_view approach_name(Approach a) noexcept {
  switch (a) {
    case Approach::Baseline: return "baseline";
    case Approach::TAP: return "tap";
    case Approach::MVL: return "mvl";
    case Approach::PL: return "pl";
    case Approach::PLMVL: return "pl+mvl";
  }
  return "baseline";
}

Approach parse_approach(std::string_view text) {
  for (auto a : {Approach::Baseline, Approach::TAP, Approach::MVL, Approach::PL, Approach::PLMVL}) {
    if (approach_name(a) == text) return a;
  }
  throw ConfigError("unknown approach '" + std::string(text) + "' (expected baseline, tap, mvl, pl or pl+mvl)");
}

bool approach_uses_view(Approach a) noexcept { return a == Approach::MVL || a == Approach::PLMVL; }
bool approach_uses_pseudo_labels(Approach a) noexcept { return a == Approach::PL || a == Approach::PLMVL; }

PreprocessConfig ExperimentConfig::preprocess_config() const {
  PreprocessConfig p;
  p.max_passage_len = max_passage_len;
  p.passage_cap = passage_cap;
  p.seed = seed;
  if (stopwords_path || names_path) {
    auto lex = std::make_shared<Lexicons>(Lexicons::builtin());
    if (stopwords_path) lex->stopwords = load_word_list(*stopwords_path);
    if (names_path) lex->names = load_word_list(*names_path);
    p.lexicons = std::move(lex);
  }
  return p;
}

TrainConfig ExperimentConfig::train_config() const {
  auto t = train;
  t.seed = seed;
  return t;
}

void ExperimentConfig::validate() const {
  if (train_path.empty()) throw ConfigError("data.train is required");
  if (!valid_path && !(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw ConfigError("data.valid_fraction must lie in (0, 1)");
  }
  if (max_passage_len == 0 || passage_cap == 0) throw ConfigError("preprocess limits must be positive");
  if (min_freq == 0) throw ConfigError("preprocess.min_freq must be positive");
  if (train.encoder.max_len < max_passage_len) {
    // Longer passages would be silently truncated by the encoder.
    throw ConfigError("encoder.max_len must be >= preprocess.max_passage_len");
  }
  train.validate();

  const auto name = std::string(approach_name(approach));
  const bool uses_view = approach_uses_view(approach);
  if (uses_view && !train.view) throw ConfigError("approach '" + name + "' requires an 'mvl' section");
  if (!uses_view && train.view) throw ConfigError("approach '" + name + "' does not use the 'mvl' section");

  const bool uses_pl = approach_uses_pseudo_labels(approach);
  if (uses_pl && !pl) throw ConfigError("approach '" + name + "' requires a 'pl' section");
  if (!uses_pl && pl) throw ConfigError("approach '" + name + "' does not use the 'pl' section");
  if (pl) {
    if (pl->sources.empty()) throw ConfigError("pl.sources must not be empty");
    if (!(pl->ratio.value() > 0.0)) throw ConfigError("pl.ratio must be positive");
    std::set<std::string> ids;
    for (const auto& s : pl->sources) {
      if (s.id.empty()) throw ConfigError("pl.sources: every source needs an id");
      if (!ids.insert(s.id).second) throw ConfigError("pl.sources: duplicate id '" + s.id + "'");
      if (s.path.empty()) throw ConfigError("pl.sources['" + s.id + "']: missing path");
    }
  }

  const bool uses_tap = approach == Approach::TAP;
  if (uses_tap && !tap) throw ConfigError("approach 'tap' requires a 'tap' section");
  if (!uses_tap && tap) throw ConfigError("approach '" + name + "' does not use the 'tap' section");
  if (uses_tap && !tap->checkpoint && !unlabeled_path) {
    throw ConfigError("approach 'tap' needs data.unlabeled or tap.checkpoint");
  }
}

ExperimentConfig parse_experiment_config(const json& doc, const fs::path& base_dir) {
  Section root(doc, "config");
  const int version = root.require<int>("schema_version");
  if (version != kExperimentSchemaVersion) {
    throw ConfigError("unsupported schema_version " + std::to_string(version) + " (expected " +
                      std::to_string(kExperimentSchemaVersion) + ")");
  }
  ExperimentConfig cfg;
  cfg.name = root.get<std::string>("name", cfg.name);
  cfg.approach = parse_approach(root.require<std::string>("approach"));
  cfg.seed = root.get<std::uint64_t>("seed", cfg.seed);

  {
    auto data = root.child("data");
    cfg.train_path = resolve(base_dir, data.require<std::string>("train"));
    if (data.has("valid")) cfg.valid_path = resolve(base_dir, data.require<std::string>("valid"));
    if (data.has("test")) cfg.test_path = resolve(base_dir, data.require<std::string>("test"));
    if (data.has("unlabeled")) cfg.unlabeled_path = resolve(base_dir, data.require<std::string>("unlabeled"));
    cfg.valid_fraction = data.get<double>("valid_fraction", cfg.valid_fraction);
    data.finish();
  }
  if (root.has("output")) {
    auto out = root.child("output");
    cfg.out_dir = resolve(base_dir, out.get<std::string>("dir", cfg.out_dir.string()));
    out.finish();
  } else {
    cfg.out_dir = resolve(base_dir, cfg.out_dir.string());
  }
  if (root.has("preprocess")) {
    auto pre = root.child("preprocess");
    cfg.max_passage_len = pre.get<std::size_t>("max_passage_len", cfg.max_passage_len);
    cfg.passage_cap = pre.get<std::size_t>("passage_cap", cfg.passage_cap);
    cfg.min_freq = pre.get<std::size_t>("min_freq", cfg.min_freq);
    if (pre.has("stopwords")) cfg.stopwords_path = resolve(base_dir, pre.require<std::string>("stopwords"));
    if (pre.has("names")) cfg.names_path = resolve(base_dir, pre.require<std::string>("names"));
    pre.finish();
  }
  if (root.has("encoder")) {
    auto enc = root.child("encoder");
    cfg.train.encoder.dim = enc.get<std::size_t>("dim", cfg.train.encoder.dim);
    cfg.train.encoder.layers = enc.get<std::size_t>("layers", cfg.train.encoder.layers);
    cfg.train.encoder.max_len = enc.get<std::size_t>("max_len", cfg.train.encoder.max_len);
    enc.finish();
  }
  if (root.has("train")) {
    auto tr = root.child("train");
    auto& t = cfg.train;
    t.epochs = tr.get<std::size_t>("epochs", t.epochs);
    t.batch_size = tr.get<std::size_t>("batch_size", t.batch_size);
    t.learning_rate = tr.get<double>("learning_rate", t.learning_rate);
    if (tr.has("optimizer")) t.optimizer = parse_optimizer(tr.require<std::string>("optimizer"));
    t.patience = tr.get<std::size_t>("patience", t.patience);
    t.threads = tr.get<std::size_t>("threads", t.threads);
    tr.finish();
  }
  if (root.has("tap")) {
    auto tp = root.child("tap");
    auto& t = cfg.train;
    TapSettings settings;
    t.tap_epochs = tp.get<std::size_t>("epochs", t.tap_epochs);
    t.tap_patience = tp.get<std::size_t>("patience", t.tap_patience);
    t.tap_learning_rate = tp.get<double>("learning_rate", t.tap_learning_rate);
    t.tap_mask_rate = tp.get<double>("mask_rate", t.tap_mask_rate);
    t.tap_heldout_fraction = tp.get<double>("heldout_fraction", t.tap_heldout_fraction);
    if (tp.has("checkpoint")) settings.checkpoint = resolve(base_dir, tp.require<std::string>("checkpoint"));
    tp.finish();
    cfg.tap = settings;
  }
  if (root.has("mvl")) {
    auto mv = root.child("mvl");
    ViewStrategy view;
    try {
      view.kind = parse_view_kind(mv.require<std::string>("view"));
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("config.mvl.view: ") + e.what());
    }
    view.mask_rate = mv.get<double>("mask_rate", view.mask_rate);
    view.k = mv.get<std::size_t>("k", view.k);
    cfg.train.kl_weight = mv.get<double>("kl_weight", cfg.train.kl_weight);
    mv.finish();
    cfg.train.view = view;
  }
  if (root.has("pl")) {
    auto p = root.child("pl");
    PseudoLabelConfig pl;
    if (p.has("ratio")) std::tie(pl.ratio, pl.ratio_text) = read_rational(p.raw("ratio"), "config.pl.ratio");
    const auto& sources = p.raw("sources");
    if (!sources.is_array()) throw ConfigError("config.pl.sources: expected an array");
    for (std::size_t i = 0; i < sources.size(); ++i) {
      Section s(sources[i], "config.pl.sources[" + std::to_string(i) + "]");
      PseudoSource src;
      src.id = s.require<std::string>("id");
      src.path = resolve(base_dir, s.require<std::string>("path"));
      const auto label = s.require<std::string>("label");
      if (label != "keep") {
        try {
          src.assigned = parse_risk_level(label);
        } catch (const ValidationError&) {
          throw ConfigError(s.where() + ".label: expected a, b, c, d or keep");
        }
      }
      if (s.has("weight")) std::tie(src.weight, src.weight_text) = read_rational(s.raw("weight"), s.where() + ".weight");
      s.finish();
      pl.sources.push_back(std::move(src));
    }
    p.finish();
    cfg.pl = std::move(pl);
  }
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  return parse_experiment_config(doc, fs::absolute(path).parent_path());
}

json experiment_config_json(const ExperimentConfig& c) {
  json doc;
  doc["schema_version"] = kExperimentSchemaVersion;
  doc["name"] = c.name;
  doc["approach"] = std::string(approach_name(c.approach));
  doc["seed"] = c.seed;
  json data;
  data["train"] = c.train_path.string();
  if (c.valid_path) data["valid"] = c.valid_path->string();
  if (c.test_path) data["test"] = c.test_path->string();
  if (c.unlabeled_path) data["unlabeled"] = c.unlabeled_path->string();
  data["valid_fraction"] = c.valid_fraction;
  doc["data"] = data;
  doc["output"] = {{"dir", c.out_dir.string()}};
  doc["preprocess"] = {
      {"max_passage_len", c.max_passage_len}, {"passage_cap", c.passage_cap}, {"min_freq", c.min_freq}};
  if (c.stopwords_path) doc["preprocess"]["stopwords"] = c.stopwords_path->string();
  if (c.names_path) doc["preprocess"]["names"] = c.names_path->string();
  const auto& t = c.train;
  doc["encoder"] = {{"dim", t.encoder.dim}, {"layers", t.encoder.layers}, {"max_len", t.encoder.max_len}};
  doc["train"] = {{"epochs", t.epochs},
                  {"batch_size", t.batch_size},
                  {"learning_rate", t.learning_rate},
                  {"optimizer", std::string(optimizer_name(t.optimizer))},
                  {"patience", t.patience},
                  {"threads", t.threads}};
  if (c.tap) {
    json tap = {{"epochs", t.tap_epochs},
                {"patience", t.tap_patience},
                {"learning_rate", t.tap_learning_rate},
                {"mask_rate", t.tap_mask_rate},
                {"heldout_fraction", t.tap_heldout_fraction}};
    if (c.tap->checkpoint) tap["checkpoint"] = c.tap->checkpoint->string();
    doc["tap"] = tap;
  }
  if (t.view) {
    doc["mvl"] = {{"view", std::string(view_kind_name(t.view->kind))},
                  {"mask_rate", t.view->mask_rate},
                  {"k", t.view->k},
                  {"kl_weight", t.kl_weight}};
  }
  if (c.pl) {
    json sources = json::array();
    for (const auto& s : c.pl->sources) {
      sources.push_back({{"id", s.id},
                         {"path", s.path.string()},
                         {"label", s.assigned ? std::string(1, risk_level_letter(*s.assigned)) : "keep"},
                         {"weight", s.weight_text}});
    }
    doc["pl"] = {{"ratio", c.pl->ratio_text}, {"sources", sources}};
  }
  return doc;
}

}  // namespace riskcls
