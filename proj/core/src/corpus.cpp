#include "riskcls/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "riskcls/errors.hpp"
#include "riskcls/rng.hpp"

namespace riskcls {

using nlohmann::json;

std::string_view provenance_name(Provenance p) noexcept {
  switch (p) {
    case Provenance::Gold: return "gold";
    case Provenance::PseudoAnxiety: return "pseudo_anxiety";
    case Provenance::PseudoDepression: return "pseudo_depression";
    case Provenance::PseudoTaskC: return "pseudo_taskc";
    case Provenance::Synthetic: return "synthetic";
  }
  return "unknown";
}

Provenance parse_provenance(std::string_view text) {
  for (auto p : {Provenance::Gold, Provenance::PseudoAnxiety, Provenance::PseudoDepression,
                 Provenance::PseudoTaskC, Provenance::Synthetic}) {
    if (provenance_name(p) == text) return p;
  }
  throw ValidationError("unknown provenance '" + std::string(text) + "'");
}

LabeledDataset::LabeledDataset(std::vector<DatasetEntry> entries) : entries_(std::move(entries)) {
  std::unordered_set<std::string> seen;
  seen.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (!seen.insert(e.user.user_id).second) {
      throw ValidationError("duplicate user_id '" + e.user.user_id + "'");
    }
    std::unordered_set<std::string> post_ids;
    for (const auto& p : e.user.posts) {
      if (!post_ids.insert(p.post_id).second) {
        throw ValidationError("duplicate post_id '" + p.post_id + "' for user '" + e.user.user_id + "'");
      }
    }
  }
}

bool LabeledDataset::fully_labeled() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.label.has_value(); });
}

std::array<std::size_t, kNumRiskLevels> LabeledDataset::label_counts() const noexcept {
  std::array<std::size_t, kNumRiskLevels> counts{};
  for (const auto& e : entries_) {
    if (e.label) ++counts[index_of(*e.label)];
  }
  return counts;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  std::vector<DatasetEntry> entries;
  entries.reserve(a.size() + b.size());
  entries.insert(entries.end(), a.entries().begin(), a.entries().end());
  entries.insert(entries.end(), b.entries().begin(), b.entries().end());
  return LabeledDataset(std::move(entries));
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

const json& require(const json& obj, const char* key, const std::string& source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(source, line, std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& source, std::size_t line) {
  const auto& v = require(obj, key, source, line);
  if (!v.is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const json& obj, const char* key, const std::string& source, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw ParseError(source, line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

DatasetEntry entry_from_json(const json& j, const std::string& source, std::size_t line) {
  if (!j.is_object()) throw ParseError(source, line, "expected a JSON object");
  DatasetEntry entry;
  entry.user.user_id = require_string(j, "user_id", source, line);
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ParseError(source, line, "field 'label' must be a string");
    try {
      entry.label = parse_risk_level(it->get<std::string>());
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  }
  if (auto it = j.find("provenance"); it != j.end() && it->is_string()) {
    try {
      entry.provenance = parse_provenance(it->get<std::string>());
    } catch (const ValidationError& e) {
      throw ParseError(source, line, e.what());
    }
  }
  const auto& posts = require(j, "posts", source, line);
  if (!posts.is_array()) throw ParseError(source, line, "field 'posts' must be an array");
  for (const auto& p : posts) {
    if (!p.is_object()) throw ParseError(source, line, "post must be a JSON object");
    PostRecord post;
    post.post_id = require_string(p, "post_id", source, line);
    post.subreddit = optional_string(p, "subreddit", source, line);
    if (auto it = p.find("timestamp"); it != p.end() && !it->is_null()) {
      if (!it->is_number_integer()) throw ParseError(source, line, "field 'timestamp' must be an integer");
      post.timestamp = it->get<std::int64_t>();
    }
    post.title = optional_string(p, "title", source, line);
    post.body = optional_string(p, "body", source, line);
    entry.user.posts.push_back(std::move(post));
  }
  return entry;
}

json entry_to_json(const DatasetEntry& e) {
  json j;
  j["user_id"] = e.user.user_id;
  if (e.label) j["label"] = std::string(1, risk_level_letter(*e.label));
  if (e.provenance != Provenance::Gold) j["provenance"] = std::string(provenance_name(e.provenance));
  json posts = json::array();
  for (const auto& p : e.user.posts) {
    json jp;
    jp["post_id"] = p.post_id;
    jp["subreddit"] = p.subreddit;
    if (p.timestamp) jp["timestamp"] = *p.timestamp;
    jp["title"] = p.title;
    jp["body"] = p.body;
    posts.push_back(std::move(jp));
  }
  j["posts"] = std::move(posts);
  return j;
}

}  // namespace

LabeledDataset parse_corpus(std::istream& in, const std::string& source_name) {
  std::vector<DatasetEntry> entries;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(source_name, line_no, e.what());
    }
    auto entry = entry_from_json(j, source_name, line_no);
    if (!seen.insert(entry.user.user_id).second) {
      throw ValidationError(source_name + ":" + std::to_string(line_no) + ": duplicate user_id '" +
                            entry.user.user_id + "'");
    }
    entries.push_back(std::move(entry));
  }
  return LabeledDataset(std::move(entries));
}

LabeledDataset load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  return parse_corpus(in, path.string());
}

void write_corpus(const LabeledDataset& dataset, std::ostream& out) {
  for (const auto& e : dataset.entries()) out << entry_to_json(e).dump() << '\n';
}

void save_corpus(const LabeledDataset& dataset, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus '" + path.string() + "'");
  write_corpus(dataset, out);
}

// ---------------------------------------------------------------------------
// Apportionment and sampling

std::size_t round_half_up(double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("round_half_up: negative or NaN input");
  return static_cast<std::size_t>(std::floor(x + 0.5));
}

Rational Rational::parse(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw ValidationError("invalid rational '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();
  if (text.back() == '%') {
    if (text.size() == 1 || text[text.size() - 2] == '%') return fail();
    auto r = parse(text.substr(0, text.size() - 1));
    r.den *= 100;
    const auto g = std::gcd(r.num, r.den);
    return {r.num / g, r.den / g};
  }
  auto parse_int = [&](std::string_view s) -> std::int64_t {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); })) {
      fail();
    }
    if (s.size() > 15) fail();
    return std::stoll(std::string(s));
  };
  Rational r;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    r.num = parse_int(text.substr(0, slash));
    r.den = parse_int(text.substr(slash + 1));
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    auto int_part = text.substr(0, dot);
    auto frac_part = text.substr(dot + 1);
    if (frac_part.size() > 9) fail();
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    r.num = (int_part.empty() ? 0 : parse_int(int_part)) * scale + (frac_part.empty() ? 0 : parse_int(frac_part));
    r.den = scale;
  } else {
    r.num = parse_int(text);
    r.den = 1;
  }
  if (r.num <= 0 || r.den <= 0) fail();
  auto g = std::gcd(r.num, r.den);
  r.num /= g;
  r.den /= g;
  return r;
}

std::vector<std::size_t> apportion(std::span<const Rational> weights, std::size_t total,
                                   std::span<const std::size_t> tie_order) {
  const std::size_t n = weights.size();
  if (tie_order.size() != n) throw std::invalid_argument("apportion: tie_order size mismatch");
  std::vector<std::size_t> counts(n, 0);
  if (n == 0) {
    if (total != 0) throw ValidationError("cannot apportion a positive total over zero components");
    return counts;
  }
  // Bring every weight onto a common denominator so quotas are exact.
  std::int64_t common = 1;
  for (const auto& w : weights) {
    if (w.num < 0 || w.den <= 0) throw ValidationError("apportion: weights must be non-negative");
    common = std::lcm(common, w.den);
  }
  std::vector<__int128> scaled(n);
  __int128 sum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    scaled[i] = static_cast<__int128>(weights[i].num) * (common / weights[i].den);
    sum += scaled[i];
  }
  if (sum == 0) {
    if (total != 0) throw ValidationError("cannot apportion a positive total over zero weights");
    return counts;
  }
  std::vector<__int128> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    __int128 q = static_cast<__int128>(total) * scaled[i];
    counts[i] = static_cast<std::size_t>(q / sum);
    remainder[i] = q % sum;
    assigned += counts[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
    if (tie_order[a] != tie_order[b]) return tie_order[a] < tie_order[b];
    return a < b;
  });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++counts[order[k]];
  return counts;
}

std::vector<std::size_t> realized_counts(const MixSpec& spec) {
  const std::size_t n = spec.components.size();
  std::vector<std::size_t> by_id(n);
  std::iota(by_id.begin(), by_id.end(), std::size_t{0});
  std::stable_sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) {
    return spec.components[a].source_id < spec.components[b].source_id;
  });
  std::vector<std::size_t> rank(n);
  for (std::size_t r = 0; r < n; ++r) rank[by_id[r]] = r;
  std::vector<Rational> weights;
  weights.reserve(n);
  for (const auto& c : spec.components) {
    if (c.weight.num <= 0 || c.weight.den <= 0) {
      throw ValidationError("mix weight for '" + c.source_id + "' must be positive");
    }
    weights.push_back(c.weight);
  }
  return apportion(weights, spec.total_count, rank);
}

LabeledDataset sample_users(const LabeledDataset& source, std::size_t count, std::uint64_t seed) {
  if (count > source.size()) {
    throw ValidationError("cannot sample " + std::to_string(count) + " users from a dataset of " +
                          std::to_string(source.size()));
  }
  Rng rng(seed);
  auto picked = sample_without_replacement(rng, source.size(), count);
  std::vector<DatasetEntry> out;
  out.reserve(count);
  for (auto i : picked) out.push_back(source[i]);
  return LabeledDataset(std::move(out));
}

LabeledDataset build_pseudo_labeled(const LabeledDataset& aux, RiskLevel assigned, std::size_t count,
                                    std::uint64_t seed, Provenance provenance) {
  auto sampled = sample_users(aux, count, seed);
  std::vector<DatasetEntry> out = sampled.entries();
  for (auto& e : out) {
    e.label = assigned;
    e.provenance = provenance;
  }
  return LabeledDataset(std::move(out));
}

LabeledDataset mix_pseudo_sources(const MixSpec& spec, const std::map<std::string, LabeledDataset>& sources,
                                  std::uint64_t seed) {
  auto counts = realized_counts(spec);
  std::vector<DatasetEntry> out;
  for (std::size_t i = 0; i < spec.components.size(); ++i) {
    const auto& c = spec.components[i];
    auto it = sources.find(c.source_id);
    if (it == sources.end()) throw ValidationError("unknown pseudo-label source '" + c.source_id + "'");
    if (counts[i] > it->second.size()) {
      throw ValidationError("pseudo-label source '" + c.source_id + "' has " + std::to_string(it->second.size()) +
                            " users but " + std::to_string(counts[i]) + " are required");
    }
    auto component_seed = derive_seed(seed, i);
    auto part = c.assigned ? build_pseudo_labeled(it->second, *c.assigned, counts[i], component_seed, c.provenance)
                           : sample_users(it->second, counts[i], component_seed);
    out.insert(out.end(), part.entries().begin(), part.entries().end());
  }
  return LabeledDataset(std::move(out));
}

std::size_t pseudo_count_for(std::size_t train_size, double ratio) {
  if (!(ratio >= 0.0)) throw ValidationError("pseudo-label ratio must be non-negative");
  return round_half_up(ratio * static_cast<double>(train_size));
}

LabeledDataset augment_training(const LabeledDataset& train, const LabeledDataset& pseudo, double ratio) {
  const std::size_t n = pseudo_count_for(train.size(), ratio);
  if (pseudo.size() < n) {
    throw ValidationError("need " + std::to_string(n) + " pseudo-labeled users but only " +
                          std::to_string(pseudo.size()) + " are available");
  }
  std::vector<DatasetEntry> out = train.entries();
  out.insert(out.end(), pseudo.entries().begin(), pseudo.entries().begin() + static_cast<std::ptrdiff_t>(n));
  return LabeledDataset(std::move(out));
}

std::vector<bool> stratified_valid_mask(std::span<const RiskLevel> labels, double valid_fraction,
                                        std::uint64_t seed) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw ValidationError("valid_fraction must lie strictly between 0 and 1");
  }
  std::array<std::vector<std::size_t>, kNumRiskLevels> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[index_of(labels[i])].push_back(i);

  const std::size_t n_valid = round_half_up(valid_fraction * static_cast<double>(labels.size()));
  std::vector<Rational> weights;
  std::vector<std::size_t> ties;
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    weights.push_back(Rational{static_cast<std::int64_t>(members[c].size()), 1});
    ties.push_back(c);
  }
  auto per_class = apportion(weights, n_valid, ties);

  std::vector<bool> in_valid(labels.size(), false);
  for (std::size_t c = 0; c < kNumRiskLevels; ++c) {
    Rng rng(derive_seed(seed, c));
    for (auto k : sample_without_replacement(rng, members[c].size(), per_class[c])) {
      in_valid[members[c][k]] = true;
    }
  }
  return in_valid;
}

std::pair<LabeledDataset, LabeledDataset> split_train_valid(const LabeledDataset& dataset, double valid_fraction,
                                                            std::uint64_t seed) {
  if (!dataset.fully_labeled()) throw ValidationError("split_train_valid requires a fully labeled dataset");
  std::vector<RiskLevel> labels;
  for (std::size_t i = 0; i < dataset.size(); ++i) labels.push_back(*dataset[i].label);
  const auto in_valid = stratified_valid_mask(labels, valid_fraction, seed);
  std::vector<DatasetEntry> train, valid;
  for (std::size_t i = 0; i < dataset.size(); ++i) (in_valid[i] ? valid : train).push_back(dataset[i]);
  return {LabeledDataset(std::move(train)), LabeledDataset(std::move(valid))};
}

}  // namespace riskcls
