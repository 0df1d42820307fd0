#include <fstream>
#include <sstream>

#include "riskcls/errors.hpp"
#include "riskcls/preprocess.hpp"

namespace riskcls {

namespace detail {
std::string_view builtin_stopwords_text();
std::string_view builtin_names_text();
std::string_view builtin_abbreviations_text();
}  // namespace detail

WordSet parse_word_list(std::string_view text) {
  WordSet words;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.remove_suffix(1);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.front()))) line.remove_prefix(1);
    if (!line.empty() && line.front() != '#') {
      std::string w(line);
      for (auto& c : w) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      words.insert(std::move(w));
    }
    pos = end + 1;
  }
  return words;
}

WordSet load_word_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_word_list(ss.str());
}

const Lexicons& Lexicons::builtin() {
  static const Lexicons lex{parse_word_list(detail::builtin_stopwords_text()),
                            parse_word_list(detail::builtin_names_text()),
                            parse_word_list(detail::builtin_abbreviations_text())};
  return lex;
}

}  // namespace riskcls
