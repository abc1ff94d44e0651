#include "relnet/conllu.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "relnet/error.hpp"

namespace relnet {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

// "# key = value" -> (key, value)
std::optional<std::pair<std::string, std::string>> comment_kv(std::string_view line) {
  line.remove_prefix(1);
  const auto eq = line.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  return std::pair{trim(line.substr(0, eq)), trim(line.substr(eq + 1))};
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& out) {
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc{} && p == end;
}

const std::regex& month_pattern() {
  static const std::regex re(R"(\d{4}-(0[1-9]|1[0-2]))");
  return re;
}

}  // namespace

void validate_heads(const ParsedSentence& sentence) {
  const int n = static_cast<int>(sentence.tokens.size());
  for (int i = 0; i < n; ++i) {
    const int h = sentence.tokens[static_cast<std::size_t>(i)].head;
    if (h < 0 || h > n || h == i + 1) {
      throw InputError("malformed head index " + std::to_string(h) + " on token " +
                       std::to_string(i + 1) + " of a " + std::to_string(n) +
                       "-token sentence in doc '" + sentence.doc_id + "'");
    }
  }
}

std::vector<ParsedSentence> read_conllu(std::istream& in, const std::string& source) {
  std::vector<ParsedSentence> out;
  std::string doc_id;
  std::string month;
  std::optional<std::string> country;
  ParsedSentence current;
  std::size_t line_no = 0;
  std::size_t sentence_start = 0;

  auto where = [&](std::size_t l) { return source + ":" + std::to_string(l); };

  auto flush = [&] {
    if (current.tokens.empty()) return;
    if (doc_id.empty()) throw InputError(where(sentence_start) + ": sentence has no '# newdoc id'");
    if (month.empty()) throw InputError(where(sentence_start) + ": sentence has no '# meta month'");
    current.doc_id = doc_id;
    current.month = month;
    current.country = country;
    try {
      validate_heads(current);
    } catch (const InputError& e) {
      throw InputError(where(sentence_start) + ": " + e.what());
    }
    out.push_back(std::move(current));
    current = ParsedSentence{};
  };

  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    if (line[0] == '#') {
      auto kv = comment_kv(line);
      if (!kv) continue;
      auto& [key, value] = *kv;
      if (key == "newdoc id" || key == "newdoc") {
        flush();
        doc_id = value;
        month.clear();
        country.reset();
      } else if (key == "meta month") {
        if (!std::regex_match(value, month_pattern())) {
          throw InputError(where(line_no) + ": month must be YYYY-MM, got '" + value + "'");
        }
        month = value;
      } else if (key == "meta country") {
        country = value;
      }
      continue;
    }
    const auto cols = split_tabs(line);
    if (cols.size() != 10) {
      throw InputError(where(line_no) + ": expected 10 tab-separated columns, got " +
                       std::to_string(cols.size()));
    }
    // Multiword token ranges (1-2) and empty nodes (1.1) carry no syntax.
    if (cols[0].find_first_of("-.") != std::string_view::npos) continue;
    int id = 0;
    if (!parse_int(cols[0], id) || id != static_cast<int>(current.tokens.size()) + 1) {
      throw InputError(where(line_no) + ": token id '" + std::string(cols[0]) +
                       "' out of sequence");
    }
    if (current.tokens.empty()) sentence_start = line_no;
    Token tok;
    tok.surface = std::string(cols[1]);
    tok.lemma = cols[2] == "_" ? tok.surface : std::string(cols[2]);
    tok.upos = std::string(cols[3]);
    if (!parse_int(cols[6], tok.head)) {
      throw InputError(where(line_no) + ": malformed head index '" + std::string(cols[6]) + "'");
    }
    tok.deprel = std::string(cols[7]);
    current.tokens.push_back(std::move(tok));
  }
  flush();
  return out;
}

std::vector<ParsedSentence> read_conllu_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open CoNLL-U file '" + path + "'");
  return read_conllu(in, path);
}

std::vector<ParsedSentence> read_conllu_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw InputError("not a directory: '" + dir + "'");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".conllu") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<ParsedSentence> out;
  for (const auto& f : files) {
    auto part = read_conllu_file(f.string());
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  return out;
}

}  // namespace relnet
