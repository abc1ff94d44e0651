#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace relnet {

struct Token {
  std::string surface;
  std::string lemma;
  std::string upos;
  int head = 0;  // 1-based index of the head token; 0 = root
  std::string deprel;
};

struct ParsedSentence {
  std::vector<Token> tokens;
  std::string doc_id;
  std::string month;  // "YYYY-MM"
  std::optional<std::string> country;
};

/// Reads CoNLL-U. Document metadata comes from `# newdoc id = ...`,
/// `# meta month = YYYY-MM` and `# meta country = XX` comments and applies to
/// every following sentence until the next `# newdoc`. Multiword-token ranges
/// and empty nodes are skipped. Throws InputError with the line number on
/// malformed rows, and when a sentence has no doc id or month.
std::vector<ParsedSentence> read_conllu(std::istream& in, const std::string& source = "<stream>");
std::vector<ParsedSentence> read_conllu_file(const std::string& path);
/// All *.conllu files of a directory, in lexicographic path order.
std::vector<ParsedSentence> read_conllu_dir(const std::string& dir);

/// Throws InputError if any head index points outside the sentence.
void validate_heads(const ParsedSentence& sentence);

}  // namespace relnet
