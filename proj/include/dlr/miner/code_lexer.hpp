#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlr::miner {

enum class Language { Java, Python };

std::optional<Language> parse_language(std::string_view name);
std::string_view language_name(Language lang);

enum class TokenKind { Identifier, Keyword, Number, String, Boolean, Null, Operator, Punctuation };

struct CodeToken {
  TokenKind kind;
  std::string text;

  bool operator==(const CodeToken&) const = default;
};

// Lexes one source line into code tokens, dropping whitespace and comments.
// Returns nullopt for lines that cannot be lexed (unterminated strings,
// stray characters).
std::optional<std::vector<CodeToken>> lex_line(std::string_view line, Language lang = Language::Java);

bool is_binary_operator_text(std::string_view text);

}  // namespace dlr::miner
