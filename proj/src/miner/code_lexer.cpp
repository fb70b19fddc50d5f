#include "dlr/miner/code_lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

namespace dlr::miner {

namespace {

const std::unordered_set<std::string_view> kJavaKeywords = {
    "abstract", "assert",     "boolean",   "break",     "byte",     "case",   "catch",
    "char",     "class",      "const",     "continue",  "default",  "do",     "double",
    "else",     "enum",       "extends",   "final",     "finally",  "float",  "for",
    "goto",     "if",         "implements", "import",   "instanceof", "int",  "interface",
    "long",     "native",     "new",       "package",   "private",  "protected", "public",
    "return",   "short",      "static",    "strictfp",  "super",    "switch", "synchronized",
    "this",     "throw",      "throws",    "transient", "try",      "void",   "volatile",
    "while",    "var"};

const std::unordered_set<std::string_view> kPythonKeywords = {
    "as",   "assert", "async",  "await", "break",  "class", "continue", "def",   "del",
    "elif", "else",   "except", "finally", "for",  "from",  "global",   "if",    "import",
    "lambda", "nonlocal", "pass", "raise", "return", "try", "while",    "with",  "yield"};

const std::unordered_set<std::string_view> kPythonWordOperators = {"and", "or", "not", "in", "is"};

const std::unordered_set<std::string_view> kBinaryOperators = {
    "+",  "-",  "*",  "/",  "%",  "&",  "|",  "^",  "<<", ">>", ">>>", "&&",
    "||", "==", "!=", "<",  ">",  "<=", ">=", "**", "//", "and", "or"};

// Longest first so greedy matching picks e.g. ">>>=" over ">>".
constexpr std::array<std::string_view, 44> kOperators = {
    ">>>=", "<<=", ">>=", ">>>", "**=", "//=", "...", "->", "::", ":=", "++", "--", "&&", "||", "==",
    "!=",   "<=",  ">=",  "+=",  "-=",  "*=",  "/=",  "%=", "&=", "|=", "^=", "<<", ">>", "**",
    "//",   "+",   "-",   "*",   "/",   "%",   "&",   "|",  "^",  "!",  "~",  "?",  ":",  "=",  "<"};

bool is_ident_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}
bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$';
}

}  // namespace

std::optional<Language> parse_language(std::string_view name) {
  if (name == "java") return Language::Java;
  if (name == "python") return Language::Python;
  return std::nullopt;
}

std::string_view language_name(Language lang) { return lang == Language::Java ? "java" : "python"; }

bool is_binary_operator_text(std::string_view text) { return kBinaryOperators.contains(text); }

std::optional<std::vector<CodeToken>> lex_line(std::string_view line, Language lang) {
  std::vector<CodeToken> out;
  const bool python = lang == Language::Python;
  std::size_t i = 0;
  const std::size_t n = line.size();
  // Lexes a string literal whose (optional) prefix starts at `start` and whose
  // opening quote sits at `quote_pos`; advances i past it.
  const auto lex_string = [&](std::size_t start, std::size_t quote_pos) {
    const char quote = line[quote_pos];
    const bool triple = python && quote_pos + 2 < n && line[quote_pos + 1] == quote &&
                        line[quote_pos + 2] == quote;
    const std::string_view closer = line.substr(quote_pos, triple ? 3 : 1);
    std::size_t j = quote_pos + closer.size();
    while (j < n) {
      if (line[j] == '\\') {
        j += 2;
        continue;
      }
      if (line.substr(j, closer.size()) == closer) {
        j += closer.size();
        out.push_back({TokenKind::String, std::string(line.substr(start, j - start))});
        i = j;
        return true;
      }
      ++j;
    }
    return false;
  };
  while (i < n) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (python && c == '#') break;
    if (!python && c == '/' && i + 1 < n && line[i + 1] == '/') break;
    if (!python && c == '/' && i + 1 < n && line[i + 1] == '*') {
      const auto end = line.find("*/", i + 2);
      if (end == std::string_view::npos) break;
      i = end + 2;
      continue;
    }
    if (is_ident_start(c)) {
      std::size_t j = i;
      while (j < n && is_ident_char(line[j])) ++j;
      std::string word(line.substr(i, j - i));
      // Python string prefixes such as r"..." or f'...'.
      if (python && j < n && (line[j] == '"' || line[j] == '\'') && word.size() <= 2) {
        bool prefix = true;
        for (char p : word) prefix = prefix && std::string_view("rRbBfFuU").find(p) != std::string_view::npos;
        if (prefix) {
          if (!lex_string(i, j)) return std::nullopt;
          continue;
        }
      }
      {
        TokenKind kind = TokenKind::Identifier;
        if (python ? (word == "True" || word == "False") : (word == "true" || word == "false")) {
          kind = TokenKind::Boolean;
        } else if (python ? word == "None" : word == "null") {
          kind = TokenKind::Null;
        } else if (python && kPythonWordOperators.contains(word)) {
          kind = TokenKind::Operator;
        } else if (python ? kPythonKeywords.contains(word) : kJavaKeywords.contains(word)) {
          kind = TokenKind::Keyword;
        }
        out.push_back({kind, std::move(word)});
        i = j;
        continue;
      }
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(line[i + 1])))) {
      std::size_t j = i;
      const bool hex = c == '0' && j + 1 < n && (line[j + 1] == 'x' || line[j + 1] == 'X');
      while (j < n) {
        const char d = line[j];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '.') {
          ++j;
        } else if ((d == '+' || d == '-') && !hex && (line[j - 1] == 'e' || line[j - 1] == 'E')) {
          ++j;
        } else {
          break;
        }
      }
      out.push_back({TokenKind::Number, std::string(line.substr(i, j - i))});
      i = j;
      continue;
    }
    if (c == '"' || c == '\'') {
      if (!lex_string(i, i)) return std::nullopt;
      continue;
    }
    if (std::string_view("()[]{},;.").find(c) != std::string_view::npos) {
      out.push_back({TokenKind::Punctuation, std::string(1, c)});
      ++i;
      continue;
    }
    bool matched = false;
    for (auto op : kOperators) {
      if (line.substr(i, op.size()) == op) {
        if (!python && op == "//") continue;
        out.push_back({TokenKind::Operator, std::string(op)});
        i += op.size();
        matched = true;
        break;
      }
    }
    if (!matched && (c == '>' || c == '@')) {
      out.push_back({TokenKind::Operator, std::string(1, c)});
      ++i;
      matched = true;
    }
    if (!matched) return std::nullopt;
  }
  return out;
}

}  // namespace dlr::miner
