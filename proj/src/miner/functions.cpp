#include "dlr/miner/functions.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "dlr/common/text.hpp"

namespace dlr::miner {

namespace {

std::vector<std::string> source_lines(std::string_view text) {
  auto lines = text::split_lines(text);
  for (auto& line : lines) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
  }
  if (lines.size() > 1 && lines.back().empty()) lines.pop_back();
  return lines;
}

// ---------------------------------------------------------------- Java ----

// Copy of the text with comments and literal contents blanked (newlines kept).
std::string mask_java(std::string_view text) {
  std::string out(text);
  std::size_t i = 0;
  const std::size_t n = text.size();
  auto blank = [&](std::size_t from, std::size_t to) {
    for (std::size_t k = from; k < to && k < n; ++k) {
      if (out[k] != '\n') out[k] = ' ';
    }
  };
  while (i < n) {
    if (text.substr(i, 2) == "//") {
      const auto end = text.find('\n', i);
      const auto stop = end == std::string_view::npos ? n : end;
      blank(i, stop);
      i = stop;
    } else if (text.substr(i, 2) == "/*") {
      const auto end = text.find("*/", i + 2);
      const auto stop = end == std::string_view::npos ? n : end + 2;
      blank(i, stop);
      i = stop;
    } else if (text.substr(i, 3) == "\"\"\"") {
      const auto end = text.find("\"\"\"", i + 3);
      const auto stop = end == std::string_view::npos ? n : end + 3;
      blank(i + 1, stop - 1);
      i = stop;
    } else if (text[i] == '"' || text[i] == '\'') {
      const char quote = text[i];
      std::size_t j = i + 1;
      while (j < n && text[j] != quote && text[j] != '\n') j += text[j] == '\\' ? 2 : 1;
      blank(i + 1, std::min(j, n));
      i = std::min(j + 1, n);
    } else {
      ++i;
    }
  }
  return out;
}

struct JavaToken {
  std::string text;
  std::size_t offset;
  std::size_t line;
};

std::vector<JavaToken> tokenize_masked(const std::string& masked) {
  std::vector<JavaToken> tokens;
  std::size_t line = 0;
  std::size_t i = 0;
  while (i < masked.size()) {
    const char c = masked[i];
    if (c == '\n') {
      ++line;
      ++i;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      std::size_t j = i;
      while (j < masked.size() &&
             (std::isalnum(static_cast<unsigned char>(masked[j])) || masked[j] == '_' || masked[j] == '$')) {
        ++j;
      }
      tokens.push_back({masked.substr(i, j - i), i, line});
      i = j;
    } else if (masked.compare(i, 2, "->") == 0) {
      tokens.push_back({"->", i, line});
      i += 2;
    } else {
      tokens.push_back({std::string(1, c), i, line});
      ++i;
    }
  }
  return tokens;
}

const std::unordered_set<std::string> kNotMethodNames = {
    "if",     "for",  "while", "switch", "catch", "synchronized", "return", "new", "else",
    "do",     "try",  "super", "this",   "throw", "assert",       "case",   "finally"};

bool is_identifier(const std::string& t) {
  return !t.empty() && (std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_' || t[0] == '$');
}

int count_params(const std::vector<JavaToken>& tokens, std::size_t open, std::size_t close) {
  if (close == open + 1) return 0;
  int depth = 0;
  int count = 1;
  for (std::size_t k = open + 1; k < close; ++k) {
    const auto& t = tokens[k].text;
    if (t == "(" || t == "<" || t == "[") ++depth;
    if (t == ")" || t == ">" || t == "]") --depth;
    if (t == "," && depth == 0) ++count;
  }
  return count;
}

ExtractionResult extract_java(std::string_view file_text) {
  ExtractionResult result;
  const auto lines = source_lines(file_text);
  const std::string masked = mask_java(file_text);
  const auto tokens = tokenize_masked(masked);

  for (std::size_t k = 0; k < tokens.size(); ++k) {
    if (tokens[k].text != "{" || k == 0) continue;
    // Skip an optional throws clause.
    std::size_t j = k - 1;
    if (tokens[j].text != ")") {
      std::size_t t = j;
      while (t > 0 && (is_identifier(tokens[t].text) || tokens[t].text == "." || tokens[t].text == ",") &&
             tokens[t].text != "throws") {
        --t;
      }
      if (tokens[t].text != "throws" || t == 0) continue;
      j = t - 1;
      if (tokens[j].text != ")") continue;
    }
    const std::size_t close_paren = j;
    int depth = 0;
    std::size_t open_paren = close_paren;
    bool found = false;
    for (std::size_t t = close_paren + 1; t-- > 0;) {
      if (tokens[t].text == ")") ++depth;
      if (tokens[t].text == "(" && --depth == 0) {
        open_paren = t;
        found = true;
        break;
      }
    }
    if (!found || open_paren == 0) continue;
    const std::size_t name_idx = open_paren - 1;
    const auto& name = tokens[name_idx].text;
    if (!is_identifier(name) || kNotMethodNames.contains(name)) continue;
    std::size_t start_idx = name_idx;
    if (name_idx > 0) {
      const auto& prev = tokens[name_idx - 1].text;
      if (prev == "new" || prev == "." || prev == "=" || prev == "(" || prev == "," || prev == "return" ||
          prev == "->" || prev == "?" || prev == ":") {
        continue;
      }
      while (start_idx > 0) {
        const auto& p = tokens[start_idx - 1].text;
        if (p == ";" || p == "{" || p == "}") break;
        --start_idx;
      }
    }
    // Matching close brace.
    int braces = 0;
    std::size_t end_idx = tokens.size();
    for (std::size_t t = k; t < tokens.size(); ++t) {
      if (tokens[t].text == "{") ++braces;
      if (tokens[t].text == "}" && --braces == 0) {
        end_idx = t;
        break;
      }
    }
    if (end_idx == tokens.size()) {
      result.warnings.push_back("unbalanced braces in '" + name + "' starting at line " +
                                std::to_string(tokens[name_idx].line + 1));
      continue;
    }
    FunctionSpan span;
    span.name = name;
    span.param_count = count_params(tokens, open_paren, close_paren);
    span.start_line = tokens[start_idx].line;
    span.end_line = tokens[end_idx].line;
    span.body_lines.assign(lines.begin() + static_cast<std::ptrdiff_t>(span.start_line),
                           lines.begin() + static_cast<std::ptrdiff_t>(std::min(span.end_line + 1, lines.size())));
    span.signature = text::normalize_whitespace(
        std::string_view(file_text).substr(tokens[start_idx].offset, tokens[k].offset - tokens[start_idx].offset));
    result.functions.push_back(std::move(span));
  }
  return result;
}

// -------------------------------------------------------------- Python ----

std::size_t indent_width(const std::string& line) {
  std::size_t width = 0;
  for (char c : line) {
    if (c == ' ') {
      ++width;
    } else if (c == '\t') {
      width = (width / 8 + 1) * 8;
    } else {
      break;
    }
  }
  return width;
}

std::string indent_chars(const std::string& line) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return line.substr(0, i);
}

bool is_blank_or_comment(const std::string& line) {
  const auto t = text::trim(line);
  return t.empty() || t.front() == '#';
}

// For each line, whether it begins inside a triple-quoted string.
std::vector<bool> lines_inside_strings(const std::vector<std::string>& lines) {
  std::vector<bool> inside(lines.size(), false);
  std::string open;  // active triple quote, empty if none
  for (std::size_t l = 0; l < lines.size(); ++l) {
    inside[l] = !open.empty();
    const auto& s = lines[l];
    std::size_t i = 0;
    while (i < s.size()) {
      if (!open.empty()) {
        const auto end = s.find(open, i);
        if (end == std::string::npos) {
          i = s.size();
        } else {
          i = end + 3;
          open.clear();
        }
        continue;
      }
      const char c = s[i];
      if (c == '#') break;
      if (c == '"' || c == '\'') {
        if (s.compare(i, 3, std::string(3, c)) == 0) {
          open = std::string(3, c);
          i += 3;
          continue;
        }
        std::size_t j = i + 1;
        while (j < s.size() && s[j] != c) j += s[j] == '\\' ? 2 : 1;
        i = j + 1;
        continue;
      }
      ++i;
    }
  }
  return inside;
}

ExtractionResult extract_python(std::string_view file_text) {
  ExtractionResult result;
  const auto lines = source_lines(file_text);
  const auto in_string = lines_inside_strings(lines);

  for (std::size_t l = 0; l < lines.size(); ++l) {
    if (in_string[l]) continue;
    const auto& line = lines[l];
    const auto stripped = std::string(text::trim(line));
    std::string_view rest = stripped;
    if (rest.starts_with("async ")) rest = text::trim(rest.substr(6));
    if (!rest.starts_with("def ")) continue;
    rest = text::trim(rest.substr(4));
    std::size_t n = 0;
    while (n < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[n])) || rest[n] == '_')) ++n;
    const std::string name(rest.substr(0, n));
    if (name.empty()) continue;

    // Collect the header until the parameter list closes and ':' follows.
    std::string header;
    std::size_t header_end = l;
    std::size_t colon_pos = std::string::npos;
    int depth = 0;
    bool opened = false;
    for (std::size_t h = l; h < lines.size() && colon_pos == std::string::npos; ++h) {
      const std::string& hl = lines[h];
      const std::size_t from = h == l ? hl.find("def ") : 0;
      for (std::size_t i = from; i < hl.size(); ++i) {
        const char c = hl[i];
        if (c == '#' && depth == 0) break;
        if (c == '(' || c == '[' || c == '{') {
          opened = opened || c == '(';
          ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
          --depth;
        } else if (c == ':' && opened && depth == 0) {
          colon_pos = i;
          header_end = h;
          break;
        }
      }
      header += hl.substr(from, colon_pos == std::string::npos ? std::string::npos : colon_pos - from + 1);
      header += ' ';
    }
    if (colon_pos == std::string::npos) {
      result.warnings.push_back("unterminated def header '" + name + "' at line " + std::to_string(l + 1));
      continue;
    }
    int param_count = 0;
    {
      const auto open = header.find('(');
      int d = 0;
      bool any = false;
      for (std::size_t i = open + 1; i < header.size(); ++i) {
        const char c = header[i];
        if (c == '(' || c == '[' || c == '{') ++d;
        if (c == ')' || c == ']' || c == '}') {
          if (d-- == 0) break;
        }
        if (c == ',' && d == 0) {
          if (any) ++param_count;
          any = false;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
          any = true;
        }
      }
      if (any) ++param_count;
    }

    const std::size_t def_indent = indent_width(line);
    const bool inline_body = !is_blank_or_comment(lines[header_end].substr(colon_pos + 1));
    std::size_t end = header_end;
    std::string body_indent;
    bool inconsistent = false;
    for (std::size_t b = header_end + 1; b < lines.size(); ++b) {
      if (in_string[b]) {
        end = b;
        continue;
      }
      if (is_blank_or_comment(lines[b])) continue;
      if (indent_width(lines[b]) <= def_indent) break;
      const auto chars = indent_chars(lines[b]);
      if (body_indent.empty()) {
        body_indent = chars;
      } else if (chars.compare(0, std::min(chars.size(), body_indent.size()), body_indent, 0,
                               std::min(chars.size(), body_indent.size())) != 0) {
        inconsistent = true;
      }
      end = b;
    }
    if (inconsistent) {
      result.warnings.push_back("inconsistent indentation in '" + name + "' at line " + std::to_string(l + 1));
      continue;
    }
    if (end == header_end && !inline_body) {
      result.warnings.push_back("def '" + name + "' at line " + std::to_string(l + 1) + " has no indented body");
      continue;
    }
    FunctionSpan span;
    span.name = name;
    span.param_count = param_count;
    span.start_line = l;
    span.end_line = end;
    span.body_lines.assign(lines.begin() + static_cast<std::ptrdiff_t>(l),
                           lines.begin() + static_cast<std::ptrdiff_t>(end) + 1);
    span.signature = text::normalize_whitespace(header);
    result.functions.push_back(std::move(span));
  }
  return result;
}

}  // namespace

ExtractionResult extract_functions(std::string_view file_text, Language lang) {
  return lang == Language::Java ? extract_java(file_text) : extract_python(file_text);
}

}  // namespace dlr::miner
