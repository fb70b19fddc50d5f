#include "dlr/miner/pattern_classifier.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace dlr::miner {

namespace {

using Tokens = std::vector<std::string>;

struct Line {
  std::vector<CodeToken> tokens;
  Tokens text;

  std::size_t size() const { return tokens.size(); }
  const std::string& at(std::size_t i) const { return text[i]; }
};

Line make_line(std::vector<CodeToken> tokens) {
  Line line;
  for (const auto& t : tokens) line.text.push_back(t.text);
  line.tokens = std::move(tokens);
  return line;
}

bool is_operand_end(const CodeToken& t) {
  switch (t.kind) {
    case TokenKind::Identifier:
    case TokenKind::Number:
    case TokenKind::String:
    case TokenKind::Boolean:
    case TokenKind::Null:
      return true;
    case TokenKind::Keyword:
      return t.text == "this" || t.text == "super";
    case TokenKind::Punctuation:
      return t.text == ")" || t.text == "]";
    default:
      return false;
  }
}

// A binary operator in operator position, i.e. preceded by an operand.
bool is_binary_operator_at(const Line& line, std::size_t i) {
  if (i >= line.size() || i == 0) return false;
  const auto& t = line.tokens[i];
  if (t.kind != TokenKind::Operator || !is_binary_operator_text(t.text)) return false;
  return is_operand_end(line.tokens[i - 1]);
}

std::vector<std::size_t> differing_positions(const Line& a, const Line& b) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.at(i) != b.at(i)) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> single_difference(const Line& a, const Line& b) {
  if (a.size() != b.size()) return std::nullopt;
  const auto diff = differing_positions(a, b);
  if (diff.size() != 1) return std::nullopt;
  return diff.front();
}

bool is_unary_not(const std::string& t) { return t == "!" || t == "not"; }

// Longer equals shorter with exactly one `!`/`not` inserted.
bool differs_by_unary_not(const Line& longer, const Line& shorter) {
  if (longer.size() != shorter.size() + 1) return false;
  std::size_t i = 0;
  while (i < shorter.size() && longer.at(i) == shorter.at(i)) ++i;
  if (!is_unary_not(longer.at(i))) return false;
  return std::equal(longer.text.begin() + static_cast<std::ptrdiff_t>(i) + 1, longer.text.end(),
                    shorter.text.begin() + static_cast<std::ptrdiff_t>(i));
}

struct Call {
  std::size_t callee = 0;
  std::size_t close = 0;  // index of ')' or size() if the line ends first
  std::vector<Tokens> args;
};

// Parses the argument list of the call whose callee sits at `callee`. A call
// left open at end of line is treated as closed there.
Call parse_call(const Line& line, std::size_t callee) {
  Call call;
  call.callee = callee;
  int depth = 0;
  Tokens current;
  std::size_t i = callee + 1;
  for (; i < line.size(); ++i) {
    const auto& t = line.at(i);
    if (t == "(" || t == "[" || t == "{") {
      if (depth++ == 0) continue;
    } else if (t == ")" || t == "]" || t == "}") {
      if (--depth == 0) break;
    } else if (t == "," && depth == 1) {
      call.args.push_back(std::move(current));
      current.clear();
      continue;
    }
    current.push_back(t);
  }
  call.close = i;
  if (!current.empty() || !call.args.empty()) call.args.push_back(std::move(current));
  return call;
}

bool suffix_equal(const Line& a, std::size_t from_a, const Line& b, std::size_t from_b) {
  const auto rest_a = from_a < a.size() ? a.size() - from_a : 0;
  const auto rest_b = from_b < b.size() ? b.size() - from_b : 0;
  if (rest_a != rest_b) return false;
  for (std::size_t k = 0; k < rest_a; ++k) {
    if (a.at(from_a + k) != b.at(from_b + k)) return false;
  }
  return true;
}

// Calls present at the same position in both lines with an identical prefix
// up to and including the opening parenthesis and identical trailing tokens.
template <class Pred>
bool any_matching_call(const Line& before, const Line& after, Pred&& pred) {
  for (std::size_t p = 0; p + 1 < before.size(); ++p) {
    if (before.tokens[p].kind != TokenKind::Identifier || before.at(p + 1) != "(") continue;
    if (p + 1 >= after.size()) break;
    if (!std::equal(before.text.begin(), before.text.begin() + static_cast<std::ptrdiff_t>(p) + 2,
                    after.text.begin())) {
      continue;
    }
    const Call cb = parse_call(before, p);
    const Call ca = parse_call(after, p);
    if (!suffix_equal(before, cb.close + 1, after, ca.close + 1)) continue;
    if (pred(cb.args, ca.args)) return true;
  }
  return false;
}

bool is_swap(const std::vector<Tokens>& before, const std::vector<Tokens>& after) {
  if (before.size() != after.size() || before.size() < 2) return false;
  std::vector<std::size_t> diff;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (before[i] != after[i]) diff.push_back(i);
  }
  return diff.size() == 2 && before[diff[0]] == after[diff[1]] && before[diff[1]] == after[diff[0]];
}

bool is_proper_subsequence(const std::vector<Tokens>& shorter, const std::vector<Tokens>& longer) {
  if (shorter.size() >= longer.size()) return false;
  std::size_t j = 0;
  for (const auto& arg : longer) {
    if (j < shorter.size() && shorter[j] == arg) ++j;
  }
  return j == shorter.size();
}

struct Condition {
  Tokens prefix;
  Tokens cond;
  Tokens suffix;
};

std::size_t matching_paren(const Tokens& t, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < t.size(); ++i) {
    if (t[i] == "(") ++depth;
    if (t[i] == ")" && --depth == 0) return i;
  }
  return t.size();
}

// Splits a line into the boolean condition it tests and the surrounding
// tokens. Lines without an if/while/return head are taken whole.
Condition extract_condition(const Tokens& t) {
  Condition c;
  std::size_t head = 0;
  if (!t.empty() && (t[0] == "if" || t[0] == "while" || t[0] == "elif")) {
    head = 1;
  } else if (t.size() > 1 && t[0] == "else" && t[1] == "if") {
    head = 2;
  } else if (!t.empty() && t[0] == "return") {
    head = 1;
  }
  std::size_t begin = head;
  std::size_t end = t.size();
  if (head > 0 && t[0] != "return" && head < t.size() && t[head] == "(") {
    const auto close = matching_paren(t, head);
    begin = head + 1;
    end = std::min(close, t.size());
  } else {
    while (end > begin && (t[end - 1] == ";" || t[end - 1] == "{" || t[end - 1] == ":")) --end;
  }
  c.prefix.assign(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(begin));
  c.cond.assign(t.begin() + static_cast<std::ptrdiff_t>(begin), t.begin() + static_cast<std::ptrdiff_t>(end));
  c.suffix.assign(t.begin() + static_cast<std::ptrdiff_t>(end), t.end());
  return c;
}

Tokens strip_outer_parens(Tokens clause) {
  while (clause.size() >= 2 && clause.front() == "(" && matching_paren(clause, 0) == clause.size() - 1) {
    clause = Tokens(clause.begin() + 1, clause.end() - 1);
  }
  return clause;
}

bool has_top_level(const Tokens& t, std::string_view a, std::string_view b) {
  int depth = 0;
  for (const auto& tok : t) {
    if (tok == "(" || tok == "[") ++depth;
    if (tok == ")" || tok == "]") --depth;
    if (depth == 0 && (tok == a || tok == b)) return true;
  }
  return false;
}

std::vector<Tokens> split_top_level(const Tokens& t, std::string_view a, std::string_view b) {
  std::vector<Tokens> clauses(1);
  int depth = 0;
  for (const auto& tok : t) {
    if (tok == "(" || tok == "[") ++depth;
    if (tok == ")" || tok == "]") --depth;
    if (depth == 0 && (tok == a || tok == b)) {
      clauses.emplace_back();
      continue;
    }
    clauses.back().push_back(tok);
  }
  for (auto& c : clauses) c = strip_outer_parens(std::move(c));
  return clauses;
}

// After equals before joined with exactly one extra clause via the given
// connective. For conjunctions, a condition containing a top-level
// disjunction is one opaque clause.
bool adds_one_clause(const Tokens& before_line, const Tokens& after_line, bool conjunction) {
  const Condition before = extract_condition(before_line);
  const Condition after = extract_condition(after_line);
  if (before.prefix != after.prefix || before.suffix != after.suffix) return false;
  if (before.cond.empty() || after.cond.empty()) return false;
  const auto clauses = [conjunction](const Tokens& cond) {
    if (conjunction) {
      if (has_top_level(cond, "||", "or")) return std::vector<Tokens>{strip_outer_parens(cond)};
      return split_top_level(cond, "&&", "and");
    }
    return split_top_level(cond, "||", "or");
  };
  auto b = clauses(before.cond);
  auto a = clauses(after.cond);
  if (a.size() != b.size() + 1) return false;
  for (const auto& clause : a) {
    if (clause.empty()) return false;
  }
  for (const auto& clause : b) {
    const auto it = std::find(a.begin(), a.end(), clause);
    if (it == a.end()) return false;
    a.erase(it);
  }
  return a.size() == 1;
}

BugPattern classify_identifier_change(const Line& before, const Line& after, std::size_t i) {
  if (before.tokens[i].kind != TokenKind::Identifier || after.tokens[i].kind != TokenKind::Identifier) {
    return BugPattern::Unknown;
  }
  const std::size_t n = before.size();
  if (i + 3 < n && before.at(i + 1) == "." && before.tokens[i + 2].kind == TokenKind::Identifier &&
      before.at(i + 3) == "(") {
    return BugPattern::ChangeCallerInFunction;
  }
  if (i + 1 < n && before.at(i + 1) == "(") return BugPattern::DifferentMethodSameArgs;
  const bool operator_before = i > 0 && is_binary_operator_at(before, i - 1);
  const bool operator_after = i + 1 < n && is_binary_operator_at(before, i + 1);
  if (operator_before || operator_after) return BugPattern::ChangeOperand;
  return BugPattern::ChangeIdentifier;
}

}  // namespace

BugPattern classify_pattern(std::string_view before_line, std::string_view after_line, Language lang) {
  auto lexed_before = lex_line(before_line, lang);
  auto lexed_after = lex_line(after_line, lang);
  if (!lexed_before || !lexed_after) return BugPattern::Unknown;
  const Line before = make_line(std::move(*lexed_before));
  const Line after = make_line(std::move(*lexed_after));
  if (before.text == after.text || before.size() == 0 || after.size() == 0) return BugPattern::Unknown;

  const auto single = single_difference(before, after);

  if (single) {
    const auto& b = before.tokens[*single];
    const auto& a = after.tokens[*single];
    if (b.kind == TokenKind::Boolean && a.kind == TokenKind::Boolean) return BugPattern::SwapBooleanLiteral;
  }
  if (differs_by_unary_not(before, after) || differs_by_unary_not(after, before)) {
    return BugPattern::ChangeUnaryOperator;
  }
  if (single && is_binary_operator_at(before, *single) && is_binary_operator_at(after, *single)) {
    return BugPattern::ChangeOperator;
  }
  if (single && before.tokens[*single].kind == TokenKind::Number &&
      after.tokens[*single].kind == TokenKind::Number) {
    return BugPattern::ChangeNumeral;
  }
  if (any_matching_call(before, after, is_swap)) return BugPattern::SwapArguments;
  if (adds_one_clause(before.text, after.text, true)) return BugPattern::MoreSpecificIf;
  if (adds_one_clause(before.text, after.text, false)) return BugPattern::LessSpecificIf;
  if (any_matching_call(before, after, [](const auto& b, const auto& a) { return is_proper_subsequence(b, a); })) {
    return BugPattern::OverloadMethodMoreArgs;
  }
  if (any_matching_call(before, after, [](const auto& b, const auto& a) { return is_proper_subsequence(a, b); })) {
    return BugPattern::OverloadMethodDeletedArgs;
  }
  if (single) return classify_identifier_change(before, after, *single);
  return BugPattern::Unknown;
}

}  // namespace dlr::miner
