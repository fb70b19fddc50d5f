#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <sstream>

#include "dlr/common/error.hpp"
#include "dlr/common/random.hpp"
#include "dlr/common/text.hpp"
#include "dlr/miner/code_lexer.hpp"
#include "dlr/miner/commit.hpp"
#include "dlr/miner/functions.hpp"
#include "dlr/miner/keywords.hpp"
#include "dlr/miner/line_diff.hpp"
#include "dlr/miner/pairing.hpp"
#include "dlr/miner/pattern_classifier.hpp"
#include "dlr/miner/sample_builder.hpp"
#include "dlr/train/synthetic.hpp"

namespace dlr::miner {
namespace {

// ---- keywords ----

TEST(Keywords, WordPrefixMatching) {
  EXPECT_TRUE(is_bugfix_commit("Fix NPE in parser"));
  EXPECT_TRUE(is_bugfix_commit("fixes #12"));
  EXPECT_TRUE(is_bugfix_commit("Fixed wrong index"));
  EXPECT_TRUE(is_bugfix_commit("Minor fix in polyglot native API"));
  EXPECT_TRUE(is_bugfix_commit("handle error when empty"));
  EXPECT_TRUE(is_bugfix_commit("Wrong type in cast"));
  EXPECT_FALSE(is_bugfix_commit("typo"));
  EXPECT_FALSE(is_bugfix_commit("Add suffix handling"));
  EXPECT_FALSE(is_bugfix_commit("Refactor build scripts"));
  EXPECT_FALSE(is_bugfix_commit(""));
}

TEST(Keywords, CaseInvariant) {
  Rng rng(4);
  const std::vector<std::string> messages{"Fix bug", "refactor", "Incorrect result", "prefix tree", "DEFECT 7",
                                          "update docs", "issue-42 resolved", "suffix"};
  for (const auto& m : messages) {
    for (int trial = 0; trial < 20; ++trial) {
      std::string flipped = m;
      for (char& c : flipped) {
        if (rng.below(2)) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        else c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
      EXPECT_EQ(is_bugfix_commit(flipped), is_bugfix_commit(m)) << flipped;
    }
  }
}

// ---- function extraction ----

TEST(Functions, JavaMethodsAndConstructors) {
  const std::string src = R"(package a;

public class Box {
    private int size;

    public Box(int size) {
        this.size = size;
    }

    // a comment with a brace {
    public int grow(int by, String why) {
        String s = "}";
        if (by > 0) {
            size += by;
        }
        return size;
    }

    static <T> List<T> wrap(T item) { return List.of(item); }
}
)";
  const auto r = extract_functions(src, Language::Java);
  ASSERT_EQ(r.functions.size(), 3u);
  EXPECT_EQ(r.functions[0].name, "Box");
  EXPECT_EQ(r.functions[0].param_count, 1);
  EXPECT_EQ(r.functions[0].start_line, 5u);
  EXPECT_EQ(r.functions[0].end_line, 7u);
  EXPECT_EQ(r.functions[1].name, "grow");
  EXPECT_EQ(r.functions[1].param_count, 2);
  EXPECT_EQ(r.functions[1].start_line, 10u);
  EXPECT_EQ(r.functions[1].end_line, 16u);
  EXPECT_EQ(r.functions[1].body_lines.size(), 7u);
  EXPECT_EQ(r.functions[2].name, "wrap");
  EXPECT_EQ(r.functions[2].start_line, r.functions[2].end_line);
}

TEST(Functions, JavaControlFlowIsNotAMethod) {
  const std::string src = "class A {\n  void f() {\n    while (x) {\n      g();\n    }\n    if (y) { h(); }\n  }\n}\n";
  const auto r = extract_functions(src, Language::Java);
  ASSERT_EQ(r.functions.size(), 1u);
  EXPECT_EQ(r.functions[0].name, "f");
  EXPECT_EQ(r.functions[0].param_count, 0);
}

TEST(Functions, JavaUnbalancedRegionWarnsAndContinues) {
  const std::string src = "class A {\n  void ok() {\n    a();\n  }\n  void broken() {\n    b();\n";
  const auto r = extract_functions(src, Language::Java);
  EXPECT_FALSE(r.warnings.empty());
  ASSERT_GE(r.functions.size(), 1u);
  EXPECT_EQ(r.functions[0].name, "ok");
}

TEST(Functions, PythonDefsByIndentation) {
  const std::string src = R"(import os

def top(a, b=2, *args, **kw):
    x = a + b

    return x

class C:
    def method(self):
        def inner():
            return 1
        return inner()

y = top(1)
)";
  const auto r = extract_functions(src, Language::Python);
  ASSERT_EQ(r.functions.size(), 3u);
  EXPECT_EQ(r.functions[0].name, "top");
  EXPECT_EQ(r.functions[0].param_count, 4);
  EXPECT_EQ(r.functions[0].start_line, 2u);
  EXPECT_EQ(r.functions[0].end_line, 5u);
  EXPECT_EQ(r.functions[1].name, "method");
  EXPECT_EQ(r.functions[1].end_line, 11u);
  EXPECT_EQ(r.functions[2].name, "inner");
  EXPECT_EQ(r.functions[2].start_line, 9u);
  EXPECT_EQ(r.functions[2].end_line, 10u);
}

// ---- pairing ----

FunctionSpan span(std::string name, int arity) {
  FunctionSpan f;
  f.name = std::move(name);
  f.param_count = arity;
  f.body_lines = {"x"};
  return f;
}

TEST(Pairing, MatchesByNameAndArity) {
  const std::vector<FunctionSpan> before{span("f", 1), span("g", 2)};
  const std::vector<FunctionSpan> after{span("g", 2), span("f", 1)};
  const auto r = pair_functions(before, after);
  ASSERT_EQ(r.pairs.size(), 2u);
  EXPECT_EQ(r.pairs[0].first.name, "f");
  EXPECT_EQ(r.pairs[0].second.name, "f");
  EXPECT_EQ(r.ambiguous, 0u);
}

TEST(Pairing, RenamedFunctionIsUnmatched) {
  const std::vector<FunctionSpan> before{span("f", 1)};
  const std::vector<FunctionSpan> after{span("h", 1)};
  const auto r = pair_functions(before, after);
  EXPECT_TRUE(r.pairs.empty());
  EXPECT_GE(r.unmatched, 1u);
}

TEST(Pairing, DuplicateKeysAreDropped) {
  const std::vector<FunctionSpan> before{span("f", 1), span("f", 1), span("g", 0)};
  const std::vector<FunctionSpan> after{span("f", 1), span("g", 0)};
  const auto r = pair_functions(before, after);
  ASSERT_EQ(r.pairs.size(), 1u);
  EXPECT_EQ(r.pairs[0].first.name, "g");
  EXPECT_EQ(r.ambiguous, 1u);
}

// ---- line diff ----

// Exhaustive oracle: the smallest number of changed lines over every
// alignment equals |a| + |b| - 2 * LCS, computed by brute force over
// subsequences of a.
std::size_t brute_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (unsigned mask = 0; mask < (1u << a.size()); ++mask) {
    std::vector<std::string> sub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(a[i]);
    }
    std::size_t j = 0;
    for (const auto& line : b) {
      if (j < sub.size() && sub[j] == line) ++j;
    }
    if (j == sub.size()) best = std::max(best, sub.size());
  }
  return best;
}

void for_each_list(std::size_t max_len, const std::function<void(const std::vector<std::string>&)>& f) {
  std::vector<std::string> cur;
  std::function<void()> rec = [&] {
    f(cur);
    if (cur.size() == max_len) return;
    for (const char* s : {"a", "b", "c"}) {
      cur.emplace_back(s);
      rec();
      cur.pop_back();
    }
  };
  rec();
}

bool strictly_increasing(const std::vector<std::size_t>& v, std::size_t bound) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] >= bound || (i > 0 && v[i] <= v[i - 1])) return false;
  }
  return true;
}

TEST(LineDiff, AgreesWithBruteForceLcs) {
  std::size_t checked = 0;
  for_each_list(6, [&](const std::vector<std::string>& a) {
    for_each_list(6, [&](const std::vector<std::string>& b) {
      const auto d = diff_lines(a, b);
      const std::size_t lcs = brute_lcs(a, b);
      ASSERT_EQ(a.size() - d.changed_before.size(), lcs);
      ASSERT_EQ(b.size() - d.changed_after.size(), lcs);
      ASSERT_TRUE(strictly_increasing(d.changed_before, a.size()));
      ASSERT_TRUE(strictly_increasing(d.changed_after, b.size()));
      // The kept lines must themselves form a common subsequence.
      std::vector<std::string> ka, kb;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (!std::binary_search(d.changed_before.begin(), d.changed_before.end(), i)) ka.push_back(a[i]);
      }
      for (std::size_t i = 0; i < b.size(); ++i) {
        if (!std::binary_search(d.changed_after.begin(), d.changed_after.end(), i)) kb.push_back(b[i]);
      }
      ASSERT_EQ(ka, kb);
      ++checked;
    });
  });
  EXPECT_EQ(checked, 1093u * 1093u);
}

TEST(LineDiff, WhitespaceIsNormalized) {
  const std::vector<std::string> a{"int x = 1;", "return x;"};
  const std::vector<std::string> b{"int  x =  1;", "  return x;"};
  EXPECT_TRUE(diff_lines(a, b).empty());
}

TEST(LineDiff, SingleReplacementAndInsertion) {
  const std::vector<std::string> a{"a", "b", "c", "d", "e"};
  std::vector<std::string> b = a;
  b[4] = "E";
  const auto d = diff_lines(a, b);
  EXPECT_EQ(d.changed_before, std::vector<std::size_t>{4});
  EXPECT_EQ(d.changed_after, std::vector<std::size_t>{4});
  std::vector<std::string> c = a;
  c.insert(c.begin() + 2, "new");
  const auto ins = diff_lines(a, c);
  EXPECT_TRUE(ins.changed_before.empty());
  EXPECT_EQ(ins.changed_after, std::vector<std::size_t>{2});
}

// ---- pattern classification ----

struct PatternCase {
  const char* before;
  const char* after;
  BugPattern expected;
};

// One row per pattern, P0..P12, exactly as catalogued for the taxonomy.
const PatternCase kTaxonomyRows[] = {
    {"logLevel>=Log.ASSERT", "logLevel<=Log.ASSERT", BugPattern::ChangeOperator},
    {"x<=1", "z<=1", BugPattern::ChangeOperand},
    {"this.userDn", "this.userName", BugPattern::ChangeIdentifier},
    {"player.stepHeight=0.5F", "player.stepHeight=0.6F", BugPattern::ChangeNumeral},
    {"mBlockStream.remaining()", "inStream.remaining()", BugPattern::ChangeCallerInFunction},
    {"!segment.isOk()", "segment.isOk()", BugPattern::ChangeUnaryOperator},
    {"Messaging.sendTr(sender,key)", "Messaging.sendTr(sender,key,npc.getName())",
     BugPattern::OverloadMethodMoreArgs},
    {"registerCommandsNow(commands)", "registerCommandsNow()", BugPattern::OverloadMethodDeletedArgs},
    {"server.getStartedLabel()", "server.getStartedName()", BugPattern::DifferentMethodSameArgs},
    {"getIndex()>=arrayLength", "arrayLength>0 && getIndex()>=arrayLength", BugPattern::MoreSpecificIf},
    {"pluginId==null", "pluginId==null || pluginID.length()==0", BugPattern::LessSpecificIf},
    {"new Duration(DateTime.now(),time)", "new Duration(time, DateTime.now()", BugPattern::SwapArguments},
    {"doTest(false)", "doTest(true)", BugPattern::SwapBooleanLiteral},
};

TEST(PatternClassifier, ReproducesEveryTaxonomyExample) {
  int i = 0;
  for (const auto& c : kTaxonomyRows) {
    EXPECT_EQ(classify_pattern(c.before, c.after), c.expected)
        << "P" << i << ": " << c.before << " -> " << c.after << " gave "
        << pattern_name(classify_pattern(c.before, c.after));
    EXPECT_EQ(pattern_index(c.expected), "P" + std::to_string(i));
    ++i;
  }
}

TEST(PatternClassifier, StatementContextDoesNotMatter) {
  EXPECT_EQ(classify_pattern("if (logLevel >= Log.ASSERT) {", "if (logLevel <= Log.ASSERT) {"),
            BugPattern::ChangeOperator);
  EXPECT_EQ(classify_pattern("    doTest(false);", "    doTest(true);"), BugPattern::SwapBooleanLiteral);
  EXPECT_EQ(classify_pattern("if (pluginId == null) {", "if (pluginId == null || pluginId.length() == 0) {"),
            BugPattern::LessSpecificIf);
}

TEST(PatternClassifier, PythonKeywordsForms) {
  EXPECT_EQ(classify_pattern("if not ok:", "if ok:", Language::Python), BugPattern::ChangeUnaryOperator);
  EXPECT_EQ(classify_pattern("if a:", "if a and b:", Language::Python), BugPattern::MoreSpecificIf);
  EXPECT_EQ(classify_pattern("if a:", "if a or b:", Language::Python), BugPattern::LessSpecificIf);
  EXPECT_EQ(classify_pattern("run(True)", "run(False)", Language::Python), BugPattern::SwapBooleanLiteral);
}

TEST(PatternClassifier, UnmatchedOrUnlexableIsUnknown) {
  EXPECT_EQ(classify_pattern("a = b + c;", "return foo(bar, baz);"), BugPattern::Unknown);
  EXPECT_EQ(classify_pattern("s = \"unterminated", "s = \"x\";"), BugPattern::Unknown);
  EXPECT_EQ(classify_pattern("x = 1;", "x = 1;"), BugPattern::Unknown);
}

TEST(PatternClassifier, TotalAndDeterministicOnRandomInput) {
  Rng rng(21);
  const std::vector<std::string> pieces{"a", "b", ".", "(", ")", ",", "!", "&&", "||", "==", "<", "1", "2.5F",
                                        "true", "false", "null", "\"", " ", "foo", "[", "]", "=", "+", "@", "#"};
  for (int trial = 0; trial < 3000; ++trial) {
    std::string x, y;
    for (auto n = rng.below(10); n > 0; --n) x += rng.pick(pieces);
    for (auto n = rng.below(10); n > 0; --n) y += rng.pick(pieces);
    BugPattern first{};
    ASSERT_NO_THROW(first = classify_pattern(x, y));
    EXPECT_EQ(classify_pattern(x, y), first);
  }
}

// ---- sample construction ----

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (auto pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
  return s;
}

CommitRecord java_commit(std::string id, std::string message, std::string before, std::string after) {
  CommitRecord c;
  c.commit_id = std::move(id);
  c.message = std::move(message);
  c.project = "demo";
  c.files.push_back({"src/A.java", std::move(before), std::move(after)});
  return c;
}

const char* kBefore = R"(class A {
    int f(int x) {
        int y = x + 1;
        return y;
    }
    int g() {
        return 0;
    }
}
)";

TEST(SampleBuilder, SingleLineFixGivesBuggyAndCleanPair) {
  const std::string after = replace_all(kBefore, "x + 1", "x - 1");
  const auto r = build_samples(std::vector<CommitRecord>{java_commit("c1", "Fix f", kBefore, after)});
  ASSERT_EQ(r.samples.size(), 2u);
  const auto& buggy = r.samples[0];
  const auto& clean = r.samples[1];
  EXPECT_TRUE(buggy.function_label);
  EXPECT_EQ(buggy.line_labels, (std::vector<std::uint8_t>{0, 1, 0, 0}));
  EXPECT_EQ(buggy.pattern, BugPattern::ChangeOperator);
  EXPECT_EQ(buggy.after_lines, clean.before_lines);
  EXPECT_FALSE(clean.function_label);
  EXPECT_EQ(clean.pattern, BugPattern::Unknown);
  EXPECT_EQ(buggy.meta.commit_id, "c1");
  EXPECT_EQ(buggy.meta.project, "demo");
  EXPECT_EQ(r.stats.samples_emitted, 2u);
  EXPECT_EQ(r.stats.patterns.at("CHANGE_OPERATOR"), 1u);
  EXPECT_EQ(buggy.before_lines[0], "int f(int x) {");  // dedented
}

TEST(SampleBuilder, NonFixCommitIsIgnored) {
  const std::string after = replace_all(kBefore, "x + 1", "x - 1");
  const auto r = build_samples(std::vector<CommitRecord>{java_commit("c1", "Refactor f", kBefore, after)});
  EXPECT_TRUE(r.samples.empty());
  EXPECT_EQ(r.stats.commits_scanned, 1u);
  EXPECT_EQ(r.stats.bugfix_commits, 0u);
}

TEST(SampleBuilder, MultiLineChangeIsUnknownPattern) {
  std::string after = replace_all(kBefore, "x + 1", "x - 2");
  after = replace_all(after, "return y;", "return y * 2;");
  after = replace_all(after, "int f(int x) {", "int f(int x) {  ");
  const std::string before = replace_all(kBefore, "return y;", "return y;\n        // done");
  const auto r = build_samples(std::vector<CommitRecord>{java_commit("c1", "fix", before, after)});
  ASSERT_EQ(r.samples.size(), 2u);
  const auto& buggy = r.samples[0];
  EXPECT_EQ(std::count(buggy.line_labels.begin(), buggy.line_labels.end(), 1), 3);
  EXPECT_EQ(buggy.pattern, BugPattern::Unknown);
}

TEST(SampleBuilder, OutputOrderIsIndependentOfInputOrder) {
  const std::string after = replace_all(kBefore, "x + 1", "x - 1");
  const std::string after_g = replace_all(kBefore, "return 0;", "return 1;");
  std::vector<CommitRecord> commits{java_commit("b", "fix", kBefore, after), java_commit("a", "fix", kBefore, after_g)};
  const auto x = build_samples(commits);
  std::reverse(commits.begin(), commits.end());
  const auto y = build_samples(commits);
  EXPECT_EQ(x.samples, y.samples);
  ASSERT_EQ(x.samples.size(), 4u);
  EXPECT_EQ(x.samples[0].meta.commit_id, "a");
}

TEST(SampleBuilder, LabelInvariantsHoldOnSyntheticCommits) {
  const auto commits = train::synthetic_commits(60, 3, {.num_projects = 5, .noise_commits = 20});
  const auto r = build_samples(commits);
  EXPECT_EQ(r.samples.size(), 120u);
  for (const auto& s : r.samples) {
    const auto ones = std::count(s.line_labels.begin(), s.line_labels.end(), 1);
    if (s.function_label) EXPECT_GE(ones, 1);
    else EXPECT_EQ(ones, 0);
  }
}

TEST(SampleBuilder, SyntheticTemplatesMineToTheirPattern) {
  Rng rng(2);
  for (int round = 0; round < 10; ++round) {
    for (auto pattern : kKnownPatterns) {
      const auto f = train::synthesize_function(pattern, rng);
      ASSERT_EQ(f.fixed.size(), f.broken.size());
      EXPECT_EQ(classify_pattern(f.broken[f.buggy_line], f.fixed[f.buggy_line]), pattern)
          << pattern_name(pattern) << ": " << f.broken[f.buggy_line] << " -> " << f.fixed[f.buggy_line];
    }
  }
  const auto samples = train::synthetic_corpus(26, 5);
  for (std::size_t i = 0; i < samples.size(); i += 2) EXPECT_NE(samples[i].pattern, BugPattern::Unknown);
}

// ---- commit export ----

TEST(CommitExport, RoundTripAndErrors) {
  const auto commits = train::synthetic_commits(5, 1);
  std::stringstream buffer;
  for (const auto& c : commits) buffer << commit_to_json(c).dump() << "\n";
  const auto back = read_commit_export(buffer);
  ASSERT_EQ(back.size(), commits.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].commit_id, commits[i].commit_id);
    EXPECT_EQ(back[i].files[0].before, commits[i].files[0].before);
  }
  std::stringstream bad(R"({"commit_id": "x", "message": "m", "files": [], "language": "java"})" "\n{\"message\": 1}\n");
  try {
    read_commit_export(bad);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

}  // namespace
}  // namespace dlr::miner
