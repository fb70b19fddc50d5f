#include "dlr/train/synthetic.hpp"

#include <algorithm>
#include <map>

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"
#include "dlr/miner/sample_builder.hpp"

namespace dlr::train {

namespace {

const std::vector<std::string> kNouns = {"Values", "Items",  "Scores", "Prices", "Counts", "Weights", "Sizes",
                                         "Totals", "Rates",  "Points", "Names",  "Labels", "Tags",    "Keys",
                                         "Users",  "Orders", "Files",  "Nodes",  "Entries", "Records"};
const std::vector<std::string> kArrays = {"values", "items", "scores", "data", "nums",
                                          "arr",    "buffer", "samples", "counts", "weights"};
const std::vector<std::string> kStrings = {"name", "text", "title", "word", "label",
                                           "path", "line", "message", "token", "prefix"};
const std::vector<std::string> kLists = {"list", "names", "entries", "tokens", "words",
                                         "lines", "queue", "pending", "tags", "ids"};
const std::vector<std::string> kScalars = {"left", "right", "first", "second", "lhs", "rhs",
                                           "x",    "y",     "base",  "delta",  "offset", "step"};
const std::vector<std::string> kResults = {"sum", "total", "acc", "result", "value", "out"};
const std::vector<std::string> kIndices = {"i", "j", "k", "n", "pos", "idx"};

using Vars = std::map<std::string, std::string>;

std::string fill(std::string line, const Vars& vars) {
  for (const auto& [key, value] : vars) {
    const std::string slot = "{" + key + "}";
    for (auto pos = line.find(slot); pos != std::string::npos; pos = line.find(slot, pos + value.size())) {
      line.replace(pos, slot.size(), value);
    }
  }
  return line;
}

// Picks names from `pool` that are not yet used by another variable.
std::string fresh(Rng& rng, const std::vector<std::string>& pool, Vars& vars, const std::string& key) {
  std::vector<std::string> free;
  for (const auto& name : pool) {
    const bool taken = std::any_of(vars.begin(), vars.end(), [&](const auto& kv) { return kv.second == name; });
    if (!taken) free.push_back(name);
  }
  vars[key] = rng.pick(free);
  return vars[key];
}

struct Template {
  std::string prefix;  // method name is prefix + noun
  std::vector<std::string> fixed;
  std::size_t line;          // index of the mutated line
  std::vector<std::string> broken_choices;  // replacement lines, one picked
};

Template make_template(BugPattern pattern, Rng& rng, Vars& v) {
  switch (pattern) {
    case BugPattern::ChangeOperator:
      fresh(rng, kArrays, v, "arr");
      fresh(rng, kResults, v, "acc");
      fresh(rng, kIndices, v, "i");
      return {"sum",
              {"public int {name}(int[] {arr}) {", "    int {acc} = 0;",
               "    for (int {i} = 0; {i} < {arr}.length; {i}++) {", "        {acc} += {arr}[{i}];", "    }",
               "    return {acc};", "}"},
              2,
              {"    for (int {i} = 0; {i} <= {arr}.length; {i}++) {",
               "    for (int {i} = 0; {i} > {arr}.length; {i}++) {"}};
    case BugPattern::ChangeOperand:
      fresh(rng, kScalars, v, "a");
      fresh(rng, kScalars, v, "b");
      fresh(rng, kResults, v, "r");
      return {"combine",
              {"public int {name}(int {a}, int {b}) {", "    int {r} = {a} + {b};", "    return {r};", "}"},
              1,
              {"    int {r} = {a} + {a};", "    int {r} = {b} + {b};"}};
    case BugPattern::ChangeIdentifier:
      fresh(rng, kStrings, v, "s");
      fresh(rng, kStrings, v, "out");
      return {"describe",
              {"public String {name}(String {s}) {", "    String {out} = \"{lower}: \" + {s};", "    return {out};",
               "}"},
              2,
              {"    return {s};"}};
    case BugPattern::ChangeNumeral:
      fresh(rng, kArrays, v, "arr");
      return {"last",
              {"public int {name}(int[] {arr}) {", "    return {arr}[{arr}.length - 1];", "}"},
              1,
              {"    return {arr}[{arr}.length - 0];", "    return {arr}[{arr}.length - 2];"}};
    case BugPattern::ChangeCallerInFunction:
      fresh(rng, kLists, v, "src");
      fresh(rng, kLists, v, "dst");
      fresh(rng, kStrings, v, "x");
      return {"copy",
              {"public void {name}(List<String> {src}, List<String> {dst}) {", "    for (String {x} : {src}) {",
               "        {dst}.add({x});", "    }", "}"},
              2,
              {"        {src}.add({x});"}};
    case BugPattern::ChangeUnaryOperator:
      fresh(rng, kLists, v, "list");
      return {"first",
              {"public String {name}(List<String> {list}) {", "    if (!{list}.isEmpty()) {",
               "        return {list}.get(0);", "    }", "    return null;", "}"},
              1,
              {"    if ({list}.isEmpty()) {"}};
    case BugPattern::OverloadMethodMoreArgs:
      fresh(rng, kStrings, v, "s");
      fresh(rng, kScalars, v, "from");
      fresh(rng, kScalars, v, "to");
      return {"slice",
              {"public String {name}(String {s}, int {from}, int {to}) {", "    return {s}.substring({from}, {to});",
               "}"},
              1,
              {"    return {s}.substring({from});", "    return {s}.substring({to});"}};
    case BugPattern::OverloadMethodDeletedArgs:
      fresh(rng, kStrings, v, "s");
      fresh(rng, kScalars, v, "from");
      return {"tail",
              {"public String {name}(String {s}, int {from}) {", "    return {s}.substring({from});", "}"},
              1,
              {"    return {s}.substring({from}, {from});"}};
    case BugPattern::DifferentMethodSameArgs:
      fresh(rng, kLists, v, "list");
      fresh(rng, kStrings, v, "x");
      if (rng.below(2) == 0) {
        return {"add",
                {"public void {name}(List<String> {list}, String {x}) {", "    {list}.add({x});", "}"},
                1,
                {"    {list}.remove({x});"}};
      }
      return {"remove",
              {"public void {name}(List<String> {list}, String {x}) {", "    {list}.remove({x});", "}"},
              1,
              {"    {list}.add({x});"}};
    case BugPattern::MoreSpecificIf:
      fresh(rng, kArrays, v, "arr");
      fresh(rng, kIndices, v, "i");
      return {"get",
              {"public int {name}(int[] {arr}, int {i}) {", "    if ({i} >= 0 && {i} < {arr}.length) {",
               "        return {arr}[{i}];", "    }", "    return -1;", "}"},
              1,
              {"    if ({i} >= 0) {", "    if ({i} < {arr}.length) {"}};
    case BugPattern::LessSpecificIf:
      fresh(rng, kStrings, v, "a");
      fresh(rng, kStrings, v, "b");
      return {"measure",
              {"public int {name}(String {a}, String {b}) {", "    if ({a} == null || {b} == null) {",
               "        return 0;", "    }", "    return {a}.length() + {b}.length();", "}"},
              1,
              {"    if ({a} == null) {", "    if ({b} == null) {"}};
    case BugPattern::SwapArguments:
      fresh(rng, kLists, v, "m");
      fresh(rng, kStrings, v, "key");
      fresh(rng, kScalars, v, "val");
      return {"store",
              {"public void {name}(Map<String, Integer> {m}, String {key}, int {val}) {",
               "    {m}.put({key}, {val});", "}"},
              1,
              {"    {m}.put({val}, {key});"}};
    case BugPattern::SwapBooleanLiteral:
      fresh(rng, kLists, v, "list");
      return {"has",
              {"public boolean {name}(List<String> {list}) {", "    if ({list}.isEmpty()) {",
               "        return false;", "    }", "    return true;", "}"},
              2,
              {"        return true;"}};
    case BugPattern::Unknown:
      break;
  }
  throw UsageError("no synthetic template for pattern " + std::string(pattern_name(pattern)));
}

std::string indent(const std::string& line) { return line.empty() ? line : "    " + line; }

std::string class_text(const std::string& cls, const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::vector<std::string> lines{"import java.util.List;", "import java.util.Map;", "",
                                 "public class " + cls + " {"};
  for (const auto& l : a) lines.push_back(indent(l));
  lines.emplace_back();
  for (const auto& l : b) lines.push_back(indent(l));
  lines.emplace_back("}");
  lines.emplace_back();
  return text::join_lines(lines);
}

std::string hex_id(Rng& rng) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string id;
  for (int i = 0; i < 40; ++i) id += kHex[rng.below(16)];
  return id;
}

const std::vector<std::string> kFixMessages = {
    "Fix off-by-one in {name}", "Fixed wrong result of {name}", "Bug in {name} when input is empty",
    "Correct incorrect check in {name}", "Resolve issue with {name}", "Fixes defect in {name}"};
const std::vector<std::string> kNoiseMessages = {"Refactor {name}", "Add logging to {name}",
                                                 "Rename helper near {name}", "Tidy up {name}"};

}  // namespace

SyntheticFunction synthesize_function(BugPattern pattern, Rng& rng) {
  Vars vars;
  const std::string noun = rng.pick(kNouns);
  Template t = make_template(pattern, rng, vars);
  vars["name"] = t.prefix + noun;
  vars["lower"] = text::to_lower(noun);
  SyntheticFunction f;
  f.name = vars["name"];
  f.pattern = pattern;
  f.buggy_line = t.line;
  for (const auto& line : t.fixed) f.fixed.push_back(fill(line, vars));
  f.broken = f.fixed;
  f.broken[t.line] = fill(rng.pick(t.broken_choices), vars);
  return f;
}

std::vector<miner::CommitRecord> synthetic_commits(int bugfix_commits, std::uint64_t seed,
                                                   const SyntheticOptions& options) {
  if (bugfix_commits < 0 || options.num_projects <= 0) throw UsageError("invalid synthetic corpus size");
  Rng rng(seed);
  const auto& patterns = kKnownPatterns;
  std::vector<miner::CommitRecord> commits;
  const int total = bugfix_commits + options.noise_commits;
  for (int c = 0; c < total; ++c) {
    const bool fix = c < bugfix_commits;
    const BugPattern pattern = patterns[static_cast<std::size_t>(c) % patterns.size()];
    const SyntheticFunction f = synthesize_function(pattern, rng);
    // An unchanged neighbour of a different pattern, so its name never clashes.
    BugPattern other = patterns[rng.below(patterns.size())];
    while (other == pattern) other = patterns[rng.below(patterns.size())];
    const SyntheticFunction helper = synthesize_function(other, rng);

    miner::CommitRecord commit;
    commit.commit_id = hex_id(rng);
    commit.project = "project-" + std::to_string(c % options.num_projects);
    commit.language = miner::Language::Java;
    const auto& messages = fix ? kFixMessages : kNoiseMessages;
    commit.message = fill(rng.pick(messages), {{"name", f.name}});
    const std::string cls = rng.pick(kNouns) + "Util";
    commit.files.push_back({"src/main/java/" + cls + ".java", class_text(cls, f.broken, helper.fixed),
                            class_text(cls, f.fixed, helper.fixed)});
    commits.push_back(std::move(commit));
  }
  return commits;
}

std::vector<DebugSample> synthetic_corpus(int num_samples, std::uint64_t seed, const SyntheticOptions& options) {
  if (num_samples <= 0 || num_samples % 2 != 0) throw UsageError("synthetic corpus size must be a positive even number");
  const auto commits = synthetic_commits(num_samples / 2, seed, options);
  auto mined = miner::build_samples(commits);
  if (mined.samples.size() != static_cast<std::size_t>(num_samples)) {
    throw DataError("synthetic commits mined into " + std::to_string(mined.samples.size()) + " samples, expected " +
                    std::to_string(num_samples));
  }
  return std::move(mined.samples);
}

}  // namespace dlr::train
