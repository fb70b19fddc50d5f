#include "dlr/corpus/example.hpp"

#include "dlr/common/error.hpp"
#include "dlr/common/text.hpp"
#include "dlr/corpus/sentinel.hpp"

namespace dlr {

TokenizedExample build_example(const DebugSample& sample, const Tokenizer& tok,
                               SequenceLimits limits) {
  validate(sample);
  if (limits.max_source_len < 3 || limits.max_target_len < 2) {
    throw UsageError("sequence limits too small");
  }
  const auto encoded = tok.encode(insert_line_sentinels(sample.before_lines));

  TokenizedExample ex;
  // Keep whole lines while the line tokens plus the trailing EOS fit.
  std::size_t line_start = 0;
  std::size_t line = 0;
  for (std::size_t i = 0; i < encoded.size(); ++i) {
    if (encoded[i] != Tokenizer::kSep) continue;
    const std::size_t line_end = i + 1;
    if (line_end + 1 > static_cast<std::size_t>(limits.max_source_len)) break;
    ex.input_ids.insert(ex.input_ids.end(), encoded.begin() + static_cast<std::ptrdiff_t>(line_start),
                        encoded.begin() + static_cast<std::ptrdiff_t>(line_end));
    ex.sep_positions.push_back(static_cast<int>(i));
    ex.line_labels.push_back(sample.line_labels.at(line));
    ++line;
    line_start = line_end;
  }
  ex.input_ids.push_back(Tokenizer::kEos);

  bool any_buggy = false;
  for (auto v : ex.line_labels) any_buggy = any_buggy || v;
  ex.function_label = any_buggy;
  ex.degenerate = ex.sep_positions.empty() || (sample.function_label && !any_buggy);

  ex.target_ids.push_back(Tokenizer::kBos);
  if (sample.function_label) {
    auto target = tok.encode(text::join_lines(sample.after_lines));
    const auto budget = static_cast<std::size_t>(limits.max_target_len - 2);
    if (target.size() > budget) target.resize(budget);
    ex.target_ids.insert(ex.target_ids.end(), target.begin(), target.end());
  }
  ex.target_ids.push_back(Tokenizer::kEos);
  return ex;
}

BuiltExamples build_examples(std::span<const DebugSample> samples, const Tokenizer& tok,
                             SequenceLimits limits) {
  BuiltExamples out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    auto ex = build_example(samples[i], tok, limits);
    if (ex.degenerate) {
      ++out.skipped_degenerate;
      continue;
    }
    out.examples.push_back(std::move(ex));
    out.sample_index.push_back(i);
  }
  return out;
}

}  // namespace dlr
