#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlr/corpus/debug_sample.hpp"
#include "dlr/corpus/tokenizer.hpp"

namespace dlr {

inline constexpr int kDefaultMaxSourceLen = 512;
inline constexpr int kDefaultMaxTargetLen = 512;

// Model-ready form of a DebugSample. input_ids holds the line tokens with one
// SEP closing each surviving line, followed by EOS. target_ids is
// BOS + fixed function + EOS, or just BOS EOS for clean samples.
struct TokenizedExample {
  std::vector<TokenId> input_ids;
  std::vector<int> sep_positions;
  std::vector<std::uint8_t> line_labels;
  std::vector<TokenId> target_ids;
  bool function_label = false;
  // Set when truncation removed every buggy line of a buggy sample.
  bool degenerate = false;

  int last_position() const { return static_cast<int>(input_ids.size()) - 1; }
  std::size_t num_lines() const { return sep_positions.size(); }
};

struct SequenceLimits {
  int max_source_len = kDefaultMaxSourceLen;
  int max_target_len = kDefaultMaxTargetLen;
};

TokenizedExample build_example(const DebugSample& sample, const Tokenizer& tok,
                               SequenceLimits limits = {});

struct BuiltExamples {
  std::vector<TokenizedExample> examples;
  // Index into the input sample list for each kept example.
  std::vector<std::size_t> sample_index;
  std::size_t skipped_degenerate = 0;
};

// Builds every sample, dropping degenerate examples.
BuiltExamples build_examples(std::span<const DebugSample> samples, const Tokenizer& tok,
                             SequenceLimits limits = {});

}  // namespace dlr
