#pragma once

#include <vector>

#include "dlr/common/random.hpp"
#include "dlr/corpus/example.hpp"
#include "dlr/model/config.hpp"
#include "dlr/model/parameters.hpp"

namespace dlr::testing {

inline model::ModelConfig tiny_config(int vocab = 24, std::uint64_t seed = 3) {
  model::ModelConfig c;
  c.vocab_size = vocab;
  c.model_dim = 16;
  c.num_heads = 2;
  c.ffn_dim = 32;
  c.num_encoder_layers = 2;
  c.num_decoder_layers = 2;
  c.seed = seed;
  return c;
}

// A random well-formed example: lines of ordinary tokens each closed by SEP,
// then EOS; target BOS ... EOS.
inline TokenizedExample random_example(Rng& rng, int vocab, int max_lines = 4, int max_line_len = 4,
                                       int max_target = 6) {
  TokenizedExample ex;
  const int lines = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_lines)));
  const auto ordinary = [&] { return static_cast<TokenId>(Tokenizer::kNumReserved + rng.below(vocab - Tokenizer::kNumReserved)); };
  for (int l = 0; l < lines; ++l) {
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_line_len)));
    for (int t = 0; t < len; ++t) ex.input_ids.push_back(ordinary());
    ex.sep_positions.push_back(static_cast<int>(ex.input_ids.size()));
    ex.input_ids.push_back(Tokenizer::kSep);
    ex.line_labels.push_back(rng.below(2) ? 1 : 0);
  }
  ex.input_ids.push_back(Tokenizer::kEos);
  ex.function_label = false;
  for (auto l : ex.line_labels) ex.function_label = ex.function_label || l != 0;
  ex.target_ids.push_back(Tokenizer::kBos);
  if (ex.function_label) {
    const int len = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_target)));
    for (int t = 0; t < len; ++t) ex.target_ids.push_back(ordinary());
  }
  ex.target_ids.push_back(Tokenizer::kEos);
  return ex;
}

inline std::vector<TokenizedExample> random_batch(Rng& rng, int vocab, int size) {
  std::vector<TokenizedExample> batch;
  for (int i = 0; i < size; ++i) batch.push_back(random_example(rng, vocab));
  return batch;
}

}  // namespace dlr::testing
