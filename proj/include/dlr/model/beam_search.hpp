#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dlr/corpus/tokenizer.hpp"

namespace dlr::model {

struct BeamConfig {
  int width = 5;
  // Maximum number of generated tokens, EOS included.
  int max_len = 511;
  // Exponent of the length normalization: score = log_prob / length^alpha.
  double length_penalty = 0.7;
  TokenId bos = Tokenizer::kBos;
  TokenId eos = Tokenizer::kEos;
};

struct Hypothesis {
  std::vector<TokenId> tokens;  // after BOS, ends with EOS when finished
  double log_prob = 0.0;
  double score = 0.0;
  bool finished = false;
};

inline double normalized_score(double log_prob, std::size_t length, double alpha) {
  return length == 0 ? log_prob : log_prob / std::pow(static_cast<double>(length), alpha);
}

// Length-normalized beam search over any decoder exposing
//   State initial() const;
//   std::vector<double> step(State&, TokenId) const;   // next-token log-probs
// Expansions are ranked by (log_prob desc, tokens asc), so equal scores are
// resolved by token id order. A hypothesis that emits EOS is kept only if its
// expansion ranks within the beam. Returns at most `width` hypotheses sorted
// by normalized score.
template <class Decoder>
std::vector<Hypothesis> beam_search(const Decoder& decoder, const BeamConfig& config) {
  using State = typename Decoder::State;
  struct Live {
    Hypothesis hyp;
    State state;
    TokenId pending;
  };
  struct Expansion {
    std::size_t parent;
    TokenId token;
    double log_prob;
  };

  const auto width = static_cast<std::size_t>(std::max(config.width, 1));
  std::vector<Hypothesis> finished;
  std::vector<Live> live;
  live.push_back({Hypothesis{}, decoder.initial(), config.bos});

  auto prefix_less = [&live](const Expansion& a, const Expansion& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    const auto& ta = live[a.parent].hyp.tokens;
    const auto& tb = live[b.parent].hyp.tokens;
    if (ta != tb) return ta < tb;
    return a.token < b.token;
  };

  for (int t = 0; t < config.max_len && !live.empty() && finished.size() < width; ++t) {
    std::vector<Expansion> expansions;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const std::vector<double> logp = decoder.step(live[i].state, live[i].pending);
      for (std::size_t v = 0; v < logp.size(); ++v) {
        expansions.push_back({i, static_cast<TokenId>(v), live[i].hyp.log_prob + logp[v]});
      }
    }
    // Hypotheses share prefixes of equal length, so lexicographic order on
    // (parent tokens, token) is order on the extended sequence.
    const std::size_t keep = std::min(expansions.size(), 2 * width);
    std::partial_sort(expansions.begin(), expansions.begin() + static_cast<std::ptrdiff_t>(keep), expansions.end(),
                      prefix_less);
    expansions.resize(keep);

    std::vector<std::size_t> children(live.size(), 0);
    std::vector<Expansion> chosen;
    for (std::size_t rank = 0; rank < expansions.size() && chosen.size() < width; ++rank) {
      const auto& e = expansions[rank];
      if (e.token == config.eos) {
        if (rank < width) {
          Hypothesis h = live[e.parent].hyp;
          h.tokens.push_back(e.token);
          h.log_prob = e.log_prob;
          h.finished = true;
          h.score = normalized_score(h.log_prob, h.tokens.size(), config.length_penalty);
          finished.push_back(std::move(h));
        }
        continue;
      }
      chosen.push_back(e);
      ++children[e.parent];
    }

    std::vector<Live> next;
    next.reserve(chosen.size());
    for (const auto& e : chosen) {
      Live& parent = live[e.parent];
      Hypothesis h = parent.hyp;
      h.tokens.push_back(e.token);
      h.log_prob = e.log_prob;
      h.score = normalized_score(h.log_prob, h.tokens.size(), config.length_penalty);
      // The last child of a parent takes its state instead of copying it.
      if (--children[e.parent] == 0) {
        next.push_back({std::move(h), std::move(parent.state), e.token});
      } else {
        next.push_back({std::move(h), parent.state, e.token});
      }
    }
    live = std::move(next);
  }

  for (auto& l : live) {
    if (finished.size() >= width) break;
    finished.push_back(std::move(l.hyp));
  }
  std::stable_sort(finished.begin(), finished.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.tokens < b.tokens;
  });
  if (finished.size() > width) finished.resize(width);
  return finished;
}

}  // namespace dlr::model
