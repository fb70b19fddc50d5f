#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlr/common/random.hpp"
#include "dlr/corpus/example.hpp"
#include "dlr/model/config.hpp"
#include "dlr/model/parameters.hpp"

namespace dlr::model {

// Decision rule shared by every detection consumer.
inline constexpr double kDetectThreshold = 0.5;
inline bool is_buggy(double detect_prob, double threshold = kDetectThreshold) {
  return detect_prob > threshold;
}

double sigmoid(double x);

// Hidden states (rows = positions) for one source sequence. Positions with a
// nonzero pad_mask entry are excluded as attention keys; an empty mask means
// no padding. Throws DataError for ids outside the vocabulary.
template <class T>
Matrix<T> encode(const ModelParameters<T>& params, std::span<const TokenId> input_ids,
                 std::span<const std::uint8_t> pad_mask = {});

// Buggy probability read from the state at the last non-padding position.
template <class T>
double detect(const ModelParameters<T>& params, const Matrix<T>& encoded, int last_nonpad_index);

// One probability per SEP position. Throws DataError when empty.
template <class T>
std::vector<double> localize(const ModelParameters<T>& params, const Matrix<T>& encoded,
                             std::span<const int> sep_positions);

struct LossBundle {
  double detect_loss = 0.0;
  double localize_loss = 0.0;
  double repair_loss = 0.0;
  double total = 0.0;
};

// Joint loss over a batch. When `grads` is given, gradients of `total` are
// added into it. Dropout is applied only when `dropout_rng` is given and the
// config rate is nonzero.
template <class T>
LossBundle compute_losses(const ModelParameters<T>& params, std::span<const TokenizedExample> batch,
                          ObjectiveMask mask, ModelParameters<T>* grads = nullptr,
                          Rng* dropout_rng = nullptr);

// Autoregressive decoder over a fixed encoder output, with per-layer key and
// value caches. A State is cheap to copy, which is how beams branch.
template <class T>
class DecoderSession {
 public:
  struct State {
    std::vector<std::vector<T>> self_keys;    // per layer, position-major
    std::vector<std::vector<T>> self_values;
    int length = 0;
  };

  DecoderSession(const ModelParameters<T>& params, const Matrix<T>& encoded);

  State initial() const;
  // Feeds `token` at the next position and returns log-probabilities of the
  // token that follows.
  std::vector<double> step(State& state, TokenId token) const;

  int vocab_size() const { return params_.config.vocab_size; }

 private:
  const ModelParameters<T>& params_;
  std::vector<Matrix<T>> cross_keys_;
  std::vector<Matrix<T>> cross_values_;
};

// Argmax decoding from BOS; ties go to the lowest token id. The result
// starts after BOS and includes the terminating EOS when one was produced.
template <class T>
std::vector<TokenId> greedy_decode(const ModelParameters<T>& params, const Matrix<T>& encoded,
                                   int max_len);

}  // namespace dlr::model
