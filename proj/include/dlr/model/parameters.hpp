#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dlr/model/config.hpp"

namespace dlr::model {

template <class T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// y = x * weight + bias, weight is (in x out), bias is (1 x out).
template <class T>
struct LinearParams {
  Matrix<T> weight;
  Matrix<T> bias;
};

template <class T>
struct LayerNormParams {
  Matrix<T> gain;
  Matrix<T> bias;
};

template <class T>
struct AttentionParams {
  LinearParams<T> query, key, value, output;
};

template <class T>
struct FeedForwardParams {
  LinearParams<T> expand, contract;
};

template <class T>
struct EncoderLayerParams {
  LayerNormParams<T> attn_norm;
  AttentionParams<T> self_attn;
  LayerNormParams<T> ffn_norm;
  FeedForwardParams<T> ffn;
};

template <class T>
struct DecoderLayerParams {
  LayerNormParams<T> self_norm;
  AttentionParams<T> self_attn;
  LayerNormParams<T> cross_norm;
  AttentionParams<T> cross_attn;
  LayerNormParams<T> ffn_norm;
  FeedForwardParams<T> ffn;
};

// Every weight of the shared encoder-decoder and the two classification
// heads. Positional information is a fixed sinusoidal table and holds no
// weights. The same type doubles as a gradient accumulator.
template <class T>
struct ModelParameters {
  ModelConfig config;
  Matrix<T> embedding;  // vocab x dim, shared by encoder and decoder inputs
  std::vector<EncoderLayerParams<T>> encoder;
  LayerNormParams<T> encoder_norm;
  std::vector<DecoderLayerParams<T>> decoder;
  LayerNormParams<T> decoder_norm;
  LinearParams<T> lm_head;        // dim -> vocab
  LinearParams<T> detect_head;    // dim -> 1
  LinearParams<T> localize_head;  // dim -> 1

  // All-zero tensors with the shapes implied by `config`.
  static ModelParameters zeros(const ModelConfig& config);
  // Random initialization drawn from config.seed.
  static ModelParameters initialized(const ModelConfig& config);

  void set_zero();
  std::size_t num_values() const;
  bool all_finite() const;

  template <class U>
  ModelParameters<U> cast() const;
};

namespace detail {

template <class L, class F>
void visit_linear(const std::string& prefix, L& p, F& f) {
  f(prefix + ".weight", p.weight);
  f(prefix + ".bias", p.bias);
}

template <class N, class F>
void visit_norm(const std::string& prefix, N& p, F& f) {
  f(prefix + ".gain", p.gain);
  f(prefix + ".bias", p.bias);
}

template <class A, class F>
void visit_attention(const std::string& prefix, A& p, F& f) {
  visit_linear(prefix + ".query", p.query, f);
  visit_linear(prefix + ".key", p.key, f);
  visit_linear(prefix + ".value", p.value, f);
  visit_linear(prefix + ".output", p.output, f);
}

template <class P, class F>
void visit_ffn(const std::string& prefix, P& p, F& f) {
  visit_linear(prefix + ".expand", p.expand, f);
  visit_linear(prefix + ".contract", p.contract, f);
}

}  // namespace detail

// Calls f(name, matrix) for every tensor, in a fixed order. Works on const
// and non-const parameter sets.
template <class P, class F>
void visit_tensors(P& params, F&& f) {
  f(std::string("embedding"), params.embedding);
  for (std::size_t i = 0; i < params.encoder.size(); ++i) {
    const std::string prefix = "encoder." + std::to_string(i);
    auto& layer = params.encoder[i];
    detail::visit_norm(prefix + ".attn_norm", layer.attn_norm, f);
    detail::visit_attention(prefix + ".self_attn", layer.self_attn, f);
    detail::visit_norm(prefix + ".ffn_norm", layer.ffn_norm, f);
    detail::visit_ffn(prefix + ".ffn", layer.ffn, f);
  }
  detail::visit_norm("encoder_norm", params.encoder_norm, f);
  for (std::size_t i = 0; i < params.decoder.size(); ++i) {
    const std::string prefix = "decoder." + std::to_string(i);
    auto& layer = params.decoder[i];
    detail::visit_norm(prefix + ".self_norm", layer.self_norm, f);
    detail::visit_attention(prefix + ".self_attn", layer.self_attn, f);
    detail::visit_norm(prefix + ".cross_norm", layer.cross_norm, f);
    detail::visit_attention(prefix + ".cross_attn", layer.cross_attn, f);
    detail::visit_norm(prefix + ".ffn_norm", layer.ffn_norm, f);
    detail::visit_ffn(prefix + ".ffn", layer.ffn, f);
  }
  detail::visit_norm("decoder_norm", params.decoder_norm, f);
  detail::visit_linear("lm_head", params.lm_head, f);
  detail::visit_linear("detect_head", params.detect_head, f);
  detail::visit_linear("localize_head", params.localize_head, f);
}

// Visits matching tensors of two parameter sets with identical structure.
template <class P, class Q, class F>
void visit_tensor_pairs(P& a, Q& b, F&& f) {
  std::vector<std::pair<std::string, decltype(&a.embedding)>> left;
  visit_tensors(a, [&](const std::string& name, auto& m) { left.emplace_back(name, &m); });
  std::size_t i = 0;
  visit_tensors(b, [&](const std::string& name, auto& m) {
    f(name, *left[i].second, m);
    ++i;
  });
}

template <class T>
template <class U>
ModelParameters<U> ModelParameters<T>::cast() const {
  auto out = ModelParameters<U>::zeros(config);
  visit_tensor_pairs(*this, out, [](const std::string&, const auto& src, auto& dst) {
    dst = src.template cast<U>();
  });
  return out;
}

extern template struct ModelParameters<float>;
extern template struct ModelParameters<double>;

}  // namespace dlr::model
