#include "dlr/model/parameters.hpp"

#include <cmath>

#include "dlr/common/random.hpp"

namespace dlr::model {

namespace {

template <class T>
LinearParams<T> linear_zeros(int in, int out) {
  return {Matrix<T>::Zero(in, out), Matrix<T>::Zero(1, out)};
}

template <class T>
LayerNormParams<T> norm_zeros(int dim) {
  return {Matrix<T>::Zero(1, dim), Matrix<T>::Zero(1, dim)};
}

template <class T>
AttentionParams<T> attention_zeros(int dim) {
  return {linear_zeros<T>(dim, dim), linear_zeros<T>(dim, dim), linear_zeros<T>(dim, dim),
          linear_zeros<T>(dim, dim)};
}

template <class T>
void fill_normal(Matrix<T>& m, Rng& rng, double stddev) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.normal() * stddev);
}

}  // namespace

template <class T>
ModelParameters<T> ModelParameters<T>::zeros(const ModelConfig& config) {
  config.validate();
  const int d = config.model_dim;
  ModelParameters p;
  p.config = config;
  p.embedding = Matrix<T>::Zero(config.vocab_size, d);
  for (int i = 0; i < config.num_encoder_layers; ++i) {
    p.encoder.push_back({norm_zeros<T>(d), attention_zeros<T>(d), norm_zeros<T>(d),
                         {linear_zeros<T>(d, config.ffn_dim), linear_zeros<T>(config.ffn_dim, d)}});
  }
  p.encoder_norm = norm_zeros<T>(d);
  for (int i = 0; i < config.num_decoder_layers; ++i) {
    p.decoder.push_back({norm_zeros<T>(d), attention_zeros<T>(d), norm_zeros<T>(d), attention_zeros<T>(d),
                         norm_zeros<T>(d),
                         {linear_zeros<T>(d, config.ffn_dim), linear_zeros<T>(config.ffn_dim, d)}});
  }
  p.decoder_norm = norm_zeros<T>(d);
  p.lm_head = linear_zeros<T>(d, config.vocab_size);
  p.detect_head = linear_zeros<T>(d, 1);
  p.localize_head = linear_zeros<T>(d, 1);
  return p;
}

template <class T>
ModelParameters<T> ModelParameters<T>::initialized(const ModelConfig& config) {
  auto p = zeros(config);
  Rng rng(config.seed);
  const double layers = config.num_encoder_layers + config.num_decoder_layers;
  const double residual_scale = 1.0 / std::sqrt(2.0 * layers);
  visit_tensors(p, [&](const std::string& name, Matrix<T>& m) {
    if (name.ends_with(".gain")) {
      m.setOnes();
    } else if (name.ends_with(".bias")) {
      m.setZero();
    } else if (name == "embedding") {
      fill_normal(m, rng, 1.0);
    } else {
      double stddev = 1.0 / std::sqrt(static_cast<double>(m.rows()));
      if (name.ends_with("output.weight") || name.ends_with("contract.weight")) stddev *= residual_scale;
      fill_normal(m, rng, stddev);
    }
  });
  return p;
}

template <class T>
void ModelParameters<T>::set_zero() {
  visit_tensors(*this, [](const std::string&, Matrix<T>& m) { m.setZero(); });
}

template <class T>
std::size_t ModelParameters<T>::num_values() const {
  std::size_t n = 0;
  visit_tensors(*this, [&n](const std::string&, const Matrix<T>& m) { n += static_cast<std::size_t>(m.size()); });
  return n;
}

template <class T>
bool ModelParameters<T>::all_finite() const {
  bool finite = true;
  visit_tensors(*this, [&finite](const std::string&, const Matrix<T>& m) { finite = finite && m.allFinite(); });
  return finite;
}

template struct ModelParameters<float>;
template struct ModelParameters<double>;

}  // namespace dlr::model
