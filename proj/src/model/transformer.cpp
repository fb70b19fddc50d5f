#include "dlr/model/transformer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dlr/common/error.hpp"

namespace dlr::model {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

constexpr double kNormEps = 1e-5;

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

// Binary cross-entropy on a logit.
double bce_with_logit(double logit, bool label) { return softplus(logit) - (label ? logit : 0.0); }

// Sequences of a batch are packed row-wise into one matrix; segment i covers
// rows [offset[i], offset[i] + length[i]).
struct Packing {
  std::vector<int> offset;
  std::vector<int> length;
  int rows = 0;

  void add(int len) {
    offset.push_back(rows);
    length.push_back(len);
    rows += len;
  }
  std::size_t size() const { return offset.size(); }
  int max_length() const { return length.empty() ? 0 : *std::max_element(length.begin(), length.end()); }
};

template <class T>
Matrix<T> positional_table(int length, int dim) {
  Matrix<T> table(length, dim);
  for (int pos = 0; pos < length; ++pos) {
    for (int i = 0; i < dim; i += 2) {
      const double freq = std::pow(10000.0, -static_cast<double>(i) / dim);
      table(pos, i) = static_cast<T>(std::sin(pos * freq));
      if (i + 1 < dim) table(pos, i + 1) = static_cast<T>(std::cos(pos * freq));
    }
  }
  return table;
}

template <class T>
void check_ids(const ModelParameters<T>& params, std::span<const TokenId> ids) {
  for (TokenId id : ids) {
    if (id < 0 || id >= params.config.vocab_size) {
      throw DataError("token id " + std::to_string(id) + " outside vocabulary of size " +
                      std::to_string(params.config.vocab_size));
    }
  }
}

template <class T>
Matrix<T> embed(const ModelParameters<T>& params, std::span<const TokenId> ids, const Packing& packing) {
  const int dim = params.config.model_dim;
  const Matrix<T> pe = positional_table<T>(packing.max_length(), dim);
  Matrix<T> x(packing.rows, dim);
  for (std::size_t s = 0; s < packing.size(); ++s) {
    for (int p = 0; p < packing.length[s]; ++p) {
      const int row = packing.offset[s] + p;
      x.row(row) = params.embedding.row(ids[static_cast<std::size_t>(row)]) + pe.row(p);
    }
  }
  return x;
}

template <class T>
void embed_backward(std::span<const TokenId> ids, const Matrix<T>& dx, Matrix<T>& d_embedding) {
  for (Eigen::Index row = 0; row < dx.rows(); ++row) d_embedding.row(ids[static_cast<std::size_t>(row)]) += dx.row(row);
}

// ---- linear ----

template <class T>
void linear_forward(const LinearParams<T>& p, const Matrix<T>& x, Matrix<T>& y) {
  y.noalias() = x * p.weight;
  y.rowwise() += p.bias.row(0);
}

// Accumulates parameter gradients into `g` (if set) and writes dx (if set).
template <class T>
void linear_backward(const LinearParams<T>& p, const Matrix<T>& x, const Matrix<T>& dy, LinearParams<T>* g,
                     Matrix<T>* dx) {
  if (g) {
    g->weight.noalias() += x.transpose() * dy;
    g->bias += dy.colwise().sum();
  }
  if (dx) dx->noalias() = dy * p.weight.transpose();
}

// ---- layer norm ----

template <class T>
struct NormTape {
  Matrix<T> normalized;
  std::vector<T> inv_std;
};

template <class T>
void norm_forward(const LayerNormParams<T>& p, const Matrix<T>& x, Matrix<T>& y, NormTape<T>* tape) {
  const Eigen::Index rows = x.rows();
  const Eigen::Index dim = x.cols();
  y.resize(rows, dim);
  if (tape) {
    tape->normalized.resize(rows, dim);
    tape->inv_std.resize(static_cast<std::size_t>(rows));
  }
  for (Eigen::Index r = 0; r < rows; ++r) {
    const T mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).matrix();
    const T var = centered.squaredNorm() / static_cast<T>(dim);
    const T inv = T(1) / std::sqrt(var + static_cast<T>(kNormEps));
    if (tape) {
      tape->normalized.row(r) = centered * inv;
      tape->inv_std[static_cast<std::size_t>(r)] = inv;
      y.row(r) = tape->normalized.row(r).cwiseProduct(p.gain.row(0)) + p.bias.row(0);
    } else {
      y.row(r) = (centered * inv).cwiseProduct(p.gain.row(0)) + p.bias.row(0);
    }
  }
}

// Returns dx for the given dy.
template <class T>
Matrix<T> norm_backward(const LayerNormParams<T>& p, const NormTape<T>& tape, const Matrix<T>& dy,
                        LayerNormParams<T>* g) {
  if (g) {
    g->gain += dy.cwiseProduct(tape.normalized).colwise().sum();
    g->bias += dy.colwise().sum();
  }
  const Eigen::Index dim = dy.cols();
  Matrix<T> dx(dy.rows(), dim);
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const auto dxhat = dy.row(r).cwiseProduct(p.gain.row(0));
    const T mean_d = dxhat.mean();
    const T mean_dx = dxhat.dot(tape.normalized.row(r)) / static_cast<T>(dim);
    dx.row(r) = ((dxhat.array() - mean_d) - tape.normalized.row(r).array() * mean_dx) *
                tape.inv_std[static_cast<std::size_t>(r)];
  }
  return dx;
}

// ---- gelu (tanh form) ----

template <class T>
T gelu(T x) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  const T u = c * (x + T(0.044715) * x * x * x);
  return T(0.5) * x * (T(1) + std::tanh(u));
}

template <class T>
T gelu_grad(T x) {
  const T c = static_cast<T>(std::sqrt(2.0 / std::numbers::pi));
  const T u = c * (x + T(0.044715) * x * x * x);
  const T t = std::tanh(u);
  return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * c * (T(1) + T(3 * 0.044715) * x * x);
}

// ---- dropout ----

template <class T>
struct Dropout {
  double rate = 0.0;
  Rng* rng = nullptr;
  bool active() const { return rng != nullptr && rate > 0.0; }

  // Applies in place and records the scaled keep mask.
  void apply(Matrix<T>& x, Matrix<T>& mask) const {
    if (!active()) return;
    mask.resize(x.rows(), x.cols());
    const T scale = static_cast<T>(1.0 / (1.0 - rate));
    for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = rng->uniform() < rate ? T(0) : scale;
    x.array() *= mask.array();
  }
  static void backward(Matrix<T>& dx, const Matrix<T>& mask) {
    if (mask.size() != 0) dx.array() *= mask.array();
  }
};

// ---- attention ----

struct AttentionLayout {
  const Packing* queries;
  const Packing* keys;
  bool causal = false;
  // Nonzero entries mark key rows that may not be attended; empty = none.
  std::span<const std::uint8_t> key_padding;
};

template <class T>
struct AttentionTape {
  Matrix<T> query_input, key_input;
  Matrix<T> q, k, v;
  std::vector<Matrix<T>> probs;  // [segment * heads + head]
  Matrix<T> context;             // concatenated heads, input to the output projection
};

template <class T>
Matrix<T> attention_forward(const AttentionParams<T>& p, int heads, const Matrix<T>& xq, const Matrix<T>& xkv,
                            const AttentionLayout& layout, AttentionTape<T>& tape) {
  const int dim = static_cast<int>(xq.cols());
  const int hd = dim / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  tape.query_input = xq;
  tape.key_input = xkv;
  linear_forward(p.query, xq, tape.q);
  linear_forward(p.key, xkv, tape.k);
  linear_forward(p.value, xkv, tape.v);
  tape.context = Matrix<T>::Zero(xq.rows(), dim);
  tape.probs.assign(layout.queries->size() * static_cast<std::size_t>(heads), Matrix<T>());
  const T neg_inf = -std::numeric_limits<T>::infinity();
  for (std::size_t s = 0; s < layout.queries->size(); ++s) {
    const int qo = layout.queries->offset[s], ql = layout.queries->length[s];
    const int ko = layout.keys->offset[s], kl = layout.keys->length[s];
    for (int h = 0; h < heads; ++h) {
      Matrix<T>& prob = tape.probs[s * static_cast<std::size_t>(heads) + static_cast<std::size_t>(h)];
      prob.noalias() = tape.q.block(qo, h * hd, ql, hd) * tape.k.block(ko, h * hd, kl, hd).transpose();
      prob *= scale;
      for (int i = 0; i < ql; ++i) {
        for (int j = 0; j < kl; ++j) {
          const bool padded = !layout.key_padding.empty() && layout.key_padding[static_cast<std::size_t>(ko + j)];
          if (padded || (layout.causal && j > i)) prob(i, j) = neg_inf;
        }
        const T mx = prob.row(i).maxCoeff();
        prob.row(i) = (prob.row(i).array() - mx).exp();
        prob.row(i) /= prob.row(i).sum();
      }
      tape.context.block(qo, h * hd, ql, hd).noalias() = prob * tape.v.block(ko, h * hd, kl, hd);
    }
  }
  Matrix<T> out;
  linear_forward(p.output, tape.context, out);
  return out;
}

// Writes gradients w.r.t. the query input and key/value input.
template <class T>
void attention_backward(const AttentionParams<T>& p, int heads, const AttentionLayout& layout,
                        const AttentionTape<T>& tape, const Matrix<T>& dout, AttentionParams<T>* g,
                        Matrix<T>& dxq, Matrix<T>& dxkv) {
  const int dim = static_cast<int>(tape.q.cols());
  const int hd = dim / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  Matrix<T> dcontext;
  linear_backward(p.output, tape.context, dout, g ? &g->output : nullptr, &dcontext);
  Matrix<T> dq = Matrix<T>::Zero(tape.q.rows(), dim);
  Matrix<T> dk = Matrix<T>::Zero(tape.k.rows(), dim);
  Matrix<T> dv = Matrix<T>::Zero(tape.v.rows(), dim);
  Matrix<T> dprob, dscore;
  for (std::size_t s = 0; s < layout.queries->size(); ++s) {
    const int qo = layout.queries->offset[s], ql = layout.queries->length[s];
    const int ko = layout.keys->offset[s], kl = layout.keys->length[s];
    for (int h = 0; h < heads; ++h) {
      const Matrix<T>& prob = tape.probs[s * static_cast<std::size_t>(heads) + static_cast<std::size_t>(h)];
      const auto dctx = dcontext.block(qo, h * hd, ql, hd);
      dprob.noalias() = dctx * tape.v.block(ko, h * hd, kl, hd).transpose();
      dv.block(ko, h * hd, kl, hd).noalias() += prob.transpose() * dctx;
      const auto row_dot = dprob.cwiseProduct(prob).rowwise().sum();
      dscore = prob.cwiseProduct((dprob.colwise() - row_dot).eval());
      dscore *= scale;
      dq.block(qo, h * hd, ql, hd).noalias() += dscore * tape.k.block(ko, h * hd, kl, hd);
      dk.block(ko, h * hd, kl, hd).noalias() += dscore.transpose() * tape.q.block(qo, h * hd, ql, hd);
    }
  }
  linear_backward(p.query, tape.query_input, dq, g ? &g->query : nullptr, &dxq);
  Matrix<T> tmp;
  linear_backward(p.key, tape.key_input, dk, g ? &g->key : nullptr, &dxkv);
  linear_backward(p.value, tape.key_input, dv, g ? &g->value : nullptr, &tmp);
  dxkv += tmp;
}

// ---- feed-forward ----

template <class T>
struct FfnTape {
  Matrix<T> input, pre, act;
};

template <class T>
Matrix<T> ffn_forward(const FeedForwardParams<T>& p, const Matrix<T>& x, FfnTape<T>& tape) {
  tape.input = x;
  linear_forward(p.expand, x, tape.pre);
  tape.act = tape.pre.unaryExpr([](T v) { return gelu(v); });
  Matrix<T> out;
  linear_forward(p.contract, tape.act, out);
  return out;
}

template <class T>
Matrix<T> ffn_backward(const FeedForwardParams<T>& p, const FfnTape<T>& tape, const Matrix<T>& dout,
                       FeedForwardParams<T>* g) {
  Matrix<T> dact;
  linear_backward(p.contract, tape.act, dout, g ? &g->contract : nullptr, &dact);
  dact.array() *= tape.pre.unaryExpr([](T v) { return gelu_grad(v); }).array();
  Matrix<T> dx;
  linear_backward(p.expand, tape.input, dact, g ? &g->expand : nullptr, &dx);
  return dx;
}

// ---- encoder ----

template <class T>
struct EncoderLayerTape {
  NormTape<T> attn_norm;
  AttentionTape<T> attn;
  Matrix<T> attn_drop;
  NormTape<T> ffn_norm;
  FfnTape<T> ffn;
  Matrix<T> ffn_drop;
};

template <class T>
struct EncoderTape {
  Matrix<T> embed_drop;
  std::vector<EncoderLayerTape<T>> layers;
  NormTape<T> final_norm;
};

template <class T>
Matrix<T> encoder_forward(const ModelParameters<T>& params, std::span<const TokenId> ids, const Packing& packing,
                          std::span<const std::uint8_t> key_padding, const Dropout<T>& dropout, EncoderTape<T>& tape) {
  const int heads = params.config.num_heads;
  Matrix<T> h = embed(params, ids, packing);
  dropout.apply(h, tape.embed_drop);
  tape.layers.resize(params.encoder.size());
  const AttentionLayout layout{&packing, &packing, false, key_padding};
  Matrix<T> normed;
  for (std::size_t l = 0; l < params.encoder.size(); ++l) {
    const auto& layer = params.encoder[l];
    auto& lt = tape.layers[l];
    norm_forward(layer.attn_norm, h, normed, &lt.attn_norm);
    Matrix<T> a = attention_forward(layer.self_attn, heads, normed, normed, layout, lt.attn);
    dropout.apply(a, lt.attn_drop);
    h += a;
    norm_forward(layer.ffn_norm, h, normed, &lt.ffn_norm);
    Matrix<T> f = ffn_forward(layer.ffn, normed, lt.ffn);
    dropout.apply(f, lt.ffn_drop);
    h += f;
  }
  Matrix<T> out;
  norm_forward(params.encoder_norm, h, out, &tape.final_norm);
  return out;
}

template <class T>
void encoder_backward(const ModelParameters<T>& params, std::span<const TokenId> ids, const Packing& packing,
                      std::span<const std::uint8_t> key_padding, const EncoderTape<T>& tape, const Matrix<T>& dout,
                      ModelParameters<T>& g) {
  const int heads = params.config.num_heads;
  const AttentionLayout layout{&packing, &packing, false, key_padding};
  Matrix<T> dh = norm_backward(params.encoder_norm, tape.final_norm, dout, &g.encoder_norm);
  for (std::size_t l = params.encoder.size(); l-- > 0;) {
    const auto& layer = params.encoder[l];
    const auto& lt = tape.layers[l];
    Matrix<T> df = dh;
    Dropout<T>::backward(df, lt.ffn_drop);
    Matrix<T> dnormed = ffn_backward(layer.ffn, lt.ffn, df, &g.encoder[l].ffn);
    dh += norm_backward(layer.ffn_norm, lt.ffn_norm, dnormed, &g.encoder[l].ffn_norm);
    Matrix<T> da = dh;
    Dropout<T>::backward(da, lt.attn_drop);
    Matrix<T> dq, dkv;
    attention_backward(layer.self_attn, heads, layout, lt.attn, da, &g.encoder[l].self_attn, dq, dkv);
    dq += dkv;
    dh += norm_backward(layer.attn_norm, lt.attn_norm, dq, &g.encoder[l].attn_norm);
  }
  Dropout<T>::backward(dh, tape.embed_drop);
  embed_backward(ids, dh, g.embedding);
}

// ---- decoder ----

template <class T>
struct DecoderLayerTape {
  NormTape<T> self_norm;
  AttentionTape<T> self_attn;
  Matrix<T> self_drop;
  NormTape<T> cross_norm;
  AttentionTape<T> cross_attn;
  Matrix<T> cross_drop;
  NormTape<T> ffn_norm;
  FfnTape<T> ffn;
  Matrix<T> ffn_drop;
};

template <class T>
struct DecoderTape {
  Matrix<T> embed_drop;
  std::vector<DecoderLayerTape<T>> layers;
  NormTape<T> final_norm;
  Matrix<T> final_hidden;
};

// Returns vocabulary logits for every decoder position.
template <class T>
Matrix<T> decoder_forward(const ModelParameters<T>& params, std::span<const TokenId> ids, const Packing& dec,
                          const Packing& enc, const Matrix<T>& memory, const Dropout<T>& dropout,
                          DecoderTape<T>& tape) {
  const int heads = params.config.num_heads;
  Matrix<T> h = embed(params, ids, dec);
  dropout.apply(h, tape.embed_drop);
  tape.layers.resize(params.decoder.size());
  const AttentionLayout self_layout{&dec, &dec, true, {}};
  const AttentionLayout cross_layout{&dec, &enc, false, {}};
  Matrix<T> normed;
  for (std::size_t l = 0; l < params.decoder.size(); ++l) {
    const auto& layer = params.decoder[l];
    auto& lt = tape.layers[l];
    norm_forward(layer.self_norm, h, normed, &lt.self_norm);
    Matrix<T> a = attention_forward(layer.self_attn, heads, normed, normed, self_layout, lt.self_attn);
    dropout.apply(a, lt.self_drop);
    h += a;
    norm_forward(layer.cross_norm, h, normed, &lt.cross_norm);
    Matrix<T> c = attention_forward(layer.cross_attn, heads, normed, memory, cross_layout, lt.cross_attn);
    dropout.apply(c, lt.cross_drop);
    h += c;
    norm_forward(layer.ffn_norm, h, normed, &lt.ffn_norm);
    Matrix<T> f = ffn_forward(layer.ffn, normed, lt.ffn);
    dropout.apply(f, lt.ffn_drop);
    h += f;
  }
  norm_forward(params.decoder_norm, h, tape.final_hidden, &tape.final_norm);
  Matrix<T> logits;
  linear_forward(params.lm_head, tape.final_hidden, logits);
  return logits;
}

// Accumulates parameter gradients and adds the memory gradient into dmemory.
template <class T>
void decoder_backward(const ModelParameters<T>& params, std::span<const TokenId> ids, const Packing& dec,
                      const Packing& enc, const DecoderTape<T>& tape, const Matrix<T>& dlogits,
                      ModelParameters<T>& g, Matrix<T>& dmemory) {
  const int heads = params.config.num_heads;
  const AttentionLayout self_layout{&dec, &dec, true, {}};
  const AttentionLayout cross_layout{&dec, &enc, false, {}};
  Matrix<T> dhidden;
  linear_backward(params.lm_head, tape.final_hidden, dlogits, &g.lm_head, &dhidden);
  Matrix<T> dh = norm_backward(params.decoder_norm, tape.final_norm, dhidden, &g.decoder_norm);
  for (std::size_t l = params.decoder.size(); l-- > 0;) {
    const auto& layer = params.decoder[l];
    const auto& lt = tape.layers[l];
    auto& gl = g.decoder[l];

    Matrix<T> df = dh;
    Dropout<T>::backward(df, lt.ffn_drop);
    Matrix<T> dnormed = ffn_backward(layer.ffn, lt.ffn, df, &gl.ffn);
    dh += norm_backward(layer.ffn_norm, lt.ffn_norm, dnormed, &gl.ffn_norm);

    Matrix<T> dc = dh;
    Dropout<T>::backward(dc, lt.cross_drop);
    Matrix<T> dq, dkv;
    attention_backward(layer.cross_attn, heads, cross_layout, lt.cross_attn, dc, &gl.cross_attn, dq, dkv);
    dmemory += dkv;
    dh += norm_backward(layer.cross_norm, lt.cross_norm, dq, &gl.cross_norm);

    Matrix<T> da = dh;
    Dropout<T>::backward(da, lt.self_drop);
    attention_backward(layer.self_attn, heads, self_layout, lt.self_attn, da, &gl.self_attn, dq, dkv);
    dq += dkv;
    dh += norm_backward(layer.self_norm, lt.self_norm, dq, &gl.self_norm);
  }
  Dropout<T>::backward(dh, tape.embed_drop);
  embed_backward(ids, dh, g.embedding);
}

template <class T>
double head_logit(const LinearParams<T>& head, const Matrix<T>& encoded, int row) {
  return static_cast<double>(encoded.row(row).dot(head.weight.col(0))) + static_cast<double>(head.bias(0, 0));
}

}  // namespace

template <class T>
Matrix<T> encode(const ModelParameters<T>& params, std::span<const TokenId> input_ids,
                 std::span<const std::uint8_t> pad_mask) {
  if (input_ids.empty()) throw DataError("empty input sequence");
  if (!pad_mask.empty() && pad_mask.size() != input_ids.size()) throw DataError("pad mask length mismatch");
  check_ids(params, input_ids);
  Packing packing;
  packing.add(static_cast<int>(input_ids.size()));
  EncoderTape<T> tape;
  return encoder_forward(params, input_ids, packing, pad_mask, Dropout<T>{}, tape);
}

template <class T>
double detect(const ModelParameters<T>& params, const Matrix<T>& encoded, int last_nonpad_index) {
  if (last_nonpad_index < 0 || last_nonpad_index >= encoded.rows()) throw DataError("detect position out of range");
  return sigmoid(head_logit(params.detect_head, encoded, last_nonpad_index));
}

template <class T>
std::vector<double> localize(const ModelParameters<T>& params, const Matrix<T>& encoded,
                             std::span<const int> sep_positions) {
  if (sep_positions.empty()) throw DataError("example has no line sentinels");
  std::vector<double> probs;
  probs.reserve(sep_positions.size());
  for (int p : sep_positions) {
    if (p < 0 || p >= encoded.rows()) throw DataError("sentinel position out of range");
    probs.push_back(sigmoid(head_logit(params.localize_head, encoded, p)));
  }
  return probs;
}

template <class T>
LossBundle compute_losses(const ModelParameters<T>& params, std::span<const TokenizedExample> batch,
                          ObjectiveMask mask, ModelParameters<T>* grads, Rng* dropout_rng) {
  LossBundle losses;
  if (batch.empty() || mask.empty()) return losses;

  std::vector<TokenId> src;
  Packing enc;
  for (const auto& ex : batch) {
    if (ex.input_ids.empty()) throw DataError("empty input sequence");
    src.insert(src.end(), ex.input_ids.begin(), ex.input_ids.end());
    enc.add(static_cast<int>(ex.input_ids.size()));
  }
  check_ids(params, src);
  const Dropout<T> dropout{params.config.dropout, dropout_rng};
  EncoderTape<T> enc_tape;
  const Matrix<T> memory = encoder_forward(params, src, enc, {}, dropout, enc_tape);
  Matrix<T> dmemory;
  if (grads) dmemory = Matrix<T>::Zero(memory.rows(), memory.cols());

  if (mask.detect) {
    const double n = static_cast<double>(batch.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const int row = enc.offset[i] + enc.length[i] - 1;
      const double z = head_logit(params.detect_head, memory, row);
      sum += bce_with_logit(z, batch[i].function_label);
      if (grads) {
        const T dz = static_cast<T>((sigmoid(z) - (batch[i].function_label ? 1.0 : 0.0)) / n);
        grads->detect_head.weight.col(0) += dz * memory.row(row).transpose();
        grads->detect_head.bias(0, 0) += dz;
        dmemory.row(row) += dz * params.detect_head.weight.col(0).transpose();
      }
    }
    losses.detect_loss = sum / n;
  }

  if (mask.localize) {
    std::size_t count = 0;
    for (const auto& ex : batch) count += ex.sep_positions.size();
    if (count > 0) {
      const double n = static_cast<double>(count);
      double sum = 0.0;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& ex = batch[i];
        for (std::size_t j = 0; j < ex.sep_positions.size(); ++j) {
          const int row = enc.offset[i] + ex.sep_positions[j];
          const bool label = ex.line_labels[j] != 0;
          const double z = head_logit(params.localize_head, memory, row);
          sum += bce_with_logit(z, label);
          if (grads) {
            const T dz = static_cast<T>((sigmoid(z) - (label ? 1.0 : 0.0)) / n);
            grads->localize_head.weight.col(0) += dz * memory.row(row).transpose();
            grads->localize_head.bias(0, 0) += dz;
            dmemory.row(row) += dz * params.localize_head.weight.col(0).transpose();
          }
        }
      }
      losses.localize_loss = sum / n;
    }
  }

  if (mask.repair) {
    std::vector<TokenId> dec_in, dec_out;
    Packing dec;
    for (const auto& ex : batch) {
      if (ex.target_ids.size() < 2) throw DataError("repair target shorter than BOS EOS");
      dec_in.insert(dec_in.end(), ex.target_ids.begin(), ex.target_ids.end() - 1);
      dec_out.insert(dec_out.end(), ex.target_ids.begin() + 1, ex.target_ids.end());
      dec.add(static_cast<int>(ex.target_ids.size()) - 1);
    }
    check_ids(params, dec_in);
    check_ids(params, dec_out);
    DecoderTape<T> dec_tape;
    Matrix<T> logits = decoder_forward(params, dec_in, dec, enc, memory, dropout, dec_tape);
    const double n = static_cast<double>(dec.rows);
    double sum = 0.0;
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
      auto row = logits.row(r);
      const T mx = row.maxCoeff();
      double denom = 0.0;
      for (Eigen::Index c = 0; c < row.size(); ++c) denom += std::exp(static_cast<double>(row(c) - mx));
      const double log_z = static_cast<double>(mx) + std::log(denom);
      const TokenId gold = dec_out[static_cast<std::size_t>(r)];
      sum += log_z - static_cast<double>(row(gold));
      if (grads) {
        // Overwrite the row with d(loss)/d(logits) = (softmax - onehot) / n.
        for (Eigen::Index c = 0; c < row.size(); ++c) {
          row(c) = static_cast<T>(std::exp(static_cast<double>(row(c)) - log_z) / n);
        }
        row(gold) -= static_cast<T>(1.0 / n);
      }
    }
    losses.repair_loss = sum / n;
    if (grads) decoder_backward(params, dec_in, dec, enc, dec_tape, logits, *grads, dmemory);
  }

  losses.total = losses.detect_loss + losses.localize_loss + losses.repair_loss;
  if (grads) encoder_backward(params, src, enc, {}, enc_tape, dmemory, *grads);
  return losses;
}

// ---- incremental decoding ----

template <class T>
DecoderSession<T>::DecoderSession(const ModelParameters<T>& params, const Matrix<T>& encoded) : params_(params) {
  for (const auto& layer : params.decoder) {
    Matrix<T> k, v;
    linear_forward(layer.cross_attn.key, encoded, k);
    linear_forward(layer.cross_attn.value, encoded, v);
    cross_keys_.push_back(std::move(k));
    cross_values_.push_back(std::move(v));
  }
}

template <class T>
typename DecoderSession<T>::State DecoderSession<T>::initial() const {
  State s;
  s.self_keys.resize(params_.decoder.size());
  s.self_values.resize(params_.decoder.size());
  return s;
}

namespace {

// Single-query attention of `q` (1 x dim) over `keys`/`values` (n x dim).
template <class K, class V, class T>
Matrix<T> attend_one(const Matrix<T>& q, const K& keys, const V& values, int heads) {
  const int dim = static_cast<int>(q.cols());
  const int hd = dim / heads;
  const T scale = static_cast<T>(1.0 / std::sqrt(static_cast<double>(hd)));
  Matrix<T> context(1, dim);
  for (int h = 0; h < heads; ++h) {
    Matrix<T> score = q.block(0, h * hd, 1, hd) * keys.block(0, h * hd, keys.rows(), hd).transpose();
    score *= scale;
    const T mx = score.maxCoeff();
    score = (score.array() - mx).exp();
    score /= score.sum();
    context.block(0, h * hd, 1, hd).noalias() = score * values.block(0, h * hd, values.rows(), hd);
  }
  return context;
}

}  // namespace

template <class T>
std::vector<double> DecoderSession<T>::step(State& state, TokenId token) const {
  const int dim = params_.config.model_dim;
  const int heads = params_.config.num_heads;
  if (token < 0 || token >= params_.config.vocab_size) throw DataError("token id outside vocabulary");
  const int pos = state.length;
  Matrix<T> h = params_.embedding.row(token) + positional_table<T>(pos + 1, dim).row(pos);
  Matrix<T> normed, q, k, v, out;
  for (std::size_t l = 0; l < params_.decoder.size(); ++l) {
    const auto& layer = params_.decoder[l];
    norm_forward(layer.self_norm, h, normed, static_cast<NormTape<T>*>(nullptr));
    linear_forward(layer.self_attn.query, normed, q);
    linear_forward(layer.self_attn.key, normed, k);
    linear_forward(layer.self_attn.value, normed, v);
    auto& kc = state.self_keys[l];
    auto& vc = state.self_values[l];
    kc.insert(kc.end(), k.data(), k.data() + dim);
    vc.insert(vc.end(), v.data(), v.data() + dim);
    using Rows = Eigen::Map<const Matrix<T>>;
    const Rows keys(kc.data(), pos + 1, dim);
    const Rows values(vc.data(), pos + 1, dim);
    linear_forward(layer.self_attn.output, attend_one(q, keys, values, heads), out);
    h += out;

    norm_forward(layer.cross_norm, h, normed, static_cast<NormTape<T>*>(nullptr));
    linear_forward(layer.cross_attn.query, normed, q);
    linear_forward(layer.cross_attn.output, attend_one(q, cross_keys_[l], cross_values_[l], heads), out);
    h += out;

    norm_forward(layer.ffn_norm, h, normed, static_cast<NormTape<T>*>(nullptr));
    Matrix<T> pre;
    linear_forward(layer.ffn.expand, normed, pre);
    pre = pre.unaryExpr([](T x) { return gelu(x); });
    linear_forward(layer.ffn.contract, pre, out);
    h += out;
  }
  norm_forward(params_.decoder_norm, h, normed, static_cast<NormTape<T>*>(nullptr));
  Matrix<T> logits;
  linear_forward(params_.lm_head, normed, logits);
  state.length = pos + 1;

  std::vector<double> logp(static_cast<std::size_t>(logits.cols()));
  const double mx = static_cast<double>(logits.maxCoeff());
  double denom = 0.0;
  for (Eigen::Index c = 0; c < logits.cols(); ++c) denom += std::exp(static_cast<double>(logits(0, c)) - mx);
  const double log_z = mx + std::log(denom);
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    logp[static_cast<std::size_t>(c)] = static_cast<double>(logits(0, c)) - log_z;
  }
  return logp;
}

template <class T>
std::vector<TokenId> greedy_decode(const ModelParameters<T>& params, const Matrix<T>& encoded, int max_len) {
  DecoderSession<T> session(params, encoded);
  auto state = session.initial();
  std::vector<TokenId> out;
  TokenId token = Tokenizer::kBos;
  while (static_cast<int>(out.size()) < max_len) {
    const auto logp = session.step(state, token);
    token = static_cast<TokenId>(std::max_element(logp.begin(), logp.end()) - logp.begin());
    out.push_back(token);
    if (token == Tokenizer::kEos) break;
  }
  return out;
}

#define DLR_INSTANTIATE(T)                                                                                  \
  template Matrix<T> encode(const ModelParameters<T>&, std::span<const TokenId>, std::span<const std::uint8_t>); \
  template double detect(const ModelParameters<T>&, const Matrix<T>&, int);                                 \
  template std::vector<double> localize(const ModelParameters<T>&, const Matrix<T>&, std::span<const int>);  \
  template LossBundle compute_losses(const ModelParameters<T>&, std::span<const TokenizedExample>,           \
                                     ObjectiveMask, ModelParameters<T>*, Rng*);                              \
  template class DecoderSession<T>;                                                                         \
  template std::vector<TokenId> greedy_decode(const ModelParameters<T>&, const Matrix<T>&, int);

DLR_INSTANTIATE(float)
DLR_INSTANTIATE(double)

#undef DLR_INSTANTIATE

}  // namespace dlr::model
