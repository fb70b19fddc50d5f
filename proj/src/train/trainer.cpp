#include "dlr/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dlr/common/error.hpp"
#include "dlr/eval/metrics.hpp"
#include "dlr/model/predictor.hpp"

namespace dlr::train {

using model::LossBundle;
using model::Matrix;
using model::ModelParameters;

void TrainConfig::validate() const {
  if (mask.empty()) throw UsageError("objective mask must enable at least one loss");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw UsageError("learning rate must be positive");
  if (batch_size <= 0) throw UsageError("batch size must be positive");
  if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1) throw UsageError("Adam betas must lie in [0, 1)");
  if (epsilon <= 0) throw UsageError("Adam epsilon must be positive");
  if (max_steps < 0 || warmup_steps < 0) throw UsageError("step counts must be non-negative");
  if (eval_interval <= 0) throw UsageError("validation interval must be positive");
  if (clip_norm < 0) throw UsageError("clip norm must be non-negative");
}

nlohmann::json TrainConfig::to_json() const {
  nlohmann::json j = {{"objectives", mask.to_string()},
                      {"batch_size", batch_size},
                      {"learning_rate", learning_rate},
                      {"beta1", beta1},
                      {"beta2", beta2},
                      {"epsilon", epsilon},
                      {"warmup_steps", warmup_steps},
                      {"max_steps", max_steps},
                      {"eval_interval", eval_interval},
                      {"patience", patience},
                      {"clip_norm", clip_norm},
                      {"seed", seed}};
  j["target_score"] = target_score ? nlohmann::json(*target_score) : nlohmann::json(nullptr);
  return j;
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j, TrainConfig base) {
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    if (j.contains("objectives")) base.mask = model::ObjectiveMask::parse(j.at("objectives").get<std::string>());
    get("batch_size", base.batch_size);
    get("learning_rate", base.learning_rate);
    get("beta1", base.beta1);
    get("beta2", base.beta2);
    get("epsilon", base.epsilon);
    get("warmup_steps", base.warmup_steps);
    get("max_steps", base.max_steps);
    get("eval_interval", base.eval_interval);
    get("patience", base.patience);
    get("clip_norm", base.clip_norm);
    get("seed", base.seed);
    if (j.contains("target_score")) {
      base.target_score = j["target_score"].is_null() ? std::nullopt
                                                      : std::optional<double>(j["target_score"].get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("train config: ") + e.what());
  }
  return base;
}

TrainState TrainState::fresh(const model::ModelConfig& config, const TrainConfig& train) {
  TrainState s;
  s.params = ModelParameters<float>::initialized(config);
  s.first_moment = ModelParameters<float>::zeros(config);
  s.second_moment = ModelParameters<float>::zeros(config);
  s.rng = Rng(train.seed);
  return s;
}

model::Checkpoint TrainState::to_checkpoint(const TrainConfig& train) const {
  model::Checkpoint ck;
  ck.params = params;
  ck.first_moment = first_moment;
  ck.second_moment = second_moment;
  ck.train_state = {{"step", step},
                    {"best_score", best_score},
                    {"bad_validations", bad_validations},
                    {"rng", rng.state()},
                    {"order", order},
                    {"cursor", cursor},
                    {"train_config", train.to_json()}};
  return ck;
}

TrainState TrainState::from_checkpoint(const model::Checkpoint& ck) {
  if (!ck.first_moment || !ck.second_moment) throw DataError("checkpoint has no optimizer state to resume from");
  TrainState s;
  s.params = ck.params;
  s.first_moment = *ck.first_moment;
  s.second_moment = *ck.second_moment;
  try {
    const auto& t = ck.train_state;
    s.step = t.at("step").get<std::int64_t>();
    s.best_score = t.at("best_score").get<double>();
    s.bad_validations = t.at("bad_validations").get<int>();
    s.rng.restore(t.at("rng").get<std::string>());
    s.order = t.at("order").get<std::vector<std::size_t>>();
    s.cursor = t.at("cursor").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint training state: ") + e.what());
  }
  return s;
}

double learning_rate_at(const TrainConfig& config, std::int64_t step) {
  if (config.warmup_steps <= 0) return config.learning_rate;
  const double ramp = static_cast<double>(step + 1) / static_cast<double>(config.warmup_steps);
  return config.learning_rate * std::min(1.0, ramp);
}

LossBundle train_step(TrainState& state, std::span<const TokenizedExample> batch, const TrainConfig& config) {
  auto grads = ModelParameters<float>::zeros(state.params.config);
  const LossBundle losses = model::compute_losses(state.params, batch, config.mask, &grads, &state.rng);
  const auto where = " at step " + std::to_string(state.step);
  if (!std::isfinite(losses.detect_loss)) throw NumericError("non-finite detect loss" + where);
  if (!std::isfinite(losses.localize_loss)) throw NumericError("non-finite localize loss" + where);
  if (!std::isfinite(losses.repair_loss)) throw NumericError("non-finite repair loss" + where);

  double norm_sq = 0.0;
  model::visit_tensors(grads, [&norm_sq](const std::string&, const Matrix<float>& g) {
    norm_sq += g.template cast<double>().squaredNorm();
  });
  if (!std::isfinite(norm_sq)) throw NumericError("non-finite gradient" + where);
  const double norm = std::sqrt(norm_sq);
  const float scale = config.clip_norm > 0 && norm > config.clip_norm ? static_cast<float>(config.clip_norm / norm) : 1.0f;

  const double t = static_cast<double>(state.step + 1);
  const float lr = static_cast<float>(learning_rate_at(config, state.step));
  const float b1 = static_cast<float>(config.beta1);
  const float b2 = static_cast<float>(config.beta2);
  const float correction1 = static_cast<float>(1.0 - std::pow(config.beta1, t));
  const float correction2 = static_cast<float>(1.0 - std::pow(config.beta2, t));
  const float eps = static_cast<float>(config.epsilon);

  std::vector<Matrix<float>*> m_list, v_list, g_list;
  model::visit_tensors(state.first_moment, [&](const std::string&, Matrix<float>& m) { m_list.push_back(&m); });
  model::visit_tensors(state.second_moment, [&](const std::string&, Matrix<float>& m) { v_list.push_back(&m); });
  model::visit_tensors(grads, [&](const std::string&, Matrix<float>& m) { g_list.push_back(&m); });
  std::size_t i = 0;
  model::visit_tensors(state.params, [&](const std::string&, Matrix<float>& p) {
    auto g = g_list[i]->array() * scale;
    auto& m = *m_list[i];
    auto& v = *v_list[i];
    m.array() = b1 * m.array() + (1.0f - b1) * g;
    v.array() = b2 * v.array() + (1.0f - b2) * g.square();
    p.array() -= lr * (m.array() / correction1) / ((v.array() / correction2).sqrt() + eps);
    ++i;
  });
  ++state.step;
  return losses;
}

std::vector<std::size_t> next_batch(TrainState& state, std::size_t dataset_size, int batch_size) {
  if (dataset_size == 0) throw UsageError("cannot draw a batch from an empty dataset");
  if (state.order.size() != dataset_size) {
    state.order.resize(dataset_size);
    std::iota(state.order.begin(), state.order.end(), std::size_t{0});
    state.rng.shuffle(state.order);
    state.cursor = 0;
  }
  std::vector<std::size_t> batch;
  for (int b = 0; b < batch_size; ++b) {
    if (state.cursor >= dataset_size) {
      state.rng.shuffle(state.order);
      state.cursor = 0;
    }
    batch.push_back(state.order[state.cursor++]);
  }
  return batch;
}

nlohmann::json ValidationMetrics::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  return {{"detect_f1", opt(detect_f1)}, {"localize_top1", opt(localize_top1)}, {"repair_em", opt(repair_em)},
          {"score", score}};
}

ValidationMetrics validate_model(const ModelParameters<float>& params, std::span<const TokenizedExample> val,
                                 model::ObjectiveMask mask) {
  std::vector<bool> predicted, labels;
  std::vector<std::vector<int>> rankings, buggy_sets;
  std::size_t repairs = 0, exact = 0;
  for (const auto& ex : val) {
    const Matrix<float> encoded = model::encode(params, ex.input_ids);
    if (mask.detect) {
      predicted.push_back(model::is_buggy(model::detect(params, encoded, ex.last_position())));
      labels.push_back(ex.function_label);
    }
    if (!ex.function_label) continue;
    if (mask.localize) {
      rankings.push_back(model::rank_lines(model::localize(params, encoded, ex.sep_positions)));
      std::vector<int> buggy;
      for (std::size_t l = 0; l < ex.line_labels.size(); ++l) {
        if (ex.line_labels[l]) buggy.push_back(static_cast<int>(l));
      }
      buggy_sets.push_back(std::move(buggy));
    }
    if (mask.repair) {
      const int limit = std::min(params.config.max_target_len - 1, 3 * static_cast<int>(ex.input_ids.size()) / 2 + 16);
      auto decoded = model::greedy_decode(params, encoded, limit);
      if (!decoded.empty() && decoded.back() == Tokenizer::kEos) decoded.pop_back();
      const std::vector<TokenId> reference(ex.target_ids.begin() + 1, ex.target_ids.end() - 1);
      ++repairs;
      if (decoded == reference) ++exact;
    }
  }
  ValidationMetrics m;
  std::vector<double> parts;
  if (mask.detect && !labels.empty()) {
    m.detect_f1 = eval::detection_metrics(predicted, labels).f1;
    parts.push_back(*m.detect_f1);
  }
  if (mask.localize && !rankings.empty()) {
    m.localize_top1 = eval::localization_metrics(rankings, buggy_sets, 1).mrr;
    parts.push_back(*m.localize_top1);
  }
  if (mask.repair && repairs > 0) {
    m.repair_em = static_cast<double>(exact) / static_cast<double>(repairs);
    parts.push_back(*m.repair_em);
  }
  if (!parts.empty()) m.score = std::accumulate(parts.begin(), parts.end(), 0.0) / static_cast<double>(parts.size());
  return m;
}

namespace {

nlohmann::json losses_json(const LossBundle& l) {
  return {{"detect", l.detect_loss}, {"localize", l.localize_loss}, {"repair", l.repair_loss}, {"total", l.total}};
}

}  // namespace

FitResult fit(const TrainConfig& config, TrainState state, std::span<const TokenizedExample> train_set,
              std::span<const TokenizedExample> val_set, const FitOptions& options) {
  config.validate();
  if (train_set.empty()) throw UsageError("training set is empty");
  if (val_set.empty()) throw UsageError("validation set is empty");

  FitResult result;
  auto snapshot = [&] {
    auto ck = state.to_checkpoint(config);
    ck.tokenizer = options.tokenizer;
    return ck;
  };
  result.best = snapshot();
  LossBundle last;
  bool validated_at_end = false;

  while (state.step < config.max_steps) {
    const auto indices = next_batch(state, train_set.size(), config.batch_size);
    std::vector<TokenizedExample> batch;
    batch.reserve(indices.size());
    for (auto i : indices) batch.push_back(train_set[i]);
    last = train_step(state, batch, config);
    result.step_losses.push_back(last);
    if (options.on_step) options.on_step(last, state.step);

    validated_at_end = false;
    if (state.step % config.eval_interval != 0 && state.step != config.max_steps) continue;
    validated_at_end = true;

    ValidationRecord record{state.step, last, validate_model(state.params, val_set, config.mask)};
    result.history.push_back(record);
    if (options.log) {
      *options.log << nlohmann::json{{"step", record.step},
                                     {"losses", losses_json(record.losses)},
                                     {"val_metrics", record.metrics.to_json()}}
                          .dump()
                   << '\n';
      options.log->flush();
    }
    const bool improved = record.metrics.score > state.best_score;
    if (improved) {
      state.best_score = record.metrics.score;
      state.bad_validations = 0;
      result.best = snapshot();
    } else {
      ++state.bad_validations;
    }
    if (options.last_checkpoint) model::save_checkpoint(snapshot(), *options.last_checkpoint);
    if (config.target_score && state.best_score >= *config.target_score) {
      result.stop_reason = "target score reached";
      break;
    }
    if (config.patience >= 0 && state.bad_validations > config.patience) {
      result.stop_reason = "no improvement within patience";
      break;
    }
  }
  if (!validated_at_end && result.history.empty()) {
    // No step was taken; score the starting point so `best` is meaningful.
    ValidationRecord record{state.step, last, validate_model(state.params, val_set, config.mask)};
    result.history.push_back(record);
    if (record.metrics.score > state.best_score) state.best_score = record.metrics.score;
    result.best = snapshot();
  }
  if (result.stop_reason.empty()) result.stop_reason = "max steps";
  result.steps = state.step;
  return result;
}

FitResult fit(const TrainConfig& config, const model::ModelConfig& model_config,
              std::span<const TokenizedExample> train_set, std::span<const TokenizedExample> val_set,
              const FitOptions& options) {
  return fit(config, TrainState::fresh(model_config, config), train_set, val_set, options);
}

}  // namespace dlr::train
