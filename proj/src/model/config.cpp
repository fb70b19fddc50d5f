#include "dlr/model/config.hpp"

#include "dlr/common/error.hpp"

namespace dlr::model {

void ModelConfig::validate() const {
  if (vocab_size <= 0) throw UsageError("vocab_size must be positive");
  if (model_dim <= 0 || num_heads <= 0 || ffn_dim <= 0) throw UsageError("model dimensions must be positive");
  if (num_encoder_layers <= 0 || num_decoder_layers <= 0) throw UsageError("layer counts must be positive");
  if (model_dim % num_heads != 0) throw UsageError("model_dim must be divisible by num_heads");
  if (max_source_len <= 2 || max_target_len <= 1) throw UsageError("sequence limits too small");
  if (dropout < 0.0 || dropout >= 1.0) throw UsageError("dropout must lie in [0, 1)");
}

nlohmann::json ModelConfig::to_json() const {
  return {{"vocab_size", vocab_size},
          {"model_dim", model_dim},
          {"num_heads", num_heads},
          {"ffn_dim", ffn_dim},
          {"num_encoder_layers", num_encoder_layers},
          {"num_decoder_layers", num_decoder_layers},
          {"max_source_len", max_source_len},
          {"max_target_len", max_target_len},
          {"dropout", dropout},
          {"seed", seed}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j, ModelConfig base) {
  try {
    auto get = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("vocab_size", base.vocab_size);
    get("model_dim", base.model_dim);
    get("num_heads", base.num_heads);
    get("ffn_dim", base.ffn_dim);
    get("num_encoder_layers", base.num_encoder_layers);
    get("num_decoder_layers", base.num_decoder_layers);
    get("max_source_len", base.max_source_len);
    get("max_target_len", base.max_target_len);
    get("dropout", base.dropout);
    get("seed", base.seed);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("model config: ") + e.what());
  }
  return base;
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) { return from_json(j, ModelConfig{}); }

std::string ObjectiveMask::to_string() const {
  std::string s;
  if (detect) s += 'D';
  if (localize) s += 'L';
  if (repair) s += 'R';
  return s;
}

ObjectiveMask ObjectiveMask::parse(std::string_view letters) {
  ObjectiveMask m{false, false, false};
  for (char c : letters) {
    switch (c) {
      case 'D': case 'd': m.detect = true; break;
      case 'L': case 'l': m.localize = true; break;
      case 'R': case 'r': m.repair = true; break;
      default: throw UsageError("objective mask may only contain D, L and R");
    }
  }
  if (m.empty()) throw UsageError("objective mask must not be empty");
  return m;
}

}  // namespace dlr::model
