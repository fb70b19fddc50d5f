#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dlr::model {

struct ModelConfig {
  int vocab_size = 0;
  int model_dim = 256;
  int num_heads = 4;
  int ffn_dim = 1024;
  int num_encoder_layers = 4;
  int num_decoder_layers = 4;
  int max_source_len = 512;
  int max_target_len = 512;
  double dropout = 0.0;
  std::uint64_t seed = 0;

  int head_dim() const { return model_dim / num_heads; }

  // Throws UsageError when dimensions are inconsistent.
  void validate() const;

  nlohmann::json to_json() const;
  // Fields missing from `j` keep their value from `base`.
  static ModelConfig from_json(const nlohmann::json& j, ModelConfig base);
  static ModelConfig from_json(const nlohmann::json& j);

  bool operator==(const ModelConfig&) const = default;
};

// Subset of {detect, localize, repair} losses that are switched on.
struct ObjectiveMask {
  bool detect = true;
  bool localize = true;
  bool repair = true;

  bool empty() const { return !detect && !localize && !repair; }
  bool needs_decoder() const { return repair; }

  // "D", "L", "R", "DL", ..., "DLR".
  std::string to_string() const;
  static ObjectiveMask parse(std::string_view letters);

  static ObjectiveMask all() { return {true, true, true}; }
  static ObjectiveMask only_detect() { return {true, false, false}; }
  static ObjectiveMask only_localize() { return {false, true, false}; }
  static ObjectiveMask only_repair() { return {false, false, true}; }

  bool operator==(const ObjectiveMask&) const = default;
};

}  // namespace dlr::model
