#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "dlr/corpus/tokenizer.hpp"
#include "dlr/model/parameters.hpp"

namespace dlr::model {

inline constexpr int kCheckpointFormatVersion = 1;

// Everything needed to run a trained model or to resume its training.
// The layout on disk is the 8-byte magic "DLRCKPT1", a little-endian u64
// header length, a JSON header (format version, model config, tensor names
// and shapes, training state, tokenizer), then raw float32 tensor data for
// the parameters followed by the optimizer moments when present.
struct Checkpoint {
  ModelParameters<float> params;
  std::optional<ModelParameters<float>> first_moment;
  std::optional<ModelParameters<float>> second_moment;
  nlohmann::json train_state = nlohmann::json::object();
  std::optional<Tokenizer> tokenizer;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
// Throws DataError on a malformed or incompatible file.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dlr::model
