#include "dlr/model/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "dlr/common/error.hpp"

namespace dlr::model {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'R', 'C', 'K', 'P', 'T', '1'};

void write_tensors(std::ostream& out, const ModelParameters<float>& p) {
  visit_tensors(p, [&out](const std::string&, const Matrix<float>& m) {
    out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
  });
}

void read_tensors(std::istream& in, ModelParameters<float>& p, const std::string& what) {
  visit_tensors(p, [&](const std::string& name, Matrix<float>& m) {
    in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(float)));
    if (!in) throw DataError("checkpoint truncated in " + what + " tensor " + name);
  });
}

}  // namespace

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  const bool has_moments = checkpoint.first_moment.has_value() && checkpoint.second_moment.has_value();
  nlohmann::json tensors = nlohmann::json::array();
  visit_tensors(checkpoint.params, [&tensors](const std::string& name, const Matrix<float>& m) {
    tensors.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}});
  });
  nlohmann::json header = {{"format_version", kCheckpointFormatVersion},
                           {"model_config", checkpoint.params.config.to_json()},
                           {"tensors", tensors},
                           {"has_optimizer_moments", has_moments},
                           {"train_state", checkpoint.train_state}};
  if (checkpoint.tokenizer) header["tokenizer"] = checkpoint.tokenizer->to_json();
  const std::string text = header.dump();

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint: " + path.string());
    out.write(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_tensors(out, checkpoint.params);
    if (has_moments) {
      write_tensors(out, *checkpoint.first_moment);
      write_tensors(out, *checkpoint.second_moment);
    }
    if (!out) throw DataError("failed writing checkpoint: " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw DataError("not a checkpoint file: " + path.string());
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1ull << 32)) throw DataError("corrupt checkpoint header");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("checkpoint header truncated");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("checkpoint header is not valid JSON: ") + e.what());
  }
  if (!header.contains("format_version")) throw DataError("checkpoint missing format_version");
  if (header["format_version"] != kCheckpointFormatVersion) {
    throw DataError("unsupported checkpoint format_version " + header["format_version"].dump());
  }

  Checkpoint ck;
  const ModelConfig config = ModelConfig::from_json(header.at("model_config"));
  ck.params = ModelParameters<float>::zeros(config);

  const auto& tensors = header.at("tensors");
  std::size_t i = 0;
  visit_tensors(ck.params, [&](const std::string& name, const Matrix<float>& m) {
    if (i >= tensors.size() || tensors[i].at("name") != name ||
        tensors[i].at("shape")[0].get<Eigen::Index>() != m.rows() ||
        tensors[i].at("shape")[1].get<Eigen::Index>() != m.cols()) {
      throw DataError("checkpoint tensor layout does not match config at " + name);
    }
    ++i;
  });
  if (i != tensors.size()) throw DataError("checkpoint has unexpected extra tensors");

  read_tensors(in, ck.params, "parameter");
  if (header.value("has_optimizer_moments", false)) {
    ck.first_moment = ModelParameters<float>::zeros(config);
    ck.second_moment = ModelParameters<float>::zeros(config);
    read_tensors(in, *ck.first_moment, "first moment");
    read_tensors(in, *ck.second_moment, "second moment");
  }
  ck.train_state = header.value("train_state", nlohmann::json::object());
  if (header.contains("tokenizer")) ck.tokenizer = Tokenizer::from_json(header["tokenizer"]);
  if (!ck.params.all_finite()) throw DataError("checkpoint contains non-finite parameters");
  return ck;
}

}  // namespace dlr::model
