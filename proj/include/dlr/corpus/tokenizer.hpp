#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

namespace dlr {

using TokenId = std::int32_t;

// Byte-level BPE tokenizer with five reserved ids. Every byte has a base
// token, so encode/decode is lossless for arbitrary input. The sentinel text
// " [SEP]" always maps to the single reserved SEP id.
class Tokenizer {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kBos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr TokenId kSep = 4;
  static constexpr int kNumReserved = 5;
  static constexpr int kBaseSize = kNumReserved + 256;

  // Tokenizer with no merges.
  Tokenizer();

  std::vector<TokenId> encode(std::string_view text) const;

  // Reserved PAD/BOS/EOS/UNK ids are dropped; SEP decodes to its surface text.
  std::string decode(std::span<const TokenId> ids) const;

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token_bytes(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  const std::vector<std::pair<TokenId, TokenId>>& merges() const { return merges_; }
  static bool is_reserved(TokenId id) { return id >= 0 && id < kNumReserved; }

  nlohmann::json to_json() const;
  static Tokenizer from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Tokenizer load(const std::filesystem::path& path);

  // Appends one merge rule; used by training and loading.
  void add_merge(TokenId left, TokenId right);
  TokenId merge_result(TokenId left, TokenId right) const {
    return merge_index_.at(pair_key(left, right)).result;
  }

 private:
  static std::uint64_t pair_key(TokenId a, TokenId b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
  }
  void encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const;

  struct MergeInfo {
    int rank;
    TokenId result;
  };

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<std::pair<TokenId, TokenId>> merges_;
  std::unordered_map<std::uint64_t, MergeInfo> merge_index_;
};

// Splits text into the pre-tokenization chunks that BPE merges never cross.
std::vector<std::string_view> pretokenize(std::string_view text);

// Learns merges until the vocabulary holds vocab_size entries or no
// adjacent pair remains. Pairs are chosen by descending corpus frequency,
// ties broken by the lexicographic order of (left bytes, right bytes).
Tokenizer train_tokenizer(std::span<const std::string> corpus, int vocab_size);

}  // namespace dlr
