#include "dlr/corpus/tokenizer.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <map>

#include "dlr/common/error.hpp"
#include "dlr/corpus/sentinel.hpp"

namespace dlr {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }
bool is_space_char(unsigned char c) { return std::isspace(c) != 0; }

// Printable stand-ins for raw bytes so token strings are valid UTF-8 in JSON.
const std::array<std::string, 256>& byte_to_unicode() {
  static const std::array<std::string, 256> table = [] {
    std::array<std::string, 256> t;
    auto printable = [](int b) {
      return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      const std::uint32_t cp = printable(b) ? static_cast<std::uint32_t>(b) : 256u + extra++;
      std::string s;
      if (cp < 0x80) {
        s.push_back(static_cast<char>(cp));
      } else {
        s.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        s.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
      }
      t[static_cast<std::size_t>(b)] = s;
    }
    return t;
  }();
  return table;
}

std::string bytes_to_display(const std::string& bytes) {
  const auto& table = byte_to_unicode();
  std::string out;
  for (unsigned char c : bytes) out += table[c];
  return out;
}

std::string display_to_bytes(const std::string& display) {
  static const std::map<std::string, unsigned char> reverse = [] {
    std::map<std::string, unsigned char> m;
    const auto& table = byte_to_unicode();
    for (int b = 0; b < 256; ++b) m[table[static_cast<std::size_t>(b)]] = static_cast<unsigned char>(b);
    return m;
  }();
  std::string out;
  std::size_t i = 0;
  while (i < display.size()) {
    const auto lead = static_cast<unsigned char>(display[i]);
    const std::size_t len = lead < 0x80 ? 1 : 2;
    const auto it = reverse.find(display.substr(i, len));
    if (it == reverse.end()) throw DataError("tokenizer file: invalid token text");
    out.push_back(static_cast<char>(it->second));
    i += len;
  }
  return out;
}

// Calls fn(piece, is_sentinel) for each run of text and each sentinel.
template <class Fn>
void for_each_segment(std::string_view text, Fn&& fn) {
  while (!text.empty()) {
    const auto pos = text.find(kSentinelText);
    if (pos == std::string_view::npos) {
      fn(text, false);
      return;
    }
    if (pos > 0) fn(text.substr(0, pos), false);
    fn(text.substr(pos, kSentinelText.size()), true);
    text.remove_prefix(pos + kSentinelText.size());
  }
}

constexpr std::array<const char*, Tokenizer::kNumReserved> kReservedNames = {
    "<pad>", "<s>", "</s>", "<unk>", "[SEP]"};

}  // namespace

std::vector<std::string_view> pretokenize(std::string_view text) {
  std::vector<std::string_view> chunks;
  const auto at = [&](std::size_t k) { return static_cast<unsigned char>(text[k]); };
  std::size_t i = 0;
  while (i < text.size()) {
    if (is_space_char(at(i))) {
      std::size_t j = i;
      while (j < text.size() && is_space_char(at(j))) ++j;
      // A single space right before a non-space chunk is kept as its prefix.
      const bool keep_prefix = j < text.size() && text[j - 1] == ' ';
      const std::size_t run_end = keep_prefix ? j - 1 : j;
      if (run_end > i) chunks.push_back(text.substr(i, run_end - i));
      i = run_end;
      if (!keep_prefix) continue;
    }
    const std::size_t start = i;
    if (text[i] == ' ') ++i;
    if (is_word_char(at(i))) {
      while (i < text.size() && is_word_char(at(i))) ++i;
    } else {
      while (i < text.size() && !is_word_char(at(i)) && !is_space_char(at(i))) ++i;
    }
    chunks.push_back(text.substr(start, i - start));
  }
  return chunks;
}

Tokenizer::Tokenizer() {
  tokens_.reserve(kBaseSize);
  for (int r = 0; r < kNumReserved; ++r) tokens_.emplace_back(kReservedNames[static_cast<std::size_t>(r)]);
  tokens_[kSep] = std::string(kSentinelText);
  for (int b = 0; b < 256; ++b) {
    tokens_.emplace_back(1, static_cast<char>(b));
    ids_.emplace(tokens_.back(), static_cast<TokenId>(tokens_.size() - 1));
  }
}

void Tokenizer::add_merge(TokenId left, TokenId right) {
  if (left < kNumReserved || right < kNumReserved || left >= size() || right >= size()) {
    throw DataError("merge refers to an invalid token id");
  }
  std::string merged = tokens_[static_cast<std::size_t>(left)] + tokens_[static_cast<std::size_t>(right)];
  TokenId result;
  if (auto it = ids_.find(merged); it != ids_.end()) {
    result = it->second;
  } else {
    result = static_cast<TokenId>(tokens_.size());
    tokens_.push_back(merged);
    ids_.emplace(std::move(merged), result);
  }
  merge_index_.emplace(pair_key(left, right), MergeInfo{static_cast<int>(merges_.size()), result});
  merges_.emplace_back(left, right);
}

void Tokenizer::encode_chunk(std::string_view chunk, std::vector<TokenId>& out) const {
  std::vector<TokenId> symbols;
  symbols.reserve(chunk.size());
  for (unsigned char c : chunk) symbols.push_back(static_cast<TokenId>(kNumReserved + c));
  while (symbols.size() > 1) {
    int best_rank = -1;
    TokenId best_left = 0, best_right = 0, best_result = 0;
    for (std::size_t i = 0; i + 1 < symbols.size(); ++i) {
      const auto it = merge_index_.find(pair_key(symbols[i], symbols[i + 1]));
      if (it != merge_index_.end() && (best_rank < 0 || it->second.rank < best_rank)) {
        best_rank = it->second.rank;
        best_left = symbols[i];
        best_right = symbols[i + 1];
        best_result = it->second.result;
      }
    }
    if (best_rank < 0) break;
    std::vector<TokenId> next;
    next.reserve(symbols.size());
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i + 1 < symbols.size() && symbols[i] == best_left && symbols[i + 1] == best_right) {
        next.push_back(best_result);
        ++i;
      } else {
        next.push_back(symbols[i]);
      }
    }
    symbols.swap(next);
  }
  out.insert(out.end(), symbols.begin(), symbols.end());
}

std::vector<TokenId> Tokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for_each_segment(text, [&](std::string_view piece, bool sentinel) {
    if (sentinel) {
      out.push_back(kSep);
      return;
    }
    for (auto chunk : pretokenize(piece)) encode_chunk(chunk, out);
  });
  return out;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id < 0 || id >= size()) throw DataError("decode: token id out of range");
    if (id == kSep) {
      out += kSentinelText;
    } else if (!is_reserved(id)) {
      out += tokens_[static_cast<std::size_t>(id)];
    }
  }
  return out;
}

nlohmann::json Tokenizer::to_json() const {
  nlohmann::json vocab = nlohmann::json::object();
  for (int id = kNumReserved; id < size(); ++id) {
    vocab[bytes_to_display(tokens_[static_cast<std::size_t>(id)])] = id;
  }
  nlohmann::json merges = nlohmann::json::array();
  for (const auto& [a, b] : merges_) {
    merges.push_back({bytes_to_display(tokens_[static_cast<std::size_t>(a)]),
                      bytes_to_display(tokens_[static_cast<std::size_t>(b)])});
  }
  nlohmann::json reserved = nlohmann::json::object();
  for (int r = 0; r < kNumReserved; ++r) reserved[kReservedNames[static_cast<std::size_t>(r)]] = r;
  return {{"vocab", vocab}, {"merges", merges}, {"reserved", reserved}};
}

Tokenizer Tokenizer::from_json(const nlohmann::json& j) {
  for (const char* field : {"vocab", "merges", "reserved"}) {
    if (!j.contains(field)) throw DataError(std::string("tokenizer file: missing field: ") + field);
  }
  const auto& reserved = j.at("reserved");
  for (int r = 0; r < kNumReserved; ++r) {
    const char* name = kReservedNames[static_cast<std::size_t>(r)];
    if (!reserved.contains(name) || reserved.at(name).get<int>() != r) {
      throw DataError(std::string("tokenizer file: unexpected reserved id for ") + name);
    }
  }
  Tokenizer tok;
  for (const auto& m : j.at("merges")) {
    if (!m.is_array() || m.size() != 2) throw DataError("tokenizer file: malformed merge");
    const auto left = tok.ids_.find(display_to_bytes(m[0].get<std::string>()));
    const auto right = tok.ids_.find(display_to_bytes(m[1].get<std::string>()));
    if (left == tok.ids_.end() || right == tok.ids_.end()) {
      throw DataError("tokenizer file: merge refers to unknown token");
    }
    tok.add_merge(left->second, right->second);
  }
  const auto& vocab = j.at("vocab");
  if (static_cast<int>(vocab.size()) != tok.size() - kNumReserved) {
    throw DataError("tokenizer file: vocab size does not match merges");
  }
  for (auto it = vocab.begin(); it != vocab.end(); ++it) {
    const auto found = tok.ids_.find(display_to_bytes(it.key()));
    if (found == tok.ids_.end() || found->second != it.value().get<TokenId>()) {
      throw DataError("tokenizer file: vocab entry inconsistent with merges: " + it.key());
    }
  }
  return tok;
}

void Tokenizer::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << to_json().dump() << '\n';
}

Tokenizer Tokenizer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("tokenizer file " + path.string() + ": " + e.what());
  }
}

Tokenizer train_tokenizer(std::span<const std::string> corpus, int vocab_size) {
  if (corpus.empty()) throw DataError("cannot train a tokenizer on an empty corpus");
  if (vocab_size < Tokenizer::kBaseSize) {
    throw UsageError("vocab_size must be at least " + std::to_string(Tokenizer::kBaseSize));
  }
  Tokenizer tok;

  std::map<std::string_view, long> chunk_counts;
  for (const auto& doc : corpus) {
    for_each_segment(doc, [&](std::string_view piece, bool sentinel) {
      if (sentinel) return;
      for (auto chunk : pretokenize(piece)) ++chunk_counts[chunk];
    });
  }
  struct Word {
    std::vector<TokenId> symbols;
    long count;
  };
  std::vector<Word> words;
  words.reserve(chunk_counts.size());
  for (const auto& [chunk, count] : chunk_counts) {
    Word w{{}, count};
    for (unsigned char c : chunk) w.symbols.push_back(static_cast<TokenId>(Tokenizer::kNumReserved + c));
    words.push_back(std::move(w));
  }

  while (tok.size() < vocab_size) {
    std::unordered_map<std::uint64_t, long> pair_counts;
    for (const auto& w : words) {
      for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i) {
        pair_counts[(static_cast<std::uint64_t>(w.symbols[i]) << 32) |
                    static_cast<std::uint32_t>(w.symbols[i + 1])] += w.count;
      }
    }
    if (pair_counts.empty()) break;
    TokenId best_left = -1, best_right = -1;
    long best_count = 0;
    for (const auto& [key, count] : pair_counts) {
      const auto left = static_cast<TokenId>(key >> 32);
      const auto right = static_cast<TokenId>(key & 0xffffffffu);
      bool better = count > best_count;
      if (!better && count == best_count) {
        const auto& lb = tok.token_bytes(left);
        const auto& rb = tok.token_bytes(right);
        const auto& blb = tok.token_bytes(best_left);
        const auto& brb = tok.token_bytes(best_right);
        better = lb < blb || (lb == blb && rb < brb);
      }
      if (better) {
        best_left = left;
        best_right = right;
        best_count = count;
      }
    }
    tok.add_merge(best_left, best_right);
    const TokenId merged_id = tok.merge_result(best_left, best_right);
    for (auto& w : words) {
      std::vector<TokenId> next;
      next.reserve(w.symbols.size());
      for (std::size_t i = 0; i < w.symbols.size(); ++i) {
        if (i + 1 < w.symbols.size() && w.symbols[i] == best_left && w.symbols[i + 1] == best_right) {
          next.push_back(merged_id);
          ++i;
        } else {
          next.push_back(w.symbols[i]);
        }
      }
      w.symbols.swap(next);
    }
  }
  return tok;
}

}  // namespace dlr
