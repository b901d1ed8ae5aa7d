// Copyright 2026 The HSC Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Embedding files.
//
// emb-binary, little-endian:
//   "EMB1" | u8 version=1 | u32 dim | u64 count |
//   count x ( u16 id_len | id_len bytes UTF-8 id | dim x f32 )
//
// emb-jsonl: one {"id": "...", "vector": [f, ...]} per line; the first line
// fixes dim.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsc/embedding.hpp"
#include "hsc/error.hpp"
#include "hsc/io.hpp"

namespace hsc {

enum class EmbeddingFormat { kBinary, kJsonl };

inline constexpr std::array<char, 4> kEmbMagic{'E', 'M', 'B', '1'};
inline constexpr std::uint8_t kEmbVersion = 1;

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto bits = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(bits & 0xFFu));
    bits = static_cast<U>(bits >> 8);
  }
}

inline void put_f32(std::string& out, float v) {
  put_le(out, std::bit_cast<std::uint32_t>(v));
}

/// Bounds-checked little-endian cursor over an in-memory file.
class ByteReader {
 public:
  ByteReader(std::string_view bytes, std::string what)
      : bytes_(bytes), what_(std::move(what)) {}

  template <typename T>
  T get(const char* field) {
    need(sizeof(T), field);
    std::make_unsigned_t<T> v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::make_unsigned_t<T>>(
               static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }

  float get_f32(const char* field) {
    return std::bit_cast<float>(get<std::uint32_t>(field));
  }

  std::string_view take(std::size_t n, const char* field) {
    need(n, field);
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) const {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError(what_ + ": truncated file while reading " + field);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::string what_;
};

}  // namespace detail

inline std::string encode_emb_binary(const EmbeddingStore& store) {
  std::string out;
  out.append(kEmbMagic.data(), kEmbMagic.size());
  out.push_back(static_cast<char>(kEmbVersion));
  detail::put_le(out, static_cast<std::uint32_t>(store.dim()));
  detail::put_le(out, static_cast<std::uint64_t>(store.size()));
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& id = store.id(i);
    if (id.size() > std::numeric_limits<std::uint16_t>::max()) {
      throw ValidationError("id longer than 65535 bytes: " + id.substr(0, 32));
    }
    detail::put_le(out, static_cast<std::uint16_t>(id.size()));
    out += id;
    for (float c : store.row(i)) detail::put_f32(out, c);
  }
  return out;
}

inline EmbeddingStore decode_emb_binary(std::string_view bytes,
                                        std::string name_space,
                                        const std::string& what = "emb-binary") {
  detail::ByteReader r(bytes, what);
  const auto magic = r.take(4, "magic");
  if (magic != std::string_view(kEmbMagic.data(), kEmbMagic.size())) {
    throw ValidationError(what + ": bad magic (expected EMB1)");
  }
  const auto version = r.get<std::uint8_t>("version");
  if (version != kEmbVersion) {
    throw ValidationError(what + ": unsupported version " +
                          std::to_string(version));
  }
  const auto dim = r.get<std::uint32_t>("dim");
  const auto count = r.get<std::uint64_t>("count");
  if (dim == 0) throw ValidationError(what + ": dim is 0");

  EmbeddingStore store(std::move(name_space), dim);
  std::vector<float> v(dim);
  for (std::uint64_t rec = 0; rec < count; ++rec) {
    try {
      const auto len = r.get<std::uint16_t>("id length");
      std::string id(r.take(len, "id"));
      for (auto& c : v) c = r.get_f32("vector");
      store.add(std::move(id), v);
    } catch (const ValidationError& e) {
      throw ValidationError("record " + std::to_string(rec) + ": " + e.what());
    }
  }
  if (r.remaining() != 0) {
    throw ValidationError(what + ": " + std::to_string(r.remaining()) +
                          " trailing bytes after " + std::to_string(count) +
                          " records");
  }
  return store;
}

inline std::string encode_emb_jsonl(const EmbeddingStore& store) {
  std::string out;
  for (std::size_t i = 0; i < store.size(); ++i) {
    nlohmann::ordered_json j;
    j["id"] = store.id(i);
    auto& arr = j["vector"] = nlohmann::json::array();
    for (float c : store.row(i)) arr.push_back(c);
    out += j.dump();
    out += '\n';
  }
  return out;
}

inline EmbeddingStore parse_emb_jsonl(std::istream& in, std::string name_space,
                                      const std::string& what = "emb-jsonl") {
  std::optional<EmbeddingStore> store;
  std::size_t record = 0;
  io::for_each_record_line(in, [&](std::string_view text, std::size_t line) {
    auto fail = [&](const std::string& why) {
      throw ValidationError(what + " line " + std::to_string(line) +
                            " (record " + std::to_string(record) + "): " + why);
    };
    std::string id;
    std::vector<float> v;
    try {
      const auto j = nlohmann::json::parse(text);
      id = j.at("id").get<std::string>();
      for (const auto& x : j.at("vector")) v.push_back(x.get<float>());
    } catch (const nlohmann::json::exception& e) {
      fail(e.what());
    }
    if (v.empty()) fail("empty vector");
    if (!store) store.emplace(name_space, v.size());
    try {
      store->add(std::move(id), v);
    } catch (const ValidationError& e) {
      fail(e.what());
    }
    ++record;
  });
  if (!store) throw ValidationError(what + ": no records");
  return std::move(*store);
}

inline std::string read_file(const std::filesystem::path& path) {
  auto in = io::open_input(path, std::ios::in | std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

/// Binary when the file starts with the EMB1 magic, JSONL otherwise.
inline EmbeddingFormat detect_embedding_format(std::string_view bytes) {
  return bytes.substr(0, 4) ==
                 std::string_view(kEmbMagic.data(), kEmbMagic.size())
             ? EmbeddingFormat::kBinary
             : EmbeddingFormat::kJsonl;
}

inline EmbeddingStore decode_embeddings(std::string_view bytes,
                                        EmbeddingFormat format,
                                        std::string name_space,
                                        const std::string& what) {
  if (format == EmbeddingFormat::kBinary) {
    return decode_emb_binary(bytes, std::move(name_space), what);
  }
  std::istringstream in{std::string(bytes)};
  return parse_emb_jsonl(in, std::move(name_space), what);
}

inline EmbeddingStore load_embeddings(const std::filesystem::path& path,
                                      EmbeddingFormat format,
                                      std::string name_space) {
  return decode_embeddings(read_file(path), format, std::move(name_space),
                           path.string());
}

/// Format chosen by `detect_embedding_format`.
inline EmbeddingStore load_embeddings(const std::filesystem::path& path,
                                      std::string name_space) {
  const auto bytes = read_file(path);
  return decode_embeddings(bytes, detect_embedding_format(bytes),
                           std::move(name_space), path.string());
}

inline void write_embeddings(const std::filesystem::path& path,
                             const EmbeddingStore& store,
                             EmbeddingFormat format) {
  io::write_atomic(path, format == EmbeddingFormat::kBinary
                             ? encode_emb_binary(store)
                             : encode_emb_jsonl(store));
}

}  // namespace hsc
