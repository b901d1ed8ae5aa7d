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

// Text -> vector encoders. The engine normally consumes embeddings produced
// elsewhere; these cover the two ways of producing them from inside it:
//
//  * HashingEncoder: offline bag-of-words feature hashing. Every whitespace
//    token t adds sign(t) to bucket fnv1a64(t) % dim, with sign = -1 when
//    the top hash bit is set. A text with no surviving mass gets a 1 in the
//    bucket of the empty token so the vector is never zero.
//  * HttpEmbedClient: POST /embed {"texts": [...]} ->
//    {"dim": n, "vectors": [[...], ...]} in request order.

#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hsc/embedding.hpp"
#include "hsc/error.hpp"
#include "hsc/rng.hpp"

namespace hsc {

class HashingEncoder {
 public:
  explicit HashingEncoder(std::size_t dim) : dim_(dim) {
    if (dim_ == 0) throw PreconditionError("HashingEncoder: dim must be >= 1");
  }

  std::size_t dim() const noexcept { return dim_; }

  std::vector<float> encode_one(std::string_view text) const {
    std::vector<float> v(dim_, 0.0f);
    std::size_t pos = 0;
    while (pos < text.size()) {
      const auto start = text.find_first_not_of(" \t\r\n", pos);
      if (start == std::string_view::npos) break;
      auto end = text.find_first_of(" \t\r\n", start);
      if (end == std::string_view::npos) end = text.size();
      add_token(v, text.substr(start, end - start));
      pos = end;
    }
    if (norm(v) == 0.0) v[fnv1a64("") % dim_] = 1.0f;
    return v;
  }

  std::vector<std::vector<float>> encode(
      std::span<const std::string> texts) const {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(encode_one(t));
    return out;
  }

 private:
  void add_token(std::vector<float>& v, std::string_view token) const {
    const auto h = fnv1a64(token);
    v[h % dim_] += (h >> 63) != 0 ? -1.0f : 1.0f;
  }

  std::size_t dim_;
};

inline std::string encode_embed_request(std::span<const std::string> texts) {
  nlohmann::json j;
  j["texts"] = nlohmann::json::array();
  for (const auto& t : texts) j["texts"].push_back(t);
  return j.dump();
}

/// Decodes and checks an /embed response body against the request size.
inline std::vector<std::vector<float>> decode_embed_response(
    std::string_view body, std::size_t expected_count) {
  std::vector<std::vector<float>> vectors;
  std::size_t dim = 0;
  try {
    const auto j = nlohmann::json::parse(body);
    dim = j.at("dim").get<std::size_t>();
    for (const auto& row : j.at("vectors")) {
      auto& v = vectors.emplace_back();
      for (const auto& x : row) v.push_back(x.get<float>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("embed response: ") + e.what());
  }
  if (vectors.size() != expected_count) {
    throw ValidationError("embed response: " + std::to_string(vectors.size()) +
                          " vectors for " + std::to_string(expected_count) +
                          " texts");
  }
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    if (vectors[i].size() != dim) {
      throw ValidationError("embed response: vector " + std::to_string(i) +
                            " has " + std::to_string(vectors[i].size()) +
                            " components, declared dim " + std::to_string(dim));
    }
  }
  return vectors;
}

/// Client for an embedding provider speaking the /embed protocol.
/// `base_url` is "http://host:port".
class HttpEmbedClient {
 public:
  explicit HttpEmbedClient(const std::string& base_url,
                           std::size_t batch_size = 64)
      : client_(std::make_unique<httplib::Client>(base_url)),
        batch_size_(batch_size == 0 ? 1 : batch_size) {
    client_->set_read_timeout(120, 0);
  }

  std::vector<std::vector<float>> encode(std::span<const std::string> texts) {
    std::vector<std::vector<float>> out;
    out.reserve(texts.size());
    for (std::size_t start = 0; start < texts.size(); start += batch_size_) {
      const auto chunk =
          texts.subspan(start, std::min(batch_size_, texts.size() - start));
      const auto res = client_->Post("/embed", encode_embed_request(chunk),
                                     "application/json");
      if (!res) {
        throw RuntimeError("embed request failed: " +
                           httplib::to_string(res.error()));
      }
      if (res->status != 200) {
        throw RuntimeError("embed request returned HTTP " +
                           std::to_string(res->status) + ": " + res->body);
      }
      auto vectors = decode_embed_response(res->body, chunk.size());
      if (!out.empty() && !vectors.empty() &&
          vectors.front().size() != out.front().size()) {
        throw ValidationError("embed response: dim changed between batches");
      }
      for (auto& v : vectors) out.push_back(std::move(v));
    }
    return out;
  }

 private:
  std::unique_ptr<httplib::Client> client_;
  std::size_t batch_size_;
};

}  // namespace hsc
