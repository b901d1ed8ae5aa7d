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

#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "hsc/embedding.hpp"
#include "hsc/embedding_io.hpp"
#include "hsc/rng.hpp"
#include "support/synthetic.hpp"

namespace hsc {
namespace {

TEST(Cosine, Examples) {
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 0}, Vector{1, 0}), 1.0);
  EXPECT_DOUBLE_EQ(cosine(Vector{1, 0}, Vector{0, 1}), 0.0);
  EXPECT_NEAR(cosine(Vector{1, 1}, Vector{1, 0}), 0.70710678, 1e-6);
}

TEST(Cosine, Errors) {
  EXPECT_THROW(cosine(Vector{1, 0}, Vector{1, 0, 0}), PreconditionError);
  EXPECT_THROW(cosine(Vector{0, 0}, Vector{1, 0}), PreconditionError);
  EXPECT_THROW(Vector({1.0f, NAN}), PreconditionError);
  EXPECT_THROW(Vector(std::vector<float>{}), PreconditionError);
}

TEST(Cosine, SymmetricScaleInvariantAndBounded) {
  Xorshift64Star rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto a = testing::random_unit(8, rng);
    const auto b = testing::random_unit(8, rng);
    const double c = cosine(a, b);
    EXPECT_EQ(c, cosine(b, a));
    EXPECT_LE(std::abs(c), 1.0);
    std::vector<float> scaled(a);
    const float s = static_cast<float>(0.1 + 10 * rng.uniform());
    for (auto& x : scaled) x *= s;
    EXPECT_NEAR(cosine(a, scaled), 1.0, 1e-6);
  }
}

EmbeddingStore two_store() {
  EmbeddingStore s("level6", 2);
  s.add("a", Vector{1, 0});
  s.add("b", Vector{0, 1});
  return s;
}

TEST(FlatMips, Examples) {
  const auto store = two_store();
  const auto top = flat_mips(Vector{1, 0.1f}, store, 1);
  ASSERT_EQ(top.size(), 1u);
  EXPECT_EQ(top[0].id, "a");
  // 1 / sqrt(1.01), with the query component stored as f32.
  EXPECT_NEAR(top[0].score, 1.0 / std::sqrt(1.01), 1e-7);

  const auto all = flat_mips(Vector{1, 0.1f}, store, 10);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[1].id, "b");
}

TEST(FlatMips, TiesBreakBySmallerId) {
  EmbeddingStore s("ns", 2);
  s.add("zeta", Vector{1, 1});
  s.add("alpha", Vector{1, 1});
  s.add("mid", Vector{0, 1});
  const auto top = flat_mips(Vector{1, 1}, s, 1);
  EXPECT_EQ(top[0].id, "alpha");
}

TEST(FlatMips, Errors) {
  const auto store = two_store();
  EXPECT_THROW(flat_mips(Vector{1, 0, 0}, store, 1), PreconditionError);
  EXPECT_THROW(flat_mips(Vector{1, 0}, store, 0), PreconditionError);
  EXPECT_THROW(flat_mips(Vector{1, 0}, EmbeddingStore("empty", 2), 1),
               PreconditionError);
}

TEST(FlatMips, FullRankingIsSortedPermutationAndScaleInvariant) {
  Xorshift64Star rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    EmbeddingStore s("ns", 6), scaled("ns", 6);
    const float factor = static_cast<float>(0.5 + 4 * rng.uniform());
    for (int i = 0; i < 40; ++i) {
      auto v = testing::random_unit(6, rng);
      s.add("id" + std::to_string(i), v);
      for (auto& x : v) x *= factor;
      scaled.add("id" + std::to_string(i), v);
    }
    const auto q = testing::random_unit(6, rng);
    const auto all = flat_mips(q, s, s.size());
    ASSERT_EQ(all.size(), s.size());
    std::set<std::string> ids;
    for (std::size_t i = 0; i < all.size(); ++i) {
      ids.insert(all[i].id);
      if (i > 0) {
        EXPECT_GE(all[i - 1].score, all[i].score);
      }
    }
    EXPECT_EQ(ids.size(), s.size());
    EXPECT_EQ(flat_mips(q, scaled, 1)[0].id, all[0].id);
  }
}

TEST(EmbeddingStore, RejectsBadRows) {
  EmbeddingStore s("ns", 2);
  s.add("a", Vector{1, 0});
  EXPECT_THROW(s.add("a", Vector{0, 1}), ValidationError);
  EXPECT_THROW(s.add("z", Vector{0, 0}), ValidationError);
  EXPECT_THROW(s.add("w", Vector{1, 0, 0}), ValidationError);
  EXPECT_THROW(s.at("missing"), ValidationError);
}

// ---------------------------------------------------------------------------
// File formats

std::string header(std::uint32_t dim, std::uint64_t count) {
  std::string out = "EMB1";
  out.push_back(1);
  detail::put_le(out, dim);
  detail::put_le(out, count);
  return out;
}

void put_record(std::string& out, const std::string& id,
                std::initializer_list<float> values) {
  detail::put_le(out, static_cast<std::uint16_t>(id.size()));
  out += id;
  for (float v : values) detail::put_f32(out, v);
}

TEST(Emb1, HandBuiltFileLoads) {
  auto bytes = header(4, 2);
  put_record(bytes, "311111", {1, 2, 3, 4});
  put_record(bytes, "311112", {0, 0, 0, 1});
  const auto store = decode_emb_binary(bytes, "level6");
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 4u);
  EXPECT_EQ(store.at("311111")[2], 3.0f);
}

TEST(Emb1, LayoutIsLittleEndian) {
  EmbeddingStore s("ns", 1);
  s.add("x", Vector{1.0f});
  const auto bytes = encode_emb_binary(s);
  const std::string expected("EMB1\x01\x01\x00\x00\x00\x01\x00\x00\x00\x00\x00\x00\x00"
                             "\x01\x00x\x00\x00\x80\x3f",
                             24);
  EXPECT_EQ(bytes, expected);
}

TEST(Emb1, ShortRecordIsReportedWithIndex) {
  auto bytes = header(4, 2);
  put_record(bytes, "a", {1, 2, 3, 4});
  put_record(bytes, "b", {1, 2, 3});
  try {
    decode_emb_binary(bytes, "ns");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("record 1"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
}

TEST(Emb1, HeaderAndPayloadErrors) {
  auto good = header(2, 1);
  put_record(good, "a", {1, 0});

  auto bad_magic = good;
  bad_magic[0] = 'X';
  EXPECT_THROW(decode_emb_binary(bad_magic, "ns"), ValidationError);

  auto bad_version = good;
  bad_version[4] = 2;
  EXPECT_THROW(decode_emb_binary(bad_version, "ns"), ValidationError);

  EXPECT_THROW(decode_emb_binary(good + "junk", "ns"), ValidationError);

  auto dup = header(2, 2);
  put_record(dup, "a", {1, 0});
  put_record(dup, "a", {0, 1});
  EXPECT_THROW(decode_emb_binary(dup, "ns"), ValidationError);

  auto zero = header(2, 1);
  put_record(zero, "a", {0, 0});
  EXPECT_THROW(decode_emb_binary(zero, "ns"), ValidationError);

  auto count_too_big = header(2, 3);
  put_record(count_too_big, "a", {1, 0});
  EXPECT_THROW(decode_emb_binary(count_too_big, "ns"), ValidationError);
}

TEST(EmbJsonl, ParsesAndValidates) {
  std::istringstream ok(R"({"id": "a", "vector": [1, 0, 0]}
{"id": "b", "vector": [0, 1, 0]})");
  const auto store = parse_emb_jsonl(ok, "ns");
  EXPECT_EQ(store.dim(), 3u);
  EXPECT_EQ(store.size(), 2u);

  std::istringstream mismatch(R"({"id": "a", "vector": [1, 0, 0]}
{"id": "b", "vector": [0, 1]})");
  EXPECT_THROW(parse_emb_jsonl(mismatch, "ns"), ValidationError);

  std::istringstream empty("");
  EXPECT_THROW(parse_emb_jsonl(empty, "ns"), ValidationError);
}

// write -> load preserves every component bit-for-bit, in both formats.
TEST(EmbeddingFiles, RoundTripIsBitExact) {
  Xorshift64Star rng(9);
  const auto dir = std::filesystem::temp_directory_path() / "hsc_emb_test";
  std::filesystem::create_directories(dir);
  for (int trial = 0; trial < 5; ++trial) {
    EmbeddingStore s("level3", 7);
    for (int i = 0; i < 30; ++i) {
      std::vector<float> v(7);
      for (auto& x : v) x = static_cast<float>(rng.normal() * std::pow(10.0, rng.below(9) - 4.0));
      s.add("id-" + std::to_string(i) + "-\xc3\xa9", v);
    }
    for (auto format : {EmbeddingFormat::kBinary, EmbeddingFormat::kJsonl}) {
      const auto path = dir / (format == EmbeddingFormat::kBinary ? "s.emb" : "s.jsonl");
      write_embeddings(path, s, format);
      const auto back = load_embeddings(path, "level3");
      ASSERT_EQ(back.size(), s.size());
      ASSERT_EQ(back.dim(), s.dim());
      for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(back.id(i), s.id(i));
        for (std::size_t t = 0; t < s.dim(); ++t) {
          EXPECT_EQ(std::bit_cast<std::uint32_t>(back.row(i)[t]),
                    std::bit_cast<std::uint32_t>(s.row(i)[t]));
        }
      }
    }
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace hsc
