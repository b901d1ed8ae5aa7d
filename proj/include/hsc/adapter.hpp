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

// Linear adapter over frozen embeddings, trained with the Multiple Negatives
// Ranking loss. Both sides of a pair go through the same matrix W:
//
//   u_i = W q_i,  v_j = W d_j,  s_ij = scale * cos(u_i, v_j)
//   L = (1/n) sum_i [ log sum_j exp(s_ij) - s_ii ]
//
// Gradient (g_ij = (softmax_i(s)_j - [i == j]) / n):
//   dL/du_i = scale * sum_j g_ij (v_j / (|u_i||v_j|) - cos_ij u_i / |u_i|^2)
//   dL/dv_j = scale * sum_i g_ij (u_i / (|u_i||v_j|) - cos_ij v_j / |v_j|^2)
//   dL/dW   = sum_i dL/du_i q_i^T + sum_j dL/dv_j d_j^T

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "hsc/embedding.hpp"
#include "hsc/embedding_io.hpp"
#include "hsc/error.hpp"
#include "hsc/io.hpp"
#include "hsc/rng.hpp"

namespace hsc {

/// Square row-major matrix.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t dim, double fill = 0.0)
      : dim_(dim), data_(dim * dim, fill) {}

  static Matrix identity(std::size_t dim) {
    Matrix m(dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t dim() const noexcept { return dim_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * dim_ + c];
  }
  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<double> data_;
};

class Adapter {
 public:
  Adapter() = default;
  Adapter(Matrix weights, std::string name_space)
      : weights_(std::move(weights)), namespace_(std::move(name_space)) {
    if (weights_.dim() == 0) throw PreconditionError("adapter dim must be >= 1");
    for (double w : weights_.data()) {
      if (!std::isfinite(w)) {
        throw PreconditionError("adapter has a non-finite weight");
      }
    }
  }

  static Adapter identity(std::size_t dim, std::string name_space = {}) {
    return Adapter(Matrix::identity(dim), std::move(name_space));
  }

  std::size_t dim() const noexcept { return weights_.dim(); }
  const Matrix& weights() const noexcept { return weights_; }
  const std::string& name_space() const noexcept { return namespace_; }

  /// W * v in double precision.
  std::vector<double> apply_exact(std::span<const float> v) const {
    check_dim(v.size());
    std::vector<double> out(dim(), 0.0);
    for (std::size_t r = 0; r < dim(); ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim(); ++c) {
        s += weights_(r, c) * static_cast<double>(v[c]);
      }
      out[r] = s;
    }
    return out;
  }

  std::vector<float> apply(std::span<const float> v) const {
    const auto exact = apply_exact(v);
    return {exact.begin(), exact.end()};
  }

  friend bool operator==(const Adapter&, const Adapter&) = default;

 private:
  void check_dim(std::size_t n) const {
    if (n != dim()) {
      throw PreconditionError("adapter '" + namespace_ + "' has dim " +
                              std::to_string(dim()) + ", input has " +
                              std::to_string(n));
    }
  }

  Matrix weights_;
  std::string namespace_;
};

inline Vector apply(const Adapter& adapter, const Vector& v) {
  return Vector(adapter.apply(v.span()));
}

/// Every row of `store` mapped through `adapter`.
inline EmbeddingStore apply(const Adapter& adapter, const EmbeddingStore& store) {
  EmbeddingStore out(store.name_space(), adapter.dim());
  for (std::size_t i = 0; i < store.size(); ++i) {
    out.add(store.id(i), adapter.apply(store.row(i)));
  }
  return out;
}

struct MnrLoss {
  double value = 0.0;
  /// Document pairs (j < k) in the batch with identical vectors. Each one
  /// turns a true positive into an in-batch negative.
  std::size_t duplicate_documents = 0;
};

struct MnrLossAndGradient {
  MnrLoss loss;
  Matrix gradient;
};

namespace detail {

using DVec = std::vector<double>;

inline void check_batch(std::size_t nq, std::size_t nd) {
  if (nq != nd) {
    throw PreconditionError("mnr: " + std::to_string(nq) + " queries vs " +
                            std::to_string(nd) + " documents");
  }
  if (nq == 0) throw PreconditionError("mnr: empty batch");
}

inline std::size_t count_duplicate_documents(
    std::span<const std::span<const float>> docs) {
  std::size_t dup = 0;
  for (std::size_t j = 0; j < docs.size(); ++j) {
    for (std::size_t k = j + 1; k < docs.size(); ++k) {
      if (std::equal(docs[j].begin(), docs[j].end(), docs[k].begin(),
                     docs[k].end())) {
        ++dup;
      }
    }
  }
  return dup;
}

/// Loss and (optionally) dL/dW for base vectors `queries`/`docs` under W.
/// A null `weights` means the identity map and disables the gradient.
inline MnrLossAndGradient mnr_evaluate(
    std::span<const std::span<const float>> queries,
    std::span<const std::span<const float>> docs, const Matrix* weights,
    double scale, bool want_gradient) {
  check_batch(queries.size(), docs.size());
  const std::size_t n = queries.size();
  const std::size_t dim = queries.front().size();
  for (std::size_t i = 0; i < n; ++i) {
    if (queries[i].size() != dim || docs[i].size() != dim) {
      throw PreconditionError("mnr: vectors of differing dim in batch");
    }
  }
  if (weights != nullptr && weights->dim() != dim) {
    throw PreconditionError("mnr: adapter dim " +
                            std::to_string(weights->dim()) +
                            " != embedding dim " + std::to_string(dim));
  }

  auto transform = [&](std::span<const float> x) {
    DVec out(dim);
    if (weights == nullptr) {
      for (std::size_t r = 0; r < dim; ++r) out[r] = x[r];
      return out;
    }
    for (std::size_t r = 0; r < dim; ++r) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) s += (*weights)(r, c) * x[c];
      out[r] = s;
    }
    return out;
  };
  auto ddot = [dim](const DVec& a, const DVec& b) {
    double s = 0.0;
    for (std::size_t t = 0; t < dim; ++t) s += a[t] * b[t];
    return s;
  };

  std::vector<DVec> u(n), v(n);
  DVec nu(n), nv(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = transform(queries[i]);
    v[i] = transform(docs[i]);
    nu[i] = std::sqrt(ddot(u[i], u[i]));
    nv[i] = std::sqrt(ddot(v[i], v[i]));
    if (nu[i] == 0.0 || nv[i] == 0.0) {
      throw PreconditionError("mnr: zero-norm vector at batch index " +
                              std::to_string(i));
    }
  }

  std::vector<DVec> cos(n, DVec(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      cos[i][j] = ddot(u[i], v[j]) / (nu[i] * nv[j]);
    }
  }

  MnrLossAndGradient out;
  out.loss.duplicate_documents = count_duplicate_documents(docs);

  // g[i][j] = dL/ds_ij
  std::vector<DVec> g(n, DVec(n));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) m = std::max(m, scale * cos[i][j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) z += std::exp(scale * cos[i][j] - m);
    const double lse = m + std::log(z);
    total += lse - scale * cos[i][i];
    for (std::size_t j = 0; j < n; ++j) {
      const double p = std::exp(scale * cos[i][j] - lse);
      g[i][j] = (p - (i == j ? 1.0 : 0.0)) / static_cast<double>(n);
    }
  }
  out.loss.value = total / static_cast<double>(n);
  // lse >= s_ii exactly; only round-off can push the mean below zero.
  if (out.loss.value < 0.0 && out.loss.value > -1e-12) out.loss.value = 0.0;

  if (!want_gradient) return out;

  std::vector<DVec> du(n, DVec(dim, 0.0)), dv(n, DVec(dim, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double a = scale * g[i][j];
      if (a == 0.0) continue;
      const double inv = 1.0 / (nu[i] * nv[j]);
      const double cu = cos[i][j] / (nu[i] * nu[i]);
      const double cv = cos[i][j] / (nv[j] * nv[j]);
      for (std::size_t t = 0; t < dim; ++t) {
        du[i][t] += a * (v[j][t] * inv - cu * u[i][t]);
        dv[j][t] += a * (u[i][t] * inv - cv * v[j][t]);
      }
    }
  }
  out.gradient = Matrix(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t r = 0; r < dim; ++r) {
      for (std::size_t c = 0; c < dim; ++c) {
        out.gradient(r, c) += du[i][r] * queries[i][c] + dv[i][r] * docs[i][c];
      }
    }
  }
  return out;
}

inline std::vector<std::span<const float>> spans_of(
    std::span<const Vector> vs) {
  std::vector<std::span<const float>> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.span());
  return out;
}

}  // namespace detail

/// MNR loss on raw vectors (no adapter). `scale` multiplies the cosines
/// before the softmax; scale = 1 is the plain cosine form.
inline MnrLoss mnr_loss(std::span<const Vector> queries,
                        std::span<const Vector> documents, double scale = 1.0) {
  const auto q = detail::spans_of(queries);
  const auto d = detail::spans_of(documents);
  return detail::mnr_evaluate(q, d, nullptr, scale, false).loss;
}

inline MnrLoss mnr_loss(std::span<const Vector> queries,
                        std::span<const Vector> documents,
                        const Adapter& adapter, double scale = 1.0) {
  const auto q = detail::spans_of(queries);
  const auto d = detail::spans_of(documents);
  return detail::mnr_evaluate(q, d, &adapter.weights(), scale, false).loss;
}

/// Loss and dL/dW with the adapter applied to both queries and documents.
inline MnrLossAndGradient mnr_gradient(std::span<const Vector> queries,
                                       std::span<const Vector> documents,
                                       const Adapter& adapter,
                                       double scale = 1.0) {
  const auto q = detail::spans_of(queries);
  const auto d = detail::spans_of(documents);
  return detail::mnr_evaluate(q, d, &adapter.weights(), scale, true);
}

struct FiniteDiffReport {
  double max_relative_error = 0.0;
  /// Set when eps is so small that round-off dominates the differences.
  bool cancellation_warning = false;
};

/// Compares the analytic gradient entry-wise with central differences
/// (L(W + eps E_rc) - L(W - eps E_rc)) / (2 eps). Relative error per entry
/// is |a - f| / max(|a|, |f|, 1e-8).
inline FiniteDiffReport finite_diff_check(std::span<const Vector> queries,
                                          std::span<const Vector> documents,
                                          const Adapter& adapter, double scale,
                                          double eps) {
  if (!(eps > 0.0)) throw PreconditionError("finite_diff_check: eps must be > 0");
  const auto q = detail::spans_of(queries);
  const auto d = detail::spans_of(documents);
  const auto analytic =
      detail::mnr_evaluate(q, d, &adapter.weights(), scale, true).gradient;

  FiniteDiffReport report;
  report.cancellation_warning = eps < 1e-8;
  Matrix w = adapter.weights();
  for (std::size_t r = 0; r < w.dim(); ++r) {
    for (std::size_t c = 0; c < w.dim(); ++c) {
      const double saved = w(r, c);
      w(r, c) = saved + eps;
      const double plus = detail::mnr_evaluate(q, d, &w, scale, false).loss.value;
      w(r, c) = saved - eps;
      const double minus =
          detail::mnr_evaluate(q, d, &w, scale, false).loss.value;
      w(r, c) = saved;
      const double numeric = (plus - minus) / (2.0 * eps);
      const double a = analytic(r, c);
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      report.max_relative_error =
          std::max(report.max_relative_error, std::abs(a - numeric) / denom);
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  double learning_rate = 1e-2;
  int epochs = 100;
  int batch_size = 32;
  double scale = 1.0;
  std::uint64_t seed = 0;
  /// Standard deviation of the Gaussian noise added to the identity at init.
  double init_noise = 0.01;

  /// Settings used for full transformer fine-tuning (lr 2e-5, 100 epochs).
  /// Far too small a step for a linear adapter; kept for reference runs.
  static TrainConfig transformer_reference() {
    TrainConfig c;
    c.learning_rate = 2e-5;
    c.epochs = 100;
    return c;
  }

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw PreconditionError("train: learning_rate must be finite and >= 0");
    }
    if (epochs < 1) throw PreconditionError("train: epochs must be >= 1");
    if (batch_size < 1) throw PreconditionError("train: batch_size must be >= 1");
    if (!(scale > 0.0)) throw PreconditionError("train: scale must be > 0");
  }
};

struct TrainPair {
  std::string query_id;
  std::string doc_id;
};

struct TrainResult {
  Adapter adapter;
  std::vector<double> loss_history;  // one batch-size-weighted mean per epoch
  std::size_t dropped_duplicate_docs = 0;
  std::size_t single_item_batches = 0;
};

/// Mini-batch gradient descent on the MNR loss. W starts at
/// I + init_noise * N(0, 1) drawn from the "adapter-init" stream; pair order
/// is reshuffled every epoch from the "adapter-shuffle" stream. Within a
/// batch, later pairs repeating an earlier doc_id are dropped.
inline TrainResult train(std::span<const TrainPair> pairs,
                         const EmbeddingStore& query_store,
                         const EmbeddingStore& doc_store,
                         const TrainConfig& config,
                         std::string adapter_namespace = {}) {
  config.validate();
  if (pairs.empty()) throw PreconditionError("train: no training pairs");
  if (query_store.dim() != doc_store.dim()) {
    throw PreconditionError("train: query dim " +
                            std::to_string(query_store.dim()) +
                            " != document dim " +
                            std::to_string(doc_store.dim()));
  }
  const std::size_t dim = doc_store.dim();
  if (adapter_namespace.empty()) adapter_namespace = doc_store.name_space();

  struct Resolved {
    std::size_t query_row;
    std::size_t doc_row;
  };
  std::vector<Resolved> resolved;
  resolved.reserve(pairs.size());
  for (const auto& p : pairs) {
    const auto q = query_store.find(p.query_id);
    const auto d = doc_store.find(p.doc_id);
    if (!q) {
      throw ValidationError("train: unknown query id '" + p.query_id +
                            "' in namespace '" + query_store.name_space() + "'");
    }
    if (!d) {
      throw ValidationError("train: unknown document id '" + p.doc_id +
                            "' in namespace '" + doc_store.name_space() + "'");
    }
    resolved.push_back({*q, *d});
  }

  Matrix w = Matrix::identity(dim);
  {
    Xorshift64Star init(derive_seed(config.seed, "adapter-init"));
    for (auto& x : w.data()) x += config.init_noise * init.normal();
  }
  Xorshift64Star order_rng(derive_seed(config.seed, "adapter-shuffle"));

  TrainResult result;
  std::vector<std::size_t> order(resolved.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(std::span<std::size_t>(order), order_rng);

    double epoch_sum = 0.0;
    std::size_t epoch_items = 0;
    const auto batch = static_cast<std::size_t>(config.batch_size);
    for (std::size_t start = 0; start < order.size(); start += batch) {
      const auto end = std::min(order.size(), start + batch);
      std::vector<std::span<const float>> qs, ds;
      std::unordered_set<std::size_t> seen_docs;
      for (std::size_t k = start; k < end; ++k) {
        const auto& r = resolved[order[k]];
        if (!seen_docs.insert(r.doc_row).second) {
          ++result.dropped_duplicate_docs;
          continue;
        }
        qs.push_back(query_store.row(r.query_row));
        ds.push_back(doc_store.row(r.doc_row));
      }
      if (qs.size() == 1) ++result.single_item_batches;

      auto step = detail::mnr_evaluate(qs, ds, &w, config.scale, true);
      if (!std::isfinite(step.loss.value)) {
        throw RuntimeError("train: non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch starting at " +
                           std::to_string(start) + " (lr=" +
                           io::format_double(config.learning_rate) +
                           ", scale=" + io::format_double(config.scale) + ")");
      }
      auto g = step.gradient.data();
      auto wd = w.data();
      for (std::size_t t = 0; t < wd.size(); ++t) {
        wd[t] -= config.learning_rate * g[t];
      }
      epoch_sum += step.loss.value * static_cast<double>(qs.size());
      epoch_items += qs.size();
    }
    result.loss_history.push_back(epoch_sum /
                                  static_cast<double>(epoch_items));
  }
  for (double x : w.data()) {
    if (!std::isfinite(x)) {
      throw RuntimeError("train: adapter diverged to non-finite weights");
    }
  }
  result.adapter = Adapter(std::move(w), std::move(adapter_namespace));
  return result;
}

// ---------------------------------------------------------------------------
// ADP1 files: "ADP1" | u8 version=1 | u32 dim | dim*dim f32 row-major |
//             u16 namespace length | namespace bytes

inline std::string encode_adapter(const Adapter& a) {
  std::string out = "ADP1";
  out.push_back(1);
  detail::put_le(out, static_cast<std::uint32_t>(a.dim()));
  for (double x : a.weights().data()) {
    detail::put_f32(out, static_cast<float>(x));
  }
  if (a.name_space().size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError("adapter namespace too long");
  }
  detail::put_le(out, static_cast<std::uint16_t>(a.name_space().size()));
  out += a.name_space();
  return out;
}

inline Adapter decode_adapter(std::string_view bytes,
                              const std::string& what = "adapter") {
  detail::ByteReader r(bytes, what);
  if (r.take(4, "magic") != "ADP1") {
    throw ValidationError(what + ": bad magic (expected ADP1)");
  }
  if (const auto v = r.get<std::uint8_t>("version"); v != 1) {
    throw ValidationError(what + ": unsupported version " + std::to_string(v));
  }
  const auto dim = r.get<std::uint32_t>("dim");
  if (dim == 0) throw ValidationError(what + ": dim is 0");
  Matrix w(dim);
  for (auto& x : w.data()) x = r.get_f32("weights");
  const auto len = r.get<std::uint16_t>("namespace length");
  std::string ns(r.take(len, "namespace"));
  if (r.remaining() != 0) throw ValidationError(what + ": trailing bytes");
  try {
    return Adapter(std::move(w), std::move(ns));
  } catch (const PreconditionError& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

inline void save_adapter(const std::filesystem::path& path, const Adapter& a) {
  io::write_atomic(path, encode_adapter(a));
}

inline Adapter load_adapter(const std::filesystem::path& path) {
  return decode_adapter(read_file(path), path.string());
}

}  // namespace hsc
