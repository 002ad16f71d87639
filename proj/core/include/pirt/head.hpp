#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "pirt/linalg.hpp"
#include "pirt/losses.hpp"

namespace pirt {

// Output states of the class and distillation tokens of a frozen backbone.
struct TokenPair {
  Vec cls;
  Vec dist;
};

enum class PoolingMethod : std::uint8_t { Concat = 0, Mean = 1, Cls = 2, Dist = 3 };

std::string_view to_string(PoolingMethod method);
std::optional<PoolingMethod> parse_pooling(std::string_view name);

// Width of the pooled vector for a backbone of width `token_dim`.
std::size_t pooled_width(PoolingMethod method, std::size_t token_dim);

Vec pool(const TokenPair& tokens, PoolingMethod method);

// Affine map pooled -> embedding: pooled^T W + b, W is pooled_dim x embed_dim.
struct ProjectionHead {
  Matrix weights;
  Vec bias;

  std::size_t input_dim() const noexcept { return weights.rows(); }
  std::size_t embed_dim() const noexcept { return weights.cols(); }

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

Vec project(const ProjectionHead& head, std::span<const double> pooled);

// Row-wise projection of an n x pooled_dim batch.
Matrix project_batch(const ProjectionHead& head, const Matrix& pooled);

struct ProjectionGrad {
  Matrix weights;
  Vec bias;
};

// Gradient of a scalar loss w.r.t. the head given dL/d(embeddings).
ProjectionGrad project_backward(const Matrix& pooled, const Matrix& grad_embeddings);

// Xavier-normal weights (variance 2 / (pooled_dim + embed_dim)) and zero bias.
ProjectionHead init_projection(std::size_t pooled_dim, std::size_t embed_dim,
                               std::uint64_t seed);

// r proxies of width d, each drawn from N(0, I) and normalized onto the unit
// sphere, giving directions uniform on the hypersphere.
ProxyMatrix init_proxies(std::size_t r, std::size_t d, std::uint64_t seed);

// Image geometry of a patch-based backbone. Defaults are the DeiT-B setup.
struct BackboneShape {
  std::size_t height = 224;
  std::size_t width = 224;
  std::size_t channels = 3;
  std::size_t patch = 16;
  std::size_t token_dim = 768;

  // Width of a raw flattened patch, channels * patch * patch.
  std::size_t flattened_patch_dim() const noexcept { return channels * patch * patch; }
};

// Sequence length H*W / patch^2. Throws NotDivisible otherwise.
std::size_t patch_count(const BackboneShape& shape);

}  // namespace pirt
