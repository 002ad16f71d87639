#include "pirt/head.hpp"

#include <cmath>
#include <random>
#include <string>

#include "pirt/error.hpp"

namespace pirt {

std::string_view to_string(PoolingMethod method) {
  switch (method) {
    case PoolingMethod::Concat: return "concat";
    case PoolingMethod::Mean: return "mean";
    case PoolingMethod::Cls: return "cls";
    case PoolingMethod::Dist: return "dist";
  }
  return "unknown";
}

std::optional<PoolingMethod> parse_pooling(std::string_view name) {
  if (name == "concat") return PoolingMethod::Concat;
  if (name == "mean") return PoolingMethod::Mean;
  if (name == "cls") return PoolingMethod::Cls;
  if (name == "dist") return PoolingMethod::Dist;
  return std::nullopt;
}

std::size_t pooled_width(PoolingMethod method, std::size_t token_dim) {
  return method == PoolingMethod::Concat ? 2 * token_dim : token_dim;
}

Vec pool(const TokenPair& tokens, PoolingMethod method) {
  if (tokens.cls.size() != tokens.dist.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "CLS width " + std::to_string(tokens.cls.size()) + " vs DIST width " +
                    std::to_string(tokens.dist.size()));
  }
  switch (method) {
    case PoolingMethod::Concat: {
      Vec out(tokens.cls);
      out.insert(out.end(), tokens.dist.begin(), tokens.dist.end());
      return out;
    }
    case PoolingMethod::Mean: {
      Vec out(tokens.cls.size());
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = (tokens.cls[i] + tokens.dist[i]) / 2.0;
      }
      return out;
    }
    case PoolingMethod::Cls: return tokens.cls;
    case PoolingMethod::Dist: return tokens.dist;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown pooling method");
}

Vec project(const ProjectionHead& head, std::span<const double> pooled) {
  if (pooled.size() != head.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "pooled width " + std::to_string(pooled.size()) + " vs head input " +
                    std::to_string(head.input_dim()));
  }
  Vec out(head.bias);
  for (std::size_t k = 0; k < pooled.size(); ++k) {
    const double v = pooled[k];
    auto w = head.weights.row(k);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] += v * w[j];
  }
  return out;
}

Matrix project_batch(const ProjectionHead& head, const Matrix& pooled) {
  if (pooled.cols() != head.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "pooled width " + std::to_string(pooled.cols()) + " vs head input " +
                    std::to_string(head.input_dim()));
  }
  Matrix out = matmul(pooled, head.weights);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto row = out.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += head.bias[j];
  }
  return out;
}

ProjectionGrad project_backward(const Matrix& pooled, const Matrix& grad_embeddings) {
  if (pooled.rows() != grad_embeddings.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "pooled and gradient batch sizes differ");
  }
  ProjectionGrad g;
  g.weights = matmul(transpose(pooled), grad_embeddings);
  g.bias.assign(grad_embeddings.cols(), 0.0);
  for (std::size_t i = 0; i < grad_embeddings.rows(); ++i) {
    auto row = grad_embeddings.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) g.bias[j] += row[j];
  }
  return g;
}

ProjectionHead init_projection(std::size_t pooled_dim, std::size_t embed_dim,
                               std::uint64_t seed) {
  if (pooled_dim == 0 || embed_dim == 0) {
    throw Error(ErrorCode::InvalidArgument, "projection dimensions must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(
      0.0, std::sqrt(2.0 / static_cast<double>(pooled_dim + embed_dim)));
  ProjectionHead head{Matrix(pooled_dim, embed_dim), Vec(embed_dim, 0.0)};
  for (double& w : head.weights.data()) w = normal(rng);
  return head;
}

ProxyMatrix init_proxies(std::size_t r, std::size_t d, std::uint64_t seed) {
  if (r == 0 || d == 0) {
    throw Error(ErrorCode::InvalidArgument, "proxy count and width must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ProxyMatrix p(d, r);
  Vec column(d);
  for (std::size_t j = 0; j < r; ++j) {
    double norm = 0.0;
    // A zero draw has probability zero but would leave the column undefined.
    while (norm == 0.0) {
      for (double& v : column) v = normal(rng);
      norm = l2_norm(column);
    }
    for (std::size_t k = 0; k < d; ++k) p(k, j) = column[k] / norm;
  }
  return p;
}

std::size_t patch_count(const BackboneShape& shape) {
  if (shape.patch == 0) throw Error(ErrorCode::InvalidArgument, "patch size must be >= 1");
  const std::size_t area = shape.height * shape.width;
  const std::size_t patch_area = shape.patch * shape.patch;
  if (area % patch_area != 0) {
    throw Error(ErrorCode::NotDivisible,
                std::to_string(shape.height) + "x" + std::to_string(shape.width) +
                    " is not divisible into " + std::to_string(shape.patch) + "x" +
                    std::to_string(shape.patch) + " patches");
  }
  return area / patch_area;
}

}  // namespace pirt
