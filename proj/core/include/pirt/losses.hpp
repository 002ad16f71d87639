#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pirt/linalg.hpp"

namespace pirt {

// Proxy matrix, d x r: column j is the proxy of class j.
using ProxyMatrix = Matrix;

struct LossConfig {
  double alpha = 32.0;  // scaling factor
  double delta = 0.1;   // margin
  double lambda = 0.001;  // weight of the soft-orthogonality penalty

  void validate() const;
};

struct EmbeddingBatch {
  Matrix embeddings;                 // n x d, one embedding per row
  std::vector<std::int64_t> labels;  // n proxy indices in [0, r)
};

struct LossOutput {
  double value = 0.0;
  Matrix grad_embeddings;  // n x d
  Matrix grad_proxies;     // d x r
};

struct ProxyPartition {
  std::vector<std::vector<std::size_t>> positives;  // per proxy, ascending
  std::vector<std::vector<std::size_t>> negatives;  // per proxy, ascending
  std::vector<std::size_t> positive_proxies;        // proxies with >= 1 positive
};

ProxyPartition partition_sets(const std::vector<std::int64_t>& labels,
                              std::size_t num_proxies);

// Proxy Anchor loss with analytic gradients through the cosine similarity.
//
//   (1/|P+|) sum_{p in P+} log(1 + sum_{x in X+_p} exp(-alpha (s(x,p) - delta)))
// + (1/|P|)  sum_{p in P}  log(1 + sum_{x in X-_p} exp( alpha (s(x,p) + delta)))
//
// Embeddings are not normalized beforehand. Per-proxy sums are accumulated in
// ascending sample order so the value is bit-stable.
LossOutput proxy_anchor_loss(const EmbeddingBatch& batch, const ProxyMatrix& proxies,
                             const LossConfig& cfg);

// ||P^T P - I_r||_F^2 and its gradient 4 P (P^T P - I_r). grad_embeddings is
// returned empty (0 x d) since the penalty does not depend on the batch.
LossOutput so_penalty(const ProxyMatrix& proxies);

// Proxy Anchor loss plus lambda times the soft-orthogonality penalty.
LossOutput pirt_loss(const EmbeddingBatch& batch, const ProxyMatrix& proxies,
                     const LossConfig& cfg);

}  // namespace pirt
