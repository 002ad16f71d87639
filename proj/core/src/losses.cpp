#include "pirt/losses.hpp"

#include <cmath>
#include <string>

#include "pirt/error.hpp"

namespace pirt {

void LossConfig::validate() const {
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be > 0");
  if (!(delta > 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be > 0");
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be >= 0");
}

ProxyPartition partition_sets(const std::vector<std::int64_t>& labels,
                              std::size_t num_proxies) {
  ProxyPartition part;
  part.positives.resize(num_proxies);
  part.negatives.resize(num_proxies);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::int64_t label = labels[i];
    if (label < 0 || static_cast<std::uint64_t>(label) >= num_proxies) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "label " + std::to_string(label) + " at sample " + std::to_string(i) +
                      " with " + std::to_string(num_proxies) + " proxies");
    }
  }
  for (std::size_t p = 0; p < num_proxies; ++p) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (static_cast<std::size_t>(labels[i]) == p) {
        part.positives[p].push_back(i);
      } else {
        part.negatives[p].push_back(i);
      }
    }
    if (!part.positives[p].empty()) part.positive_proxies.push_back(p);
  }
  return part;
}

namespace {

void check_shapes(const EmbeddingBatch& batch, const ProxyMatrix& proxies) {
  const Matrix& x = batch.embeddings;
  if (x.rows() != batch.labels.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                std::to_string(x.rows()) + " embeddings but " +
                    std::to_string(batch.labels.size()) + " labels");
  }
  if (x.cols() != proxies.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedding width " + std::to_string(x.cols()) + " vs proxy width " +
                    std::to_string(proxies.rows()));
  }
  if (proxies.cols() == 0) throw Error(ErrorCode::InvalidArgument, "no proxies");
}

}  // namespace

LossOutput proxy_anchor_loss(const EmbeddingBatch& batch, const ProxyMatrix& proxies,
                             const LossConfig& cfg) {
  cfg.validate();
  check_shapes(batch, proxies);
  const ProxyPartition part = partition_sets(batch.labels, proxies.cols());
  if (part.positive_proxies.empty()) {
    throw Error(ErrorCode::EmptyPositiveSet, "batch has no positive proxy");
  }

  const Matrix& x = batch.embeddings;
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  const std::size_t r = proxies.cols();
  const Matrix pt = transpose(proxies);  // r x d, row j = proxy j

  Vec x_norm(n), p_norm(r);
  for (std::size_t i = 0; i < n; ++i) {
    x_norm[i] = l2_norm(x.row(i));
    if (x_norm[i] == 0.0) {
      throw Error(ErrorCode::ZeroVector, "embedding " + std::to_string(i) + " is zero");
    }
  }
  for (std::size_t j = 0; j < r; ++j) {
    p_norm[j] = l2_norm(pt.row(j));
    if (p_norm[j] == 0.0) {
      throw Error(ErrorCode::ZeroVector, "proxy " + std::to_string(j) + " is zero");
    }
  }

  Matrix sim(n, r);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < r; ++j) sim(i, j) = cosine_similarity(x.row(i), pt.row(j));
  }

  // coeff(i, j) = dL / ds(x_i, p_j)
  Matrix coeff(n, r);
  const double pos_weight = 1.0 / static_cast<double>(part.positive_proxies.size());
  const double neg_weight = 1.0 / static_cast<double>(r);
  double pos_term = 0.0;
  for (std::size_t j : part.positive_proxies) {
    double sum = 0.0;
    for (std::size_t i : part.positives[j]) {
      const double e = std::exp(-cfg.alpha * (sim(i, j) - cfg.delta));
      coeff(i, j) = e;
      sum += e;
    }
    pos_term += std::log1p(sum);
    const double scale = -cfg.alpha * pos_weight / (1.0 + sum);
    for (std::size_t i : part.positives[j]) coeff(i, j) *= scale;
  }
  double neg_term = 0.0;
  for (std::size_t j = 0; j < r; ++j) {
    double sum = 0.0;
    for (std::size_t i : part.negatives[j]) {
      const double e = std::exp(cfg.alpha * (sim(i, j) + cfg.delta));
      coeff(i, j) = e;
      sum += e;
    }
    neg_term += std::log1p(sum);
    const double scale = cfg.alpha * neg_weight / (1.0 + sum);
    for (std::size_t i : part.negatives[j]) coeff(i, j) *= scale;
  }

  LossOutput out;
  out.value = pos_weight * pos_term + neg_weight * neg_term;
  out.grad_embeddings = Matrix(n, d);
  Matrix grad_pt(r, d);

  Matrix x_hat = x, p_hat = pt;
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x_hat.row(i)) v /= x_norm[i];
  }
  for (std::size_t j = 0; j < r; ++j) {
    for (double& v : p_hat.row(j)) v /= p_norm[j];
  }

  // ds/dx = (p_hat - s x_hat) / |x|,  ds/dp = (x_hat - s p_hat) / |p|
  for (std::size_t i = 0; i < n; ++i) {
    const auto xh = x_hat.row(i);
    auto gx = out.grad_embeddings.row(i);
    for (std::size_t j = 0; j < r; ++j) {
      const double c = coeff(i, j);
      if (c == 0.0) continue;
      const double s = sim(i, j);
      const auto ph = p_hat.row(j);
      auto gp = grad_pt.row(j);
      const double cx = c / x_norm[i];
      const double cp = c / p_norm[j];
      for (std::size_t k = 0; k < d; ++k) {
        gx[k] += cx * (ph[k] - s * xh[k]);
        gp[k] += cp * (xh[k] - s * ph[k]);
      }
    }
  }
  out.grad_proxies = transpose(grad_pt);
  return out;
}

LossOutput so_penalty(const ProxyMatrix& proxies) {
  Matrix residual = gram_matrix(proxies);
  for (std::size_t i = 0; i < residual.rows(); ++i) residual(i, i) -= 1.0;

  LossOutput out;
  out.value = frobenius_sq(residual);
  out.grad_embeddings = Matrix(0, proxies.rows());
  out.grad_proxies = matmul(proxies, residual);
  out.grad_proxies *= 4.0;
  return out;
}

LossOutput pirt_loss(const EmbeddingBatch& batch, const ProxyMatrix& proxies,
                     const LossConfig& cfg) {
  LossOutput out = proxy_anchor_loss(batch, proxies, cfg);
  if (cfg.lambda == 0.0) return out;
  LossOutput so = so_penalty(proxies);
  out.value += cfg.lambda * so.value;
  so.grad_proxies *= cfg.lambda;
  out.grad_proxies += so.grad_proxies;
  return out;
}

}  // namespace pirt
