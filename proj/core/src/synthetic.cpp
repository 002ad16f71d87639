#include "pirt/synthetic.hpp"

#include <random>

#include "pirt/error.hpp"

namespace pirt {

TokenFeatureSet generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.classes < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 classes");
  if (cfg.per_class < 2) {
    throw Error(ErrorCode::InvalidArgument, "need at least 2 samples per class");
  }
  if (cfg.token_dim == 0) throw Error(ErrorCode::InvalidArgument, "token width must be >= 1");
  if (!(cfg.cluster_spread >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "cluster spread must be >= 0");
  }

  const ProxyMatrix centers = init_proxies(cfg.classes, cfg.token_dim, cfg.seed);
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> noise(0.0, 1.0);

  TokenFeatureSet set;
  set.token_dim = cfg.token_dim;
  set.tokens_per_sample = 2;
  set.labels.reserve(cfg.classes * cfg.per_class);
  set.features.reserve(cfg.classes * cfg.per_class * 2 * cfg.token_dim);
  for (std::size_t c = 0; c < cfg.classes; ++c) {
    for (std::size_t s = 0; s < cfg.per_class; ++s) {
      set.labels.push_back(static_cast<std::int64_t>(c));
      for (int tok = 0; tok < 2; ++tok) {
        for (std::size_t k = 0; k < cfg.token_dim; ++k) {
          const double v = centers(k, c) + cfg.cluster_spread * noise(rng);
          set.features.push_back(static_cast<float>(v));
        }
      }
    }
  }
  return set;
}

}  // namespace pirt
