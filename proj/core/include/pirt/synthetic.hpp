#pragma once

#include <cstddef>
#include <cstdint>

#include "pirt/features.hpp"

namespace pirt {

struct SyntheticConfig {
  std::size_t classes = 8;
  std::size_t per_class = 40;
  std::size_t token_dim = 64;
  double cluster_spread = 0.15;
  std::uint64_t seed = 0;
};

// Gaussian clusters around class centers drawn uniformly on the unit sphere of
// R^D. Each sample gets CLS and DIST tokens, each the center plus independent
// N(0, spread^2) noise. Samples are ordered class by class.
TokenFeatureSet generate_synthetic(const SyntheticConfig& cfg);

}  // namespace pirt
