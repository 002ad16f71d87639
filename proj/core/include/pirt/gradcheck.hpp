#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace pirt {

struct GradcheckConfig {
  std::size_t instances = 100;
  std::size_t max_samples = 16;
  std::size_t max_dim = 16;
  std::size_t max_proxies = 8;
  double step = 1e-5;       // central-difference step h
  double tolerance = 1e-5;  // on |analytic - numeric| / max(1, |analytic|)
  double alpha = 32.0;
  double delta = 0.1;
  double lambda = 0.001;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  std::string loss;  // "proxy_anchor", "so_penalty" or "pirt"
  std::size_t instances = 0;
  double max_rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckResult> results;
  double max_rel_error = 0.0;
  bool passed = false;
};

// Compares the analytic gradients of every loss against central finite
// differences on random instances.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace pirt
