#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

#include "pirt/linalg.hpp"

namespace pirt {

struct OptimConfig {
  double base_lr = 1e-4;
  double weight_decay = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint32_t step_size = 5;  // epochs between decays
  double gamma = 0.5;
  std::uint32_t warmup_epochs = 5;
  double proxy_lr_multiplier = 100.0;

  void validate() const;

  friend bool operator==(const OptimConfig&, const OptimConfig&) = default;
};

// First and second moment accumulators for one parameter tensor.
struct AdamState {
  Vec m;
  Vec v;
  std::uint64_t step = 0;

  explicit AdamState(std::size_t size = 0) : m(size, 0.0), v(size, 0.0) {}

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// StepLR decay times a linear warm-up ramp:
//   base_lr * gamma^floor(epoch / step_size) * min(1, (epoch + 1) / warmup_epochs)
double scheduled_lr(const OptimConfig& cfg, std::uint32_t epoch);

// One AdamW update with bias correction and decoupled weight decay:
//   param <- param - lr * m_hat / (sqrt(v_hat) + eps) - lr * weight_decay * param
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                double lr, double beta1, double beta2, double eps, double weight_decay);

// Convenience overload taking hyperparameters from cfg.
void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                double lr, const OptimConfig& cfg);

// Trainable parameters of the model top, grouped for the optimizer.
struct HeadParams {
  Matrix& weights;
  Vec& bias;
  Matrix& proxies;
};

struct HeadGrads {
  const Matrix& weights;
  const Vec& bias;
  const Matrix& proxies;
};

struct HeadOptimState {
  AdamState weights;
  AdamState bias;
  AdamState proxies;

  friend bool operator==(const HeadOptimState&, const HeadOptimState&) = default;
};

HeadOptimState make_optim_state(std::size_t weights_size, std::size_t bias_size,
                                std::size_t proxies_size);

// Head weights and bias step at scheduled_lr(epoch); proxies at
// scheduled_lr(epoch) * proxy_lr_multiplier. Weight decay applies to the head
// weights only.
void grouped_step(const HeadParams& params, const HeadGrads& grads, HeadOptimState& state,
                  std::uint32_t epoch, const OptimConfig& cfg);

}  // namespace pirt
