#include "pirt/optimizer.hpp"

#include <cmath>
#include <string>

#include "pirt/error.hpp"

namespace pirt {

void OptimConfig::validate() const {
  if (!(base_lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "base_lr must be > 0");
  if (!(weight_decay >= 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "weight_decay must be >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidArgument, "eps must be > 0");
  if (step_size == 0) throw Error(ErrorCode::InvalidArgument, "step_size must be >= 1");
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 1]");
  }
  if (!(proxy_lr_multiplier >= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "proxy_lr_multiplier must be >= 1");
  }
}

double scheduled_lr(const OptimConfig& cfg, std::uint32_t epoch) {
  const double decay = std::pow(cfg.gamma, static_cast<double>(epoch / cfg.step_size));
  double ramp = 1.0;
  if (epoch < cfg.warmup_epochs) {
    ramp = static_cast<double>(epoch + 1) / static_cast<double>(cfg.warmup_epochs);
  }
  return cfg.base_lr * decay * ramp;
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                double lr, double beta1, double beta2, double eps, double weight_decay) {
  if (params.size() != grads.size() || state.m.size() != params.size() ||
      state.v.size() != params.size()) {
    throw Error(ErrorCode::ShapeMismatch,
                "adamw_step: params " + std::to_string(params.size()) + ", grads " +
                    std::to_string(grads.size()) + ", state " +
                    std::to_string(state.m.size()));
  }
  if (!(lr > 0.0)) throw Error(ErrorCode::InvalidArgument, "learning rate must be > 0");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(beta1, t);
  const double bias2 = 1.0 - std::pow(beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * g;
    state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * g * g;
    const double m_hat = state.m[i] / bias1;
    const double v_hat = state.v[i] / bias2;
    params[i] -= lr * (m_hat / (std::sqrt(v_hat) + eps)) + lr * weight_decay * params[i];
  }
}

void adamw_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                double lr, const OptimConfig& cfg) {
  adamw_step(params, grads, state, lr, cfg.beta1, cfg.beta2, cfg.eps, cfg.weight_decay);
}

HeadOptimState make_optim_state(std::size_t weights_size, std::size_t bias_size,
                                std::size_t proxies_size) {
  return {AdamState(weights_size), AdamState(bias_size), AdamState(proxies_size)};
}

void grouped_step(const HeadParams& params, const HeadGrads& grads, HeadOptimState& state,
                  std::uint32_t epoch, const OptimConfig& cfg) {
  const double lr = scheduled_lr(cfg, epoch);
  const double proxy_lr = lr * cfg.proxy_lr_multiplier;
  adamw_step(params.weights.data(), grads.weights.data(), state.weights, lr, cfg.beta1,
             cfg.beta2, cfg.eps, cfg.weight_decay);
  adamw_step(params.bias, grads.bias, state.bias, lr, cfg.beta1, cfg.beta2, cfg.eps, 0.0);
  adamw_step(params.proxies.data(), grads.proxies.data(), state.proxies, proxy_lr, cfg.beta1,
             cfg.beta2, cfg.eps, 0.0);
}

}  // namespace pirt
