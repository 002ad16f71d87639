#include "pirt/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "pirt/losses.hpp"

namespace pirt {

namespace {

double max_rel_error(const Matrix& analytic, Matrix& param,
                     const std::function<double()>& objective, double h) {
  double worst = 0.0;
  auto values = param.data();
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double saved = values[k];
    values[k] = saved + h;
    const double plus = objective();
    values[k] = saved - h;
    const double minus = objective();
    values[k] = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double a = analytic.data()[k];
    worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a)));
  }
  return worst;
}

}  // namespace

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto uniform = [&](std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
  };

  GradcheckResult pa{"proxy_anchor"}, so{"so_penalty"}, pirt{"pirt"};
  const LossConfig loss_cfg{cfg.alpha, cfg.delta, cfg.lambda};

  for (std::size_t inst = 0; inst < cfg.instances; ++inst) {
    const std::size_t n = uniform(1, cfg.max_samples);
    const std::size_t d = uniform(std::min<std::size_t>(2, cfg.max_dim), cfg.max_dim);
    const std::size_t r = uniform(1, cfg.max_proxies);

    EmbeddingBatch batch;
    batch.embeddings = Matrix(n, d);
    for (double& v : batch.embeddings.data()) v = normal(rng);
    for (std::size_t i = 0; i < n; ++i) {
      batch.labels.push_back(static_cast<std::int64_t>(uniform(0, r - 1)));
    }
    Matrix proxies(d, r);
    for (double& v : proxies.data()) v = normal(rng) / std::sqrt(static_cast<double>(d));

    {
      const LossOutput out = proxy_anchor_loss(batch, proxies, loss_cfg);
      auto f = [&] { return proxy_anchor_loss(batch, proxies, loss_cfg).value; };
      pa.max_rel_error = std::max({pa.max_rel_error,
                                   max_rel_error(out.grad_embeddings, batch.embeddings, f, cfg.step),
                                   max_rel_error(out.grad_proxies, proxies, f, cfg.step)});
      ++pa.instances;
    }
    {
      const LossOutput out = so_penalty(proxies);
      auto f = [&] { return so_penalty(proxies).value; };
      so.max_rel_error =
          std::max(so.max_rel_error, max_rel_error(out.grad_proxies, proxies, f, cfg.step));
      ++so.instances;
    }
    {
      const LossOutput out = pirt_loss(batch, proxies, loss_cfg);
      auto f = [&] { return pirt_loss(batch, proxies, loss_cfg).value; };
      pirt.max_rel_error = std::max({pirt.max_rel_error,
                                     max_rel_error(out.grad_embeddings, batch.embeddings, f, cfg.step),
                                     max_rel_error(out.grad_proxies, proxies, f, cfg.step)});
      ++pirt.instances;
    }
  }

  GradcheckReport report;
  report.results = {pa, so, pirt};
  for (const auto& r : report.results) {
    report.max_rel_error = std::max(report.max_rel_error, r.max_rel_error);
  }
  report.passed = report.max_rel_error < cfg.tolerance;
  return report;
}

}  // namespace pirt
