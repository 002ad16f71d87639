#include "pirt/trainer.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <unordered_map>

#include "pirt/csv.hpp"
#include "pirt/error.hpp"

namespace pirt {

void TrainConfig::validate() const {
  if (batch_size < 2) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 2");
  if (embed_dim < 1) throw Error(ErrorCode::InvalidArgument, "embed_dim must be >= 1");
  loss.validate();
  optim.validate();
}

bool TrainLog::same_trajectory(const TrainLog& other) const {
  auto bits = [](double x) { return std::bit_cast<std::uint64_t>(x); };
  if (bits(initial_so_penalty) != bits(other.initial_so_penalty) ||
      bits(initial_max_offdiag_gram) != bits(other.initial_max_offdiag_gram) ||
      epochs.size() != other.epochs.size() || steps.size() != other.steps.size()) {
    return false;
  }
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    const EpochRecord& a = epochs[i];
    const EpochRecord& b = other.epochs[i];
    if (a.epoch != b.epoch || bits(a.mean_loss) != bits(b.mean_loss) ||
        bits(a.so_penalty) != bits(b.so_penalty) ||
        bits(a.max_offdiag_gram) != bits(b.max_offdiag_gram) ||
        bits(a.head_lr) != bits(b.head_lr) || bits(a.proxy_lr) != bits(b.proxy_lr)) {
      return false;
    }
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const StepRecord& a = steps[i];
    const StepRecord& b = other.steps[i];
    if (a.epoch != b.epoch || a.batch != b.batch || bits(a.loss) != bits(b.loss)) return false;
  }
  return true;
}

void write_train_log_csv(const std::string& path, const TrainLog& log) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "epoch,loss,so_penalty,max_offdiag_gram,head_lr,proxy_lr,wall_seconds\n";
  for (const EpochRecord& e : log.epochs) {
    out << e.epoch << ',' << format_number(e.mean_loss) << ',' << format_number(e.so_penalty)
        << ',' << format_number(e.max_offdiag_gram) << ',' << format_number(e.head_lr) << ','
        << format_number(e.proxy_lr) << ',' << format_number(e.wall_seconds) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed on '" + path + "'");
}

std::vector<std::vector<std::size_t>> sample_batches(std::size_t num_samples,
                                                     std::size_t batch_size,
                                                     std::uint64_t seed, std::uint32_t epoch) {
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (batch_size > num_samples) {
    throw Error(ErrorCode::BatchTooLarge,
                "batch size " + std::to_string(batch_size) + " exceeds " +
                    std::to_string(num_samples) + " samples");
  }
  std::vector<std::size_t> order(num_samples);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed + epoch);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < num_samples; start += batch_size) {
    const std::size_t end = std::min(num_samples, start + batch_size);
    if (end - start < 2) break;
    batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the combined value
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<std::int64_t> class_ids_of(const TokenFeatureSet& features) {
  const std::set<std::int64_t> ids(features.labels.begin(), features.labels.end());
  return {ids.begin(), ids.end()};
}

TrainState init_train_state(const TokenFeatureSet& features, const TrainConfig& cfg) {
  cfg.validate();
  features.validate();
  TrainState state;
  state.class_ids = class_ids_of(features);
  const std::size_t pooled_dim = pooled_width(cfg.pooling, features.token_dim);
  state.head = init_projection(pooled_dim, cfg.embed_dim, derive_seed(cfg.seed, 0));
  state.proxies = init_proxies(state.class_ids.size(), cfg.embed_dim, derive_seed(cfg.seed, 1));
  state.optim = make_optim_state(state.head.weights.size(), state.head.bias.size(),
                                 state.proxies.size());
  return state;
}

namespace {

double max_offdiag(const Matrix& gram) {
  double best = 0.0;
  for (std::size_t i = 0; i < gram.rows(); ++i) {
    for (std::size_t j = 0; j < gram.cols(); ++j) {
      if (i != j) best = std::max(best, std::abs(gram(i, j)));
    }
  }
  return best;
}

}  // namespace

Matrix embed(const TokenFeatureSet& features, const ProjectionHead& head,
             PoolingMethod pooling) {
  return project_batch(head, pool_features(features, pooling));
}

TrainResult train(const TokenFeatureSet& features, const TrainConfig& cfg,
                  const StepObserver& observer) {
  TrainResult result;
  TrainState& state = result.state;
  state = init_train_state(features, cfg);

  std::unordered_map<std::int64_t, std::int64_t> proxy_of;
  for (std::size_t j = 0; j < state.class_ids.size(); ++j) {
    proxy_of[state.class_ids[j]] = static_cast<std::int64_t>(j);
  }

  // Pooling is fixed for the whole run, so pool every sample once.
  const Matrix pooled_all = pool_features(features, cfg.pooling);
  const std::size_t pooled_dim = pooled_all.cols();

  result.log.initial_so_penalty = so_penalty(state.proxies).value;
  result.log.initial_max_offdiag_gram = max_offdiag(gram_matrix(state.proxies));

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto batches = sample_batches(features.size(), cfg.batch_size, cfg.seed, epoch);

    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& idx = batches[b];
      Matrix pooled(idx.size(), pooled_dim);
      EmbeddingBatch batch;
      batch.labels.reserve(idx.size());
      for (std::size_t row = 0; row < idx.size(); ++row) {
        auto src = pooled_all.row(idx[row]);
        std::copy(src.begin(), src.end(), pooled.row(row).begin());
        batch.labels.push_back(proxy_of.at(features.labels[idx[row]]));
      }
      batch.embeddings = project_batch(state.head, pooled);

      const LossOutput loss = pirt_loss(batch, state.proxies, cfg.loss);
      if (!std::isfinite(loss.value)) {
        throw Error(ErrorCode::NonFiniteValue,
                    "objective diverged at epoch " + std::to_string(epoch));
      }
      if (observer) observer(StepContext{epoch, b, idx, batch, state, loss.value});
      result.log.steps.push_back({epoch, b, loss.value});
      loss_sum += loss.value;

      const ProjectionGrad head_grad = project_backward(pooled, loss.grad_embeddings);
      grouped_step(HeadParams{state.head.weights, state.head.bias, state.proxies},
                   HeadGrads{head_grad.weights, head_grad.bias, loss.grad_proxies},
                   state.optim, epoch, cfg.optim);
    }

    ++state.epochs_completed;
    EpochRecord rec;
    rec.epoch = epoch;
    rec.mean_loss = loss_sum / static_cast<double>(batches.size());
    rec.so_penalty = so_penalty(state.proxies).value;
    rec.max_offdiag_gram = max_offdiag(gram_matrix(state.proxies));
    rec.head_lr = scheduled_lr(cfg.optim, epoch);
    rec.proxy_lr = rec.head_lr * cfg.optim.proxy_lr_multiplier;
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(rec);
  }
  return result;
}

}  // namespace pirt
