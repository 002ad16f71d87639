#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "pirt/features.hpp"
#include "pirt/head.hpp"
#include "pirt/losses.hpp"
#include "pirt/optimizer.hpp"

namespace pirt {

struct TrainConfig {
  std::uint32_t epochs = 30;
  std::size_t batch_size = 128;
  std::size_t embed_dim = 512;
  PoolingMethod pooling = PoolingMethod::Concat;
  LossConfig loss;
  OptimConfig optim;
  std::uint64_t seed = 0;

  void validate() const;

  friend bool operator==(const TrainConfig& a, const TrainConfig& b) {
    return a.epochs == b.epochs && a.batch_size == b.batch_size &&
           a.embed_dim == b.embed_dim && a.pooling == b.pooling &&
           a.loss.alpha == b.loss.alpha && a.loss.delta == b.loss.delta &&
           a.loss.lambda == b.loss.lambda && a.optim == b.optim && a.seed == b.seed;
  }
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double mean_loss = 0.0;         // mean pre-step objective over the epoch's batches
  double so_penalty = 0.0;        // after the epoch's last step
  double max_offdiag_gram = 0.0;  // max |p_i^T p_j|, i != j, after the last step
  double head_lr = 0.0;
  double proxy_lr = 0.0;
  double wall_seconds = 0.0;
};

struct StepRecord {
  std::uint32_t epoch = 0;
  std::size_t batch = 0;
  double loss = 0.0;
};

struct TrainLog {
  double initial_so_penalty = 0.0;
  double initial_max_offdiag_gram = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<StepRecord> steps;

  // Bitwise comparison of every recorded quantity except wall-clock time.
  bool same_trajectory(const TrainLog& other) const;
};

void write_train_log_csv(const std::string& path, const TrainLog& log);

struct TrainState {
  ProjectionHead head;
  ProxyMatrix proxies;  // embed_dim x num_classes
  HeadOptimState optim;
  std::vector<std::int64_t> class_ids;  // proxy j represents class_ids[j]
  std::uint32_t epochs_completed = 0;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

struct TrainResult {
  TrainState state;
  TrainLog log;
};

// Seen by a StepObserver before the optimizer step is applied.
struct StepContext {
  std::uint32_t epoch;
  std::size_t batch;
  std::span<const std::size_t> samples;  // indices into the training set
  const EmbeddingBatch& embeddings;
  const TrainState& state;  // parameters the loss was evaluated with
  double loss;
};

using StepObserver = std::function<void(const StepContext&)>;

// Per-epoch shuffle seeded by seed + epoch, cut into consecutive batches. A
// trailing batch of a single sample is dropped.
std::vector<std::vector<std::size_t>> sample_batches(std::size_t num_samples,
                                                     std::size_t batch_size,
                                                     std::uint64_t seed, std::uint32_t epoch);

// Independent, reproducible seed for a named sub-stream of `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

// Sorted distinct labels; proxy j is assigned to the j-th class.
std::vector<std::int64_t> class_ids_of(const TokenFeatureSet& features);

// Fresh head, proxies and optimizer state for `features` under `cfg`.
TrainState init_train_state(const TokenFeatureSet& features, const TrainConfig& cfg);

// Trains the projection head and proxies with the proxy-anchor + SO objective.
TrainResult train(const TokenFeatureSet& features, const TrainConfig& cfg,
                  const StepObserver& observer = {});

// Embeds every sample of `features` with the trained head.
Matrix embed(const TokenFeatureSet& features, const ProjectionHead& head,
             PoolingMethod pooling);

// ---------------------------------------------------------------------------
// Checkpoints

inline constexpr char kCheckpointMagic[8] = {'P', 'I', 'R', 'T', 'C', 'K', 'P', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  TrainConfig config;
  TrainState state;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Layout (little-endian): "PIRTCKP1" | u32 version | config block |
// u32 epochs_completed | u64 r | i64 class_ids[r] | shaped f64 arrays for the
// head weights, bias, proxies and the three Adam states.
void save_checkpoint(const std::string& path, const Checkpoint& checkpoint);

Checkpoint load_checkpoint(const std::string& path);

// As above, additionally throwing ConfigMismatch if the stored embedding or
// pooled width differs from the expected one.
Checkpoint load_checkpoint(const std::string& path, std::size_t expected_embed_dim,
                           std::size_t expected_pooled_dim);

}  // namespace pirt
