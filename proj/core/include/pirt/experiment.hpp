#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pirt/eval.hpp"
#include "pirt/features.hpp"
#include "pirt/splits.hpp"
#include "pirt/trainer.hpp"

namespace pirt {

// Evaluation data. Without a gallery the queries retrieve among themselves
// with self exclusion.
struct EvalSets {
  TokenFeatureSet queries;
  std::optional<TokenFeatureSet> gallery;
};

struct Experiment {
  TokenFeatureSet train;
  EvalSets eval;
};

// Resolves the train / evaluation sets:
//  - a manifest selects train and test classes (and optionally query/gallery);
//  - holdout keeps the first k samples of each class for training;
//  - with neither, all samples train and are evaluated.
Experiment make_experiment(const TokenFeatureSet& all,
                           const std::optional<SplitManifest>& manifest,
                           std::optional<std::size_t> holdout);

RetrievalIndex build_index(const EvalSets& sets, const ProjectionHead& head,
                           PoolingMethod pooling);

MetricReport evaluate_head(const EvalSets& sets, const ProjectionHead& head,
                           PoolingMethod pooling);

struct SweepSpec {
  std::vector<std::size_t> embed_dims{64, 128, 256, 512, 1024};
  std::vector<PoolingMethod> poolings{PoolingMethod::Concat};
  std::vector<double> lambdas{0.001};

  std::size_t grid_size() const noexcept {
    return embed_dims.size() * lambdas.size() * poolings.size();
  }
};

struct SweepRow {
  std::size_t embed_dim = 0;
  double lambda = 0.0;
  PoolingMethod pooling = PoolingMethod::Concat;
  double p_at_1 = 0.0;
  double map_at_r = 0.0;
};

// Trains and evaluates every (dim, lambda, pooling) point. Points run on up to
// `jobs` threads; rows come back in grid order (dim, then lambda, then
// pooling) regardless of scheduling.
std::vector<SweepRow> run_sweep(const Experiment& experiment, const TrainConfig& base,
                                const SweepSpec& spec, std::size_t jobs = 1);

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows);

}  // namespace pirt
