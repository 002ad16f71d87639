#include "pirt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <thread>

#include "pirt/csv.hpp"
#include "pirt/error.hpp"

namespace pirt {

Experiment make_experiment(const TokenFeatureSet& all,
                           const std::optional<SplitManifest>& manifest,
                           std::optional<std::size_t> holdout) {
  all.validate();
  if (manifest && holdout) {
    throw Error(ErrorCode::InvalidArgument,
                "a split manifest and a per-class holdout are mutually exclusive");
  }
  Experiment exp;
  if (manifest) {
    manifest->validate();
    exp.train = all.subset(samples_in_classes(all, manifest->train_classes));
    if (manifest->query_samples) {
      exp.eval.queries = all.subset(*manifest->query_samples);
      exp.eval.gallery = all.subset(*manifest->gallery_samples);
    } else {
      exp.eval.queries = all.subset(samples_in_classes(all, manifest->test_classes));
    }
  } else if (holdout) {
    const SampleSplit split = holdout_per_class(all, *holdout);
    exp.train = all.subset(split.train);
    exp.eval.queries = all.subset(split.test);
  } else {
    exp.train = all;
    exp.eval.queries = all;
  }
  if (exp.train.size() == 0) throw Error(ErrorCode::InvalidArgument, "training split is empty");
  if (exp.eval.queries.size() == 0) {
    throw Error(ErrorCode::InvalidArgument, "evaluation split is empty");
  }
  return exp;
}

RetrievalIndex build_index(const EvalSets& sets, const ProjectionHead& head,
                           PoolingMethod pooling) {
  Matrix queries = embed(sets.queries, head, pooling);
  if (!sets.gallery) return RetrievalIndex::self_retrieval(std::move(queries), sets.queries.labels);
  return RetrievalIndex::query_gallery(std::move(queries), sets.queries.labels,
                                       embed(*sets.gallery, head, pooling),
                                       sets.gallery->labels);
}

MetricReport evaluate_head(const EvalSets& sets, const ProjectionHead& head,
                           PoolingMethod pooling) {
  return evaluate(build_index(sets, head, pooling));
}

std::vector<SweepRow> run_sweep(const Experiment& experiment, const TrainConfig& base,
                                const SweepSpec& spec, std::size_t jobs) {
  std::vector<SweepRow> rows;
  for (std::size_t dim : spec.embed_dims) {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "sweep dims must be >= 1");
    for (double lambda : spec.lambdas) {
      for (PoolingMethod pooling : spec.poolings) {
        rows.push_back({dim, lambda, pooling, 0.0, 0.0});
      }
    }
  }

  std::vector<std::exception_ptr> errors(rows.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        TrainConfig cfg = base;
        cfg.embed_dim = rows[i].embed_dim;
        cfg.loss.lambda = rows[i].lambda;
        cfg.pooling = rows[i].pooling;
        const TrainResult trained = train(experiment.train, cfg);
        const MetricReport report = evaluate_head(experiment.eval, trained.state.head, cfg.pooling);
        rows[i].p_at_1 = report.p_at_1;
        rows[i].map_at_r = report.map_at_r;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(rows.size(), 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "embed_dim,lambda,pooling,p_at_1,map_at_r\n";
  for (const SweepRow& r : rows) {
    out << r.embed_dim << ',' << format_number(r.lambda) << ',' << to_string(r.pooling) << ','
        << format_number(r.p_at_1) << ',' << format_number(r.map_at_r) << '\n';
  }
  if (!out) throw Error(ErrorCode::Io, "write failed on '" + path + "'");
}

}  // namespace pirt
