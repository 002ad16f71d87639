#include "cli.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <optional>
#include <ostream>

#include "pirt/pirt.hpp"

namespace pirt::cli {

namespace {

struct DataOptions {
  std::string features;
  std::string splits;
  std::size_t holdout_per_class = 0;

  void add(CLI::App* app) {
    app->add_option("--features", features, "Feature file (PIRTFEA1 binary or CSV)")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--splits", splits, "Split manifest (JSON)")->check(CLI::ExistingFile);
    app->add_option("--holdout-per-class", holdout_per_class,
                    "Train on the first K samples of each class, evaluate on the rest");
  }

  Experiment load() const {
    const TokenFeatureSet all = load_features(features);
    std::optional<SplitManifest> manifest;
    if (!splits.empty()) manifest = load_split_manifest(splits);
    std::optional<std::size_t> holdout;
    if (holdout_per_class > 0) holdout = holdout_per_class;
    return make_experiment(all, manifest, holdout);
  }
};

struct TrainOptions {
  TrainConfig cfg;
  std::string pooling = "concat";

  TrainConfig resolve() const {
    TrainConfig out = cfg;
    out.pooling = *parse_pooling(pooling);
    return out;
  }
};

void add_train_options(CLI::App* app, TrainOptions& opts) {
  TrainConfig& cfg = opts.cfg;
  app->add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app->add_option("--embed-dim", cfg.embed_dim, "Embedding dimension")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--pooling", opts.pooling, "Token pooling")
      ->check(CLI::IsMember({"concat", "mean", "cls", "dist"}))
      ->capture_default_str();
  app->add_option("--alpha", cfg.loss.alpha, "Proxy Anchor scaling factor")->capture_default_str();
  app->add_option("--delta", cfg.loss.delta, "Proxy Anchor margin")->capture_default_str();
  app->add_option("--lambda", cfg.loss.lambda, "Soft-orthogonality weight")->capture_default_str();
  app->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
  app->add_option("--batch-size", cfg.batch_size, "Mini-batch size")->capture_default_str();
  app->add_option("--lr", cfg.optim.base_lr, "Base learning rate")->capture_default_str();
  app->add_option("--weight-decay", cfg.optim.weight_decay, "AdamW weight decay")
      ->capture_default_str();
  app->add_option("--proxy-lr-mult", cfg.optim.proxy_lr_multiplier,
                  "Learning-rate multiplier for proxies")
      ->capture_default_str();
  app->add_option("--warmup-epochs", cfg.optim.warmup_epochs, "Linear warm-up epochs")
      ->capture_default_str();
  app->add_option("--step-size", cfg.optim.step_size, "StepLR period in epochs")
      ->capture_default_str();
  app->add_option("--gamma", cfg.optim.gamma, "StepLR decay factor")->capture_default_str();
}

void print_report(std::ostream& out, const MetricReport& report) {
  out << "P@1    " << format_number(report.p_at_1) << '\n'
      << "MAP@R  " << format_number(report.map_at_r) << '\n'
      << "queries " << report.per_query.size() << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Proxy Anchor + soft-orthogonality metric learning over frozen token features",
               "pirt"};
  app.require_subcommand(1);

  // synth
  SyntheticConfig synth_cfg;
  std::string synth_out;
  std::string synth_format = "auto";
  auto* synth = app.add_subcommand("synth", "Write a synthetic clustered feature file");
  synth->add_option("--out", synth_out, "Output path")->required();
  synth->add_option("--classes", synth_cfg.classes, "Number of classes")->capture_default_str();
  synth->add_option("--per-class", synth_cfg.per_class, "Samples per class")
      ->capture_default_str();
  synth->add_option("--dim", synth_cfg.token_dim, "Token width D")->capture_default_str();
  synth->add_option("--spread", synth_cfg.cluster_spread, "Per-coordinate noise scale")
      ->capture_default_str();
  synth->add_option("--seed", synth_cfg.seed, "Random seed")->capture_default_str();
  synth->add_option("--format", synth_format, "bin, csv, or auto (from extension)")
      ->check(CLI::IsMember({"auto", "bin", "csv"}))
      ->capture_default_str();

  // train
  TrainOptions train_opts;
  DataOptions train_data;
  std::string train_out;
  std::string train_log;
  auto* train_cmd = app.add_subcommand("train", "Train the projection head and proxies");
  train_data.add(train_cmd);
  train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
  train_cmd->add_option("--log", train_log, "Per-epoch log CSV (default: <out>.log.csv)");
  add_train_options(train_cmd, train_opts);

  // eval
  DataOptions eval_data;
  std::string eval_ckpt;
  std::string eval_out;
  std::string eval_per_query;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint with P@1 and MAP@R");
  eval_data.add(eval_cmd);
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Metric report CSV");
  eval_cmd->add_option("--per-query", eval_per_query, "Per-query metric CSV");

  // gradcheck
  GradcheckConfig gc_cfg;
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of all loss gradients");
  gc->add_option("--instances", gc_cfg.instances, "Random instances")->capture_default_str();
  gc->add_option("--seed", gc_cfg.seed, "Random seed")->capture_default_str();
  gc->add_option("--step", gc_cfg.step, "Central-difference step")->capture_default_str();
  gc->add_option("--tol", gc_cfg.tolerance, "Max relative error")->capture_default_str();
  gc->add_option("--alpha", gc_cfg.alpha, "Proxy Anchor scaling factor")->capture_default_str();
  gc->add_option("--delta", gc_cfg.delta, "Proxy Anchor margin")->capture_default_str();
  gc->add_option("--lambda", gc_cfg.lambda, "Soft-orthogonality weight")->capture_default_str();

  // sweep
  TrainOptions sweep_opts;
  DataOptions sweep_data;
  std::string sweep_out;
  std::vector<std::size_t> sweep_dims{64, 128, 256, 512, 1024};
  std::vector<double> sweep_lambdas{0.001};
  std::vector<std::string> sweep_poolings{"concat"};
  std::size_t sweep_jobs = 1;
  auto* sweep = app.add_subcommand("sweep", "Train and evaluate over a dim x lambda x pooling grid");
  sweep_data.add(sweep);
  sweep->add_option("--out", sweep_out, "Sweep CSV")->required();
  sweep->add_option("--dims", sweep_dims, "Embedding dimensions")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--lambdas", sweep_lambdas, "Soft-orthogonality weights")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--poolings", sweep_poolings, "Pooling methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"concat", "mean", "cls", "dist"}))
      ->capture_default_str();
  sweep->add_option("--jobs", sweep_jobs, "Grid points trained concurrently")
      ->capture_default_str();
  add_train_options(sweep, sweep_opts);

  // proxy-stats
  std::string stats_ckpt;
  auto* stats = app.add_subcommand("proxy-stats", "Print proxy geometry of a checkpoint");
  stats->add_option("--checkpoint", stats_ckpt, "Checkpoint path")
      ->required()
      ->check(CLI::ExistingFile);

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "pirt: " << e.what() << '\n';
    if (const auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << "Run 'pirt " << sub->get_name() << " --help' for usage.\n";
    } else {
      err << "Run 'pirt --help' for usage.\n";
    }
    return kUsage;
  }

  try {
    if (*synth) {
      const TokenFeatureSet set = generate_synthetic(synth_cfg);
      const bool csv = synth_format == "csv" ||
                       (synth_format == "auto" && synth_out.size() >= 4 &&
                        synth_out.compare(synth_out.size() - 4, 4, ".csv") == 0);
      if (csv) {
        write_features_csv(synth_out, set);
      } else {
        write_features(synth_out, set);
      }
      out << "wrote " << set.size() << " samples (" << synth_cfg.classes << " classes, D="
          << synth_cfg.token_dim << ") to " << synth_out << '\n';
      return kOk;
    }

    if (*train_cmd) {
      const TrainConfig train_cfg = train_opts.resolve();
      const Experiment exp = train_data.load();
      const TrainResult result = train(exp.train, train_cfg);
      save_checkpoint(train_out, Checkpoint{train_cfg, result.state});
      const std::string log_path = train_log.empty() ? train_out + ".log.csv" : train_log;
      write_train_log_csv(log_path, result.log);
      out << "trained on " << exp.train.size() << " samples, " << result.state.class_ids.size()
          << " proxies, " << result.log.epochs.size() << " epochs\n";
      if (!result.log.epochs.empty()) {
        const EpochRecord& last = result.log.epochs.back();
        out << "final loss " << format_number(last.mean_loss) << ", SO penalty "
            << format_number(result.log.initial_so_penalty) << " -> "
            << format_number(last.so_penalty) << '\n';
      }
      out << "checkpoint: " << train_out << "\nlog: " << log_path << '\n';
      return kOk;
    }

    if (*eval_cmd) {
      const Experiment exp = eval_data.load();
      const Checkpoint ckpt = load_checkpoint(eval_ckpt);
      const std::size_t pooled = pooled_width(ckpt.config.pooling, exp.eval.queries.token_dim);
      if (ckpt.state.head.input_dim() != pooled) {
        throw Error(ErrorCode::ConfigMismatch,
                    "checkpoint expects pooled width " +
                        std::to_string(ckpt.state.head.input_dim()) + ", features give " +
                        std::to_string(pooled));
      }
      const RetrievalIndex index = build_index(exp.eval, ckpt.state.head, ckpt.config.pooling);
      const MetricReport report = evaluate(index);
      print_report(out, report);
      if (!eval_out.empty()) write_metric_report(eval_out, report);
      if (!eval_per_query.empty()) write_per_query_csv(eval_per_query, index, report);
      return kOk;
    }

    if (*gc) {
      const GradcheckReport report = run_gradcheck(gc_cfg);
      for (const auto& r : report.results) {
        out << std::left << std::setw(14) << r.loss << " instances " << r.instances
            << "  max rel. error " << format_number(r.max_rel_error) << '\n';
      }
      out << "max rel. error " << format_number(report.max_rel_error) << " (tolerance "
          << format_number(gc_cfg.tolerance) << "): " << (report.passed ? "PASS" : "FAIL")
          << '\n';
      return report.passed ? kOk : kCheckFailed;
    }

    if (*sweep) {
      const Experiment exp = sweep_data.load();
      SweepSpec spec;
      spec.embed_dims = sweep_dims;
      spec.lambdas = sweep_lambdas;
      spec.poolings.clear();
      for (const auto& name : sweep_poolings) spec.poolings.push_back(*parse_pooling(name));
      const auto rows = run_sweep(exp, sweep_opts.resolve(), spec, sweep_jobs);
      write_sweep_csv(sweep_out, rows);
      out << "wrote " << rows.size() << " grid points to " << sweep_out << '\n';
      return kOk;
    }

    if (*stats) {
      const Checkpoint ckpt = load_checkpoint(stats_ckpt);
      const ProxyStats s = proxy_stats(ckpt.state.proxies);
      out << "proxies               " << ckpt.state.proxies.cols() << " x d="
          << ckpt.state.proxies.rows() << '\n'
          << "so_penalty            " << format_number(s.so_penalty) << '\n'
          << "max_offdiag_cosine    " << format_number(s.max_offdiag_cosine) << '\n'
          << "mean_offdiag_cosine   " << format_number(s.mean_offdiag_cosine) << '\n'
          << "min_norm              " << format_number(s.min_norm) << '\n'
          << "max_norm              " << format_number(s.max_norm) << '\n';
      return kOk;
    }
  } catch (const Error& e) {
    err << "pirt: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    err << "pirt: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsage;
}

}  // namespace pirt::cli
