#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "pirt/csv.hpp"
#include "pirt/error.hpp"
#include "pirt/experiment.hpp"
#include "pirt/features.hpp"
#include "pirt/splits.hpp"
#include "pirt/synthetic.hpp"
#include "temp_dir.hpp"

namespace pirt {
namespace {

TokenFeatureSet random_set(std::size_t n, std::size_t dim, std::uint8_t tokens,
                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 3.0f);
  TokenFeatureSet set;
  set.token_dim = dim;
  set.tokens_per_sample = tokens;
  for (std::size_t i = 0; i < n; ++i) set.labels.push_back(static_cast<std::int64_t>(i % 5) * 1000);
  set.features.resize(n * tokens * dim);
  for (float& v : set.features) v = normal(rng);
  set.features[0] = std::numeric_limits<float>::denorm_min();
  set.features[1] = -0.0f;
  return set;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

TEST(Features, BinaryRoundTripIsBitExact) {
  testing::TempDir dir;
  for (std::uint8_t tokens : {1, 2}) {
    const auto set = random_set(17, 9, tokens, tokens);
    write_features(dir.file("f.bin"), set);
    const auto back = load_features(dir.file("f.bin"));
    EXPECT_EQ(back.labels, set.labels);
    EXPECT_EQ(back.tokens_per_sample, tokens);
    ASSERT_EQ(back.features.size(), set.features.size());
    EXPECT_EQ(std::memcmp(back.features.data(), set.features.data(),
                          set.features.size() * sizeof(float)),
              0);
  }
}

TEST(Features, BinaryHeaderLayout) {
  testing::TempDir dir;
  const auto set = random_set(3, 4, 2, 0);
  write_features(dir.file("f.bin"), set);
  EXPECT_EQ(std::filesystem::file_size(dir.file("f.bin")),
            8u + 4 + 8 + 4 + 1 + 3 + 3 * 8 + 3 * 2 * 4 * 4);
  std::ifstream in(dir.file("f.bin"), std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  EXPECT_EQ(std::string(magic, 8), "PIRTFEA1");
}

TEST(Features, CsvRoundTripIsBitExact) {
  testing::TempDir dir;
  for (std::uint8_t tokens : {1, 2}) {
    const auto set = random_set(11, 6, tokens, 40 + tokens);
    write_features_csv(dir.file("f.csv"), set);
    const auto back = load_features(dir.file("f.csv"));
    EXPECT_EQ(back.labels, set.labels);
    ASSERT_EQ(back.features.size(), set.features.size());
    EXPECT_EQ(std::memcmp(back.features.data(), set.features.data(),
                          set.features.size() * sizeof(float)),
              0);
  }
}

TEST(Features, CsvExample) {
  const auto set = parse_features_csv(
      "label,tok,f_0,f_1\n3,cls,1,2\n3,dist,0.5,-1\n7,cls,0,1e-3\n7,dist,4,5\n");
  EXPECT_EQ(set.size(), 2u);
  EXPECT_EQ(set.tokens_per_sample, 2);
  EXPECT_EQ(set.labels, (std::vector<std::int64_t>{3, 7}));
  EXPECT_EQ(set.token(1, 0)[1], 1e-3f);
  EXPECT_EQ(set.token(0, 1)[0], 0.5f);
}

TEST(Features, CsvNanReportsRow) {
  try {
    parse_features_csv("label,tok,f_0,f_1\n0,cls,1,2\n0,dist,1,2\n1,cls,nan,2\n1,dist,1,2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFiniteValue);
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("f_0"), std::string::npos) << e.what();
  }
}

TEST(Features, CsvErrors) {
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,cls\n"); }), ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_1\n0,cls,1\n"); }), ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,foo,1\n"); }), ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,cls,x\n"); }), ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,cls,1\n0,dist,1\n1,cls,1\n"); }),
            ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,cls,1\n1,dist,1\n"); }),
            ErrorCode::CSVParse);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n0,cls,inf\n"); }),
            ErrorCode::NonFiniteValue);
  EXPECT_EQ(code_of([] { parse_features_csv("label,tok,f_0\n-1,cls,1\n"); }),
            ErrorCode::LabelOutOfRange);
}

TEST(Features, BinaryErrors) {
  testing::TempDir dir;
  const auto set = random_set(4, 3, 2, 1);
  write_features(dir.file("good.bin"), set);
  std::ifstream in(dir.file("good.bin"), std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), {});

  std::string wrong_magic = bytes;
  wrong_magic[0] = 'X';
  write_text(dir.file("magic.bin"), wrong_magic);
  EXPECT_EQ(code_of([&] { load_features(dir.file("magic.bin")); }), ErrorCode::BadMagic);

  std::string version = bytes;
  version[8] = 2;
  write_text(dir.file("version.bin"), version);
  EXPECT_EQ(code_of([&] { load_features(dir.file("version.bin")); }),
            ErrorCode::VersionMismatch);

  write_text(dir.file("short.bin"), bytes.substr(0, bytes.size() - 1));
  EXPECT_EQ(code_of([&] { load_features(dir.file("short.bin")); }), ErrorCode::TruncatedFile);
  write_text(dir.file("tiny.bin"), "PIR");
  EXPECT_EQ(code_of([&] { load_features(dir.file("tiny.bin")); }), ErrorCode::TruncatedFile);

  write_text(dir.file("long.bin"), bytes + "x");
  EXPECT_EQ(code_of([&] { load_features(dir.file("long.bin")); }), ErrorCode::MalformedFile);

  std::string nan = bytes;
  const float bad = std::numeric_limits<float>::quiet_NaN();
  std::memcpy(nan.data() + bytes.size() - 4, &bad, 4);
  write_text(dir.file("nan.bin"), nan);
  EXPECT_EQ(code_of([&] { load_features(dir.file("nan.bin")); }), ErrorCode::NonFiniteValue);

  EXPECT_EQ(code_of([&] { load_features(dir.file("missing.bin")); }), ErrorCode::Io);
}

TEST(Features, PoolingSingleTokenOnlyCls) {
  const auto set = random_set(3, 4, 1, 2);
  EXPECT_EQ(pool_features(set, PoolingMethod::Cls).cols(), 4u);
  EXPECT_THROW(pool_features(set, PoolingMethod::Concat), Error);
  EXPECT_THROW(pool_features(set, PoolingMethod::Mean), Error);
}

TEST(Features, PoolingWidensTokens) {
  const auto set = random_set(3, 4, 2, 3);
  const Matrix concat = pool_features(set, PoolingMethod::Concat);
  ASSERT_EQ(concat.cols(), 8u);
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_EQ(concat(2, k), static_cast<double>(set.token(2, 0)[k]));
    EXPECT_EQ(concat(2, 4 + k), static_cast<double>(set.token(2, 1)[k]));
  }
  const std::vector<std::size_t> pick{2, 0};
  const Matrix sub = pool_features(set, PoolingMethod::Dist, pick);
  EXPECT_EQ(sub(0, 1), static_cast<double>(set.token(2, 1)[1]));
}

TEST(Features, SubsetKeepsOrder) {
  const auto set = random_set(6, 2, 2, 4);
  const std::vector<std::size_t> pick{5, 1};
  const auto sub = set.subset(pick);
  EXPECT_EQ(sub.labels, (std::vector<std::int64_t>{set.labels[5], set.labels[1]}));
  EXPECT_EQ(sub.token(0, 1)[1], set.token(5, 1)[1]);
}

TEST(Splits, JsonRoundTrip) {
  testing::TempDir dir;
  SplitManifest m{{0, 1, 2}, {3, 4}, std::vector<std::size_t>{7, 8}, std::vector<std::size_t>{9}};
  save_split_manifest(dir.file("s.json"), m);
  const auto back = load_split_manifest(dir.file("s.json"));
  EXPECT_EQ(back.train_classes, m.train_classes);
  EXPECT_EQ(back.test_classes, m.test_classes);
  EXPECT_EQ(back.query_samples, m.query_samples);
  EXPECT_EQ(back.gallery_samples, m.gallery_samples);
}

TEST(Splits, RejectsOverlap) {
  testing::TempDir dir;
  write_text(dir.file("s.json"), R"({"train_classes": [0, 1], "test_classes": [1, 2]})");
  EXPECT_EQ(code_of([&] { load_split_manifest(dir.file("s.json")); }), ErrorCode::SplitOverlap);
}

TEST(Splits, MalformedJson) {
  testing::TempDir dir;
  write_text(dir.file("a.json"), "{\"train_classes\": [0,");
  EXPECT_EQ(code_of([&] { load_split_manifest(dir.file("a.json")); }), ErrorCode::MalformedFile);
  write_text(dir.file("b.json"), R"({"train_classes": [0]})");
  EXPECT_EQ(code_of([&] { load_split_manifest(dir.file("b.json")); }), ErrorCode::MalformedFile);
  write_text(dir.file("c.json"),
             R"({"train_classes": [0], "test_classes": [1], "query_samples": [0]})");
  EXPECT_THROW(load_split_manifest(dir.file("c.json")), Error);
}

TEST(Splits, SamplesInClassesAndHoldout) {
  TokenFeatureSet set;
  set.token_dim = 1;
  set.tokens_per_sample = 1;
  set.labels = {2, 0, 2, 1, 0, 2};
  set.features.assign(6, 1.0f);
  EXPECT_EQ(samples_in_classes(set, {2, 1}), (std::vector<std::size_t>{0, 2, 3, 5}));
  const auto split = holdout_per_class(set, 1);
  EXPECT_EQ(split.train, (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(split.test, (std::vector<std::size_t>{2, 4, 5}));
}

TEST(Synthetic, ZeroSpreadGivesIdenticalClassTokens) {
  SyntheticConfig cfg;
  cfg.cluster_spread = 0.0;
  const auto set = generate_synthetic(cfg);
  EXPECT_EQ(set.size(), 8u * 40u);
  for (std::size_t i = 1; i < set.size(); ++i) {
    if (set.labels[i] != set.labels[i - 1]) continue;
    const auto a = set.token(i, 0), b = set.token(i - 1, 0);
    EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin()));
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  SyntheticConfig cfg;
  EXPECT_EQ(generate_synthetic(cfg), generate_synthetic(cfg));
  auto other = cfg;
  other.seed = 1;
  EXPECT_FALSE(generate_synthetic(cfg) == generate_synthetic(other));
}

TEST(Synthetic, TokensHaveIndependentNoise) {
  const auto set = generate_synthetic(SyntheticConfig{});
  const auto cls = set.token(0, 0), dist = set.token(0, 1);
  EXPECT_FALSE(std::equal(cls.begin(), cls.end(), dist.begin()));
}

TEST(Synthetic, NearestCenterClassifierOnRawCls) {
  SyntheticConfig cfg;
  cfg.cluster_spread = 0.05;
  cfg.seed = 5;
  const auto set = generate_synthetic(cfg);
  // Class centers estimated from the data, then nearest-center by Euclidean distance.
  std::vector<Vec> centers(cfg.classes, Vec(cfg.token_dim, 0.0));
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto t = set.token(i, 0);
    for (std::size_t k = 0; k < cfg.token_dim; ++k) centers[set.labels[i]][k] += t[k];
  }
  for (auto& c : centers) for (double& v : c) v /= static_cast<double>(cfg.per_class);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto t = set.token(i, 0);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < centers.size(); ++c) {
      double d = 0.0;
      for (std::size_t k = 0; k < cfg.token_dim; ++k) d += std::pow(t[k] - centers[c][k], 2);
      if (d < best_d) best_d = d, best = c;
    }
    correct += static_cast<std::int64_t>(best) == set.labels[i] ? 1 : 0;
  }
  EXPECT_GT(static_cast<double>(correct) / static_cast<double>(set.size()), 0.99);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1), "0.1");
  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = normal(rng);
    EXPECT_EQ(std::stod(format_number(x)), x);
  }
}

TEST(Experiment, HoldoutAndManifest) {
  SyntheticConfig cfg;
  cfg.classes = 4;
  cfg.per_class = 6;
  cfg.token_dim = 8;
  const auto all = generate_synthetic(cfg);

  const auto holdout = make_experiment(all, std::nullopt, 2);
  EXPECT_EQ(holdout.train.size(), 8u);
  EXPECT_EQ(holdout.eval.queries.size(), 16u);
  EXPECT_FALSE(holdout.eval.gallery);

  const SplitManifest manifest{{0, 1}, {2, 3}, std::nullopt, std::nullopt};
  const auto split = make_experiment(all, manifest, std::nullopt);
  for (auto l : split.train.labels) EXPECT_LT(l, 2);
  for (auto l : split.eval.queries.labels) EXPECT_GE(l, 2);

  const SplitManifest inshop{{0, 1}, {2, 3}, std::vector<std::size_t>{12, 18},
                             std::vector<std::size_t>{13, 14, 19, 20}};
  const auto qg = make_experiment(all, inshop, std::nullopt);
  ASSERT_TRUE(qg.eval.gallery);
  EXPECT_EQ(qg.eval.gallery->size(), 4u);

  EXPECT_THROW(make_experiment(all, manifest, 2), Error);
}

TEST(Sweep, GridRowsInOrder) {
  SyntheticConfig s;
  s.classes = 3;
  s.per_class = 8;
  s.token_dim = 8;
  const auto exp = make_experiment(generate_synthetic(s), std::nullopt, 4);
  TrainConfig base;
  base.epochs = 2;
  base.batch_size = 6;
  SweepSpec spec;
  spec.embed_dims = {64, 4};
  spec.lambdas = {0.0, 0.01};
  spec.poolings = {PoolingMethod::Concat, PoolingMethod::Mean, PoolingMethod::Cls};
  const auto serial = run_sweep(exp, base, spec, 1);
  const auto parallel = run_sweep(exp, base, spec, 4);
  ASSERT_EQ(serial.size(), 2u * 2u * 3u);
  ASSERT_EQ(parallel.size(), serial.size());
  std::size_t i = 0;
  for (std::size_t dim : spec.embed_dims) {
    for (double lambda : spec.lambdas) {
      for (PoolingMethod p : spec.poolings) {
        EXPECT_EQ(serial[i].embed_dim, dim);
        EXPECT_EQ(serial[i].lambda, lambda);
        EXPECT_EQ(serial[i].pooling, p);
        EXPECT_EQ(parallel[i].p_at_1, serial[i].p_at_1);
        EXPECT_EQ(parallel[i].map_at_r, serial[i].map_at_r);
        ++i;
      }
    }
  }
  testing::TempDir dir;
  write_sweep_csv(dir.file("s.csv"), serial);
  std::ifstream in(dir.file("s.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "embed_dim,lambda,pooling,p_at_1,map_at_r");
}

}  // namespace
}  // namespace pirt
