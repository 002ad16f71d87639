#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "pirt/features.hpp"
#include "pirt/trainer.hpp"
#include "temp_dir.hpp"

namespace pirt {
namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run pirt_cmd(std::vector<std::string> args) {
  args.insert(args.begin(), "pirt");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto r = pirt_cmd({"synth", "--out", features(), "--classes", "4", "--per-class", "10",
                             "--dim", "8", "--seed", "2"});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
  }
  std::string features() const { return dir.file("f.bin"); }

  testing::TempDir dir;
};

TEST_F(CliTest, SynthWritesLoadableFile) {
  const auto set = load_features(features());
  EXPECT_EQ(set.size(), 40u);
  EXPECT_EQ(set.token_dim, 8u);
  const auto csv = pirt_cmd({"synth", "--out", dir.file("f.csv"), "--classes", "4", "--per-class",
                             "10", "--dim", "8", "--seed", "2"});
  ASSERT_EQ(csv.code, cli::kOk) << csv.err;
  EXPECT_EQ(slurp(dir.file("f.csv")).rfind("label,tok,f_0", 0), 0u);
  EXPECT_EQ(load_features(dir.file("f.csv")), set);
}

TEST_F(CliTest, TrainEvalProxyStats) {
  const auto train = pirt_cmd({"train", "--features", features(), "--holdout-per-class", "5",
                               "--out", dir.file("m.ckpt"), "--embed-dim", "6", "--epochs", "3",
                               "--batch-size", "8", "--pooling", "mean", "--lambda", "0.01"});
  ASSERT_EQ(train.code, cli::kOk) << train.err;
  const auto ckpt = load_checkpoint(dir.file("m.ckpt"));
  EXPECT_EQ(ckpt.config.embed_dim, 6u);
  EXPECT_EQ(ckpt.config.pooling, PoolingMethod::Mean);
  EXPECT_EQ(ckpt.config.loss.lambda, 0.01);
  EXPECT_EQ(count_lines(slurp(dir.file("m.ckpt.log.csv"))), 4u);

  const auto eval = pirt_cmd({"eval", "--features", features(), "--holdout-per-class", "5",
                              "--checkpoint", dir.file("m.ckpt"), "--out", dir.file("m.csv"),
                              "--per-query", dir.file("q.csv")});
  ASSERT_EQ(eval.code, cli::kOk) << eval.err;
  const std::string report = slurp(dir.file("m.csv"));
  EXPECT_EQ(report.rfind("metric,value\np_at_1,", 0), 0u);
  EXPECT_EQ(count_lines(slurp(dir.file("q.csv"))), 21u);

  const auto stats = pirt_cmd({"proxy-stats", "--checkpoint", dir.file("m.ckpt")});
  ASSERT_EQ(stats.code, cli::kOk) << stats.err;
  EXPECT_NE(stats.out.find("so_penalty"), std::string::npos);
}

TEST_F(CliTest, TrainIsDeterministic) {
  for (const char* name : {"a.ckpt", "b.ckpt"}) {
    const auto r = pirt_cmd({"train", "--features", features(), "--out", dir.file(name),
                             "--embed-dim", "4", "--epochs", "2", "--batch-size", "8",
                             "--seed", "9", "--log", dir.file(std::string(name) + ".csv")});
    ASSERT_EQ(r.code, cli::kOk) << r.err;
  }
  EXPECT_EQ(slurp(dir.file("a.ckpt")), slurp(dir.file("b.ckpt")));
}

TEST_F(CliTest, EvalRejectsMismatchedFeatures) {
  ASSERT_EQ(pirt_cmd({"train", "--features", features(), "--out", dir.file("m.ckpt"),
                      "--embed-dim", "4", "--epochs", "1", "--batch-size", "8"})
                .code,
            cli::kOk);
  ASSERT_EQ(pirt_cmd({"synth", "--out", dir.file("g.bin"), "--dim", "5"}).code, cli::kOk);
  const auto r = pirt_cmd({"eval", "--features", dir.file("g.bin"), "--checkpoint",
                           dir.file("m.ckpt")});
  EXPECT_EQ(r.code, cli::kRuntimeError);
  EXPECT_NE(r.err.find("pooled width"), std::string::npos);
}

TEST_F(CliTest, SplitManifest) {
  std::ofstream(dir.file("s.json")) << R"({"train_classes": [0, 1], "test_classes": [2, 3]})";
  const auto r = pirt_cmd({"train", "--features", features(), "--splits", dir.file("s.json"),
                           "--out", dir.file("m.ckpt"), "--embed-dim", "4", "--epochs", "1",
                           "--batch-size", "8"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(load_checkpoint(dir.file("m.ckpt")).state.class_ids,
            (std::vector<std::int64_t>{0, 1}));

  std::ofstream(dir.file("bad.json")) << R"({"train_classes": [0, 1], "test_classes": [1]})";
  const auto bad = pirt_cmd({"train", "--features", features(), "--splits", dir.file("bad.json"),
                             "--out", dir.file("x.ckpt")});
  EXPECT_EQ(bad.code, cli::kRuntimeError);
}

TEST_F(CliTest, SweepRowCount) {
  const auto r = pirt_cmd({"sweep", "--features", features(), "--holdout-per-class", "5",
                           "--out", dir.file("s.csv"), "--dims", "64,512", "--lambdas",
                           "0,0.001,0.01", "--poolings", "concat,cls", "--epochs", "1",
                           "--batch-size", "8", "--jobs", "3"});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  EXPECT_EQ(count_lines(slurp(dir.file("s.csv"))), 1u + 2u * 3u * 2u);
}

TEST(Cli, GradcheckPasses) {
  const auto r = pirt_cmd({"gradcheck", "--instances", "20"});
  EXPECT_EQ(r.code, cli::kOk) << r.out << r.err;
  EXPECT_NE(r.out.find("PASS"), std::string::npos);
}

TEST(Cli, GradcheckFailsOnImpossibleTolerance) {
  const auto r = pirt_cmd({"gradcheck", "--instances", "5", "--tol", "1e-30"});
  EXPECT_EQ(r.code, cli::kCheckFailed);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(pirt_cmd({}).code, cli::kUsage);
  EXPECT_EQ(pirt_cmd({"bogus"}).code, cli::kUsage);
  EXPECT_EQ(pirt_cmd({"train"}).code, cli::kUsage);
  const auto r = pirt_cmd({"gradcheck", "--instances", "many"});
  EXPECT_EQ(r.code, cli::kUsage);
  EXPECT_FALSE(r.err.empty());
  testing::TempDir dir;
  EXPECT_EQ(pirt_cmd({"synth", "--out", dir.file("x"), "--format", "xml"}).code, cli::kUsage);
}

TEST(Cli, UnknownPoolingIsUsageError) {
  testing::TempDir dir;
  ASSERT_EQ(pirt_cmd({"synth", "--out", dir.file("f.bin")}).code, cli::kOk);
  EXPECT_EQ(pirt_cmd({"train", "--features", dir.file("f.bin"), "--out", dir.file("m.ckpt"),
                      "--pooling", "max"})
                .code,
            cli::kUsage);
}

TEST(Cli, HelpExitsZero) {
  const auto r = pirt_cmd({"--help"});
  EXPECT_EQ(r.code, cli::kOk);
  EXPECT_NE(r.out.find("gradcheck"), std::string::npos);
}

}  // namespace
}  // namespace pirt
