#include "pirt/splits.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "pirt/error.hpp"

namespace pirt {

void SplitManifest::validate() const {
  const std::set<std::int64_t> train(train_classes.begin(), train_classes.end());
  for (std::int64_t c : test_classes) {
    if (train.count(c) != 0) {
      throw Error(ErrorCode::SplitOverlap,
                  "class " + std::to_string(c) + " is in both train and test");
    }
  }
  if (query_samples.has_value() != gallery_samples.has_value()) {
    throw Error(ErrorCode::InvalidArgument,
                "query_samples and gallery_samples must be given together");
  }
}

SplitManifest load_split_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open split manifest '" + path + "'");
  SplitManifest m;
  try {
    const auto j = nlohmann::json::parse(in);
    m.train_classes = j.at("train_classes").get<std::vector<std::int64_t>>();
    m.test_classes = j.at("test_classes").get<std::vector<std::int64_t>>();
    if (j.contains("query_samples")) {
      m.query_samples = j.at("query_samples").get<std::vector<std::size_t>>();
    }
    if (j.contains("gallery_samples")) {
      m.gallery_samples = j.at("gallery_samples").get<std::vector<std::size_t>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedFile, "split manifest '" + path + "': " + e.what());
  }
  m.validate();
  return m;
}

void save_split_manifest(const std::string& path, const SplitManifest& manifest) {
  manifest.validate();
  nlohmann::json j;
  j["train_classes"] = manifest.train_classes;
  j["test_classes"] = manifest.test_classes;
  if (manifest.query_samples) j["query_samples"] = *manifest.query_samples;
  if (manifest.gallery_samples) j["gallery_samples"] = *manifest.gallery_samples;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

std::vector<std::size_t> samples_in_classes(const TokenFeatureSet& set,
                                            const std::vector<std::int64_t>& classes) {
  const std::set<std::int64_t> wanted(classes.begin(), classes.end());
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (wanted.count(set.labels[i]) != 0) out.push_back(i);
  }
  return out;
}

SampleSplit holdout_per_class(const TokenFeatureSet& set, std::size_t train_per_class) {
  std::map<std::int64_t, std::size_t> seen;
  SampleSplit split;
  for (std::size_t i = 0; i < set.size(); ++i) {
    std::size_t& count = seen[set.labels[i]];
    (count < train_per_class ? split.train : split.test).push_back(i);
    ++count;
  }
  return split;
}

}  // namespace pirt
