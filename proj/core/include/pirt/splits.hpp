#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pirt/features.hpp"

namespace pirt {

// Category-level split: training and test classes are disjoint. Optional
// query/gallery sample lists (indices into the feature file) select an
// In-Shop style evaluation with separate query and gallery sets.
//
// JSON form:
//   {"train_classes": [...], "test_classes": [...],
//    "query_samples": [...], "gallery_samples": [...]}
struct SplitManifest {
  std::vector<std::int64_t> train_classes;
  std::vector<std::int64_t> test_classes;
  std::optional<std::vector<std::size_t>> query_samples;
  std::optional<std::vector<std::size_t>> gallery_samples;

  // Throws SplitOverlap if a class appears in both train and test.
  void validate() const;
};

SplitManifest load_split_manifest(const std::string& path);
void save_split_manifest(const std::string& path, const SplitManifest& manifest);

// Indices of samples whose label is in `classes`, ascending.
std::vector<std::size_t> samples_in_classes(const TokenFeatureSet& set,
                                            const std::vector<std::int64_t>& classes);

struct SampleSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Same-class holdout: the first `train_per_class` samples of every class (in
// file order) train, the rest are held out.
SampleSplit holdout_per_class(const TokenFeatureSet& set, std::size_t train_per_class);

}  // namespace pirt
