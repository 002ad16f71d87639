#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pirt/head.hpp"
#include "pirt/linalg.hpp"

namespace pirt {

// Per-sample token states of a frozen backbone. tokens_per_sample is 2 for
// CLS + DIST, 1 for a backbone with a single class token. Features are stored
// sample-major, CLS before DIST, in single precision.
struct TokenFeatureSet {
  std::size_t token_dim = 0;
  std::uint8_t tokens_per_sample = 2;
  std::vector<std::int64_t> labels;
  std::vector<float> features;

  std::size_t size() const noexcept { return labels.size(); }

  std::span<const float> token(std::size_t sample, std::size_t tok) const {
    return {features.data() + (sample * tokens_per_sample + tok) * token_dim, token_dim};
  }

  TokenPair token_pair(std::size_t sample) const;

  // Throws on inconsistent sizes, negative labels or non-finite features.
  void validate() const;

  TokenFeatureSet subset(std::span<const std::size_t> indices) const;

  friend bool operator==(const TokenFeatureSet&, const TokenFeatureSet&) = default;
};

// Pools the selected samples into an n x pooled_width matrix (widened to
// double). Single-token sets only support CLS pooling.
Matrix pool_features(const TokenFeatureSet& set, PoolingMethod method,
                     std::span<const std::size_t> indices);
Matrix pool_features(const TokenFeatureSet& set, PoolingMethod method);

inline constexpr char kFeatureMagic[8] = {'P', 'I', 'R', 'T', 'F', 'E', 'A', '1'};
inline constexpr std::uint32_t kFeatureVersion = 1;

// Binary layout (little-endian):
//   "PIRTFEA1" | u32 version | u64 n | u32 D | u8 tokens_per_sample | u8[3] 0
//   | i64 labels[n] | f32 features[n * tokens_per_sample * D]
void write_features(const std::string& path, const TokenFeatureSet& set);

// CSV layout: header label,tok,f_0..f_{D-1}; one row per token, tok in
// {cls, dist}, rows of one sample adjacent with CLS first.
void write_features_csv(const std::string& path, const TokenFeatureSet& set);

// Reads either format. A file starting with the binary magic is parsed as
// binary, one starting with "label," as CSV; anything else is BadMagic.
TokenFeatureSet load_features(const std::string& path);

TokenFeatureSet parse_features_csv(const std::string& text);

}  // namespace pirt
