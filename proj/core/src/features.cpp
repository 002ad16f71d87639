#include "pirt/features.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>

#include "binary_io.hpp"
#include "pirt/error.hpp"

namespace pirt {

TokenPair TokenFeatureSet::token_pair(std::size_t sample) const {
  auto cls = token(sample, 0);
  auto dist = tokens_per_sample > 1 ? token(sample, 1) : cls;
  return {Vec(cls.begin(), cls.end()), Vec(dist.begin(), dist.end())};
}

void TokenFeatureSet::validate() const {
  if (labels.empty()) throw Error(ErrorCode::InvalidArgument, "feature set is empty");
  if (token_dim == 0) throw Error(ErrorCode::InvalidArgument, "token width must be >= 1");
  if (tokens_per_sample != 1 && tokens_per_sample != 2) {
    throw Error(ErrorCode::InvalidArgument,
                "tokens_per_sample must be 1 or 2, got " +
                    std::to_string(tokens_per_sample));
  }
  if (features.size() != labels.size() * tokens_per_sample * token_dim) {
    throw Error(ErrorCode::ShapeMismatch,
                "feature payload has " + std::to_string(features.size()) + " values, expected " +
                    std::to_string(labels.size() * tokens_per_sample * token_dim));
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0) {
      throw Error(ErrorCode::LabelOutOfRange,
                  "negative label " + std::to_string(labels[i]) + " at sample " +
                      std::to_string(i));
    }
  }
  const std::size_t per_sample = tokens_per_sample * token_dim;
  for (std::size_t k = 0; k < features.size(); ++k) {
    if (!std::isfinite(features[k])) {
      throw Error(ErrorCode::NonFiniteValue,
                  "non-finite feature in sample " + std::to_string(k / per_sample));
    }
  }
}

TokenFeatureSet TokenFeatureSet::subset(std::span<const std::size_t> indices) const {
  TokenFeatureSet out;
  out.token_dim = token_dim;
  out.tokens_per_sample = tokens_per_sample;
  const std::size_t per_sample = tokens_per_sample * token_dim;
  out.labels.reserve(indices.size());
  out.features.reserve(indices.size() * per_sample);
  for (std::size_t i : indices) {
    if (i >= size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "sample index " + std::to_string(i) + " out of range");
    }
    out.labels.push_back(labels[i]);
    auto first = features.begin() + static_cast<std::ptrdiff_t>(i * per_sample);
    out.features.insert(out.features.end(), first,
                        first + static_cast<std::ptrdiff_t>(per_sample));
  }
  return out;
}

Matrix pool_features(const TokenFeatureSet& set, PoolingMethod method,
                     std::span<const std::size_t> indices) {
  if (set.tokens_per_sample == 1 && method != PoolingMethod::Cls) {
    throw Error(ErrorCode::InvalidArgument,
                "single-token features only support cls pooling, got " +
                    std::string(to_string(method)));
  }
  const std::size_t d = set.token_dim;
  Matrix out(indices.size(), pooled_width(method, d));
  for (std::size_t row = 0; row < indices.size(); ++row) {
    const std::size_t i = indices[row];
    auto dst = out.row(row);
    auto cls = set.token(i, 0);
    switch (method) {
      case PoolingMethod::Concat: {
        auto dist = set.token(i, 1);
        for (std::size_t k = 0; k < d; ++k) {
          dst[k] = cls[k];
          dst[d + k] = dist[k];
        }
        break;
      }
      case PoolingMethod::Mean: {
        auto dist = set.token(i, 1);
        for (std::size_t k = 0; k < d; ++k) {
          dst[k] = (static_cast<double>(cls[k]) + static_cast<double>(dist[k])) / 2.0;
        }
        break;
      }
      case PoolingMethod::Cls:
        for (std::size_t k = 0; k < d; ++k) dst[k] = cls[k];
        break;
      case PoolingMethod::Dist: {
        auto dist = set.token(i, 1);
        for (std::size_t k = 0; k < d; ++k) dst[k] = dist[k];
        break;
      }
    }
  }
  return out;
}

Matrix pool_features(const TokenFeatureSet& set, PoolingMethod method) {
  std::vector<std::size_t> all(set.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  return pool_features(set, method, all);
}

void write_features(const std::string& path, const TokenFeatureSet& set) {
  set.validate();
  detail::ByteWriter w;
  w.bytes(kFeatureMagic, sizeof kFeatureMagic);
  w.scalar<std::uint32_t>(kFeatureVersion);
  w.scalar<std::uint64_t>(set.size());
  w.scalar<std::uint32_t>(static_cast<std::uint32_t>(set.token_dim));
  w.scalar<std::uint8_t>(set.tokens_per_sample);
  for (int i = 0; i < 3; ++i) w.scalar<std::uint8_t>(0);
  w.array<std::int64_t>(set.labels);
  w.array<float>(set.features);
  detail::write_file(path, w.buffer());
}

namespace {

TokenFeatureSet parse_features_binary(std::span<const std::uint8_t> bytes) {
  auto on_short = [](std::size_t pos, std::size_t n) {
    throw Error(ErrorCode::TruncatedFile,
                "feature file ends at byte " + std::to_string(pos) + " while reading " +
                    std::to_string(n) + " bytes");
  };
  detail::ByteReader reader(bytes, on_short);
  char magic[8];
  reader.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kFeatureMagic, sizeof magic) != 0) {
    throw Error(ErrorCode::BadMagic, "not a PIRTFEA1 feature file");
  }
  const auto version = reader.scalar<std::uint32_t>();
  if (version != kFeatureVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "feature file version " + std::to_string(version) + ", expected " +
                    std::to_string(kFeatureVersion));
  }
  const auto n = reader.scalar<std::uint64_t>();
  TokenFeatureSet set;
  set.token_dim = reader.scalar<std::uint32_t>();
  set.tokens_per_sample = reader.scalar<std::uint8_t>();
  for (int i = 0; i < 3; ++i) reader.scalar<std::uint8_t>();
  if (set.tokens_per_sample != 1 && set.tokens_per_sample != 2) {
    throw Error(ErrorCode::MalformedFile,
                "tokens_per_sample " + std::to_string(set.tokens_per_sample));
  }

  // Check the declared sizes against the file length before allocating.
  const std::uint64_t payload_values = n * set.tokens_per_sample * set.token_dim;
  const long double needed = static_cast<long double>(n) * 8.0L +
                             static_cast<long double>(payload_values) * 4.0L;
  if (needed > static_cast<long double>(reader.remaining())) {
    throw Error(ErrorCode::TruncatedFile,
                "header declares " + std::to_string(n) + " samples but the payload is short");
  }
  set.labels.resize(n);
  reader.array<std::int64_t>(set.labels);
  set.features.resize(payload_values);
  reader.array<float>(set.features);
  if (reader.remaining() != 0) {
    throw Error(ErrorCode::MalformedFile,
                std::to_string(reader.remaining()) + " trailing bytes after payload");
  }
  set.validate();
  return set;
}

std::string_view trim_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

// from_chars does not accept a leading '+'. Out-of-range magnitudes come back
// as infinity so the caller reports them as non-finite.
bool parse_float(std::string_view text, float& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec == std::errc::result_out_of_range) {
    out = std::numeric_limits<float>::infinity();
    return ptr == last;
  }
  return ec == std::errc() && ptr == last;
}

}  // namespace

TokenFeatureSet parse_features_csv(const std::string& text) {
  std::string_view rest(text);
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (rest.empty()) return false;
    const std::size_t nl = rest.find('\n');
    line = trim_cr(rest.substr(0, nl));
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& what) -> Error {
    return Error(ErrorCode::CSVParse, "line " + std::to_string(line_no) + ": " + what);
  };

  std::string_view line;
  if (!next_line(line)) throw Error(ErrorCode::CSVParse, "empty CSV");
  const auto header = split_commas(line);
  if (header.size() < 3 || header[0] != "label" || header[1] != "tok") {
    throw fail("header must start with label,tok,f_0");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t k = 0; k < dim; ++k) {
    if (header[k + 2] != "f_" + std::to_string(k)) {
      throw fail("expected column f_" + std::to_string(k));
    }
  }

  struct Row {
    std::int64_t label;
    bool is_dist;
    std::size_t line;
  };
  std::vector<Row> rows;
  std::vector<float> values;
  std::size_t data_row = 0;
  while (next_line(line)) {
    if (line.empty()) continue;
    ++data_row;
    const auto fields = split_commas(line);
    if (fields.size() != dim + 2) {
      throw fail("expected " + std::to_string(dim + 2) + " fields, got " +
                 std::to_string(fields.size()));
    }
    std::int64_t label = 0;
    auto [ptr, ec] =
        std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), label);
    if (ec != std::errc() || ptr != fields[0].data() + fields[0].size()) {
      throw fail("bad label '" + std::string(fields[0]) + "'");
    }
    if (fields[1] != "cls" && fields[1] != "dist") {
      throw fail("tok must be cls or dist, got '" + std::string(fields[1]) + "'");
    }
    for (std::size_t k = 0; k < dim; ++k) {
      float v = 0.0f;
      if (!parse_float(fields[k + 2], v)) {
        throw fail("bad value '" + std::string(fields[k + 2]) + "' in f_" + std::to_string(k));
      }
      if (!std::isfinite(v)) {
        throw Error(ErrorCode::NonFiniteValue,
                    "row " + std::to_string(data_row) + " (line " + std::to_string(line_no) +
                        "), column f_" + std::to_string(k));
      }
      values.push_back(v);
    }
    rows.push_back({label, fields[1] == "dist", line_no});
  }
  if (rows.empty()) throw Error(ErrorCode::CSVParse, "CSV has no data rows");

  bool any_dist = false;
  for (const Row& row : rows) any_dist = any_dist || row.is_dist;

  TokenFeatureSet set;
  set.token_dim = dim;
  set.tokens_per_sample = any_dist ? 2 : 1;
  if (any_dist) {
    if (rows.size() % 2 != 0) {
      throw Error(ErrorCode::CSVParse, "odd number of token rows for CLS+DIST features");
    }
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      if (rows[i].is_dist || !rows[i + 1].is_dist) {
        throw Error(ErrorCode::CSVParse,
                    "line " + std::to_string(rows[i].line) + ": expected a cls row followed by a dist row");
      }
      if (rows[i].label != rows[i + 1].label) {
        throw Error(ErrorCode::CSVParse,
                    "line " + std::to_string(rows[i + 1].line) + ": dist label differs from cls label");
      }
      set.labels.push_back(rows[i].label);
    }
  } else {
    for (const Row& row : rows) set.labels.push_back(row.label);
  }
  set.features = std::move(values);
  set.validate();
  return set;
}

void write_features_csv(const std::string& path, const TokenFeatureSet& set) {
  set.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out << "label,tok";
  for (std::size_t k = 0; k < set.token_dim; ++k) out << ",f_" << k;
  out << '\n';
  char buf[64];
  for (std::size_t i = 0; i < set.size(); ++i) {
    for (std::size_t t = 0; t < set.tokens_per_sample; ++t) {
      out << set.labels[i] << (t == 0 ? ",cls" : ",dist");
      for (float v : set.token(i, t)) {
        // Shortest representation that parses back to the same float.
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << ',' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
      }
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::Io, "write failed on '" + path + "'");
}

TokenFeatureSet load_features(const std::string& path) {
  const auto bytes = detail::read_file(path);
  if (bytes.size() >= sizeof kFeatureMagic &&
      std::memcmp(bytes.data(), kFeatureMagic, sizeof kFeatureMagic) == 0) {
    return parse_features_binary(bytes);
  }
  constexpr std::string_view kCsvPrefix = "label,";
  if (bytes.size() >= kCsvPrefix.size() &&
      std::memcmp(bytes.data(), kCsvPrefix.data(), kCsvPrefix.size()) == 0) {
    return parse_features_csv(std::string(bytes.begin(), bytes.end()));
  }
  if (bytes.size() < sizeof kFeatureMagic) {
    throw Error(ErrorCode::TruncatedFile, "'" + path + "' is shorter than the file magic");
  }
  throw Error(ErrorCode::BadMagic, "'" + path + "' is neither a PIRTFEA1 file nor a feature CSV");
}

}  // namespace pirt
