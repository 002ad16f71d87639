#include <cstring>

#include "binary_io.hpp"
#include "pirt/error.hpp"
#include "pirt/trainer.hpp"

namespace pirt {

namespace {

void put_array(detail::ByteWriter& w, std::size_t rows, std::size_t cols,
               std::span<const double> values) {
  w.scalar<std::uint64_t>(rows);
  w.scalar<std::uint64_t>(cols);
  w.array<double>(values);
}

void put_adam(detail::ByteWriter& w, const AdamState& s) {
  w.scalar<std::uint64_t>(s.step);
  put_array(w, 1, s.m.size(), s.m);
  put_array(w, 1, s.v.size(), s.v);
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::CorruptCheckpoint, what);
}

auto short_read = [](std::size_t pos, std::size_t n) {
  corrupt("checkpoint truncated at byte " + std::to_string(pos) + " (needed " +
          std::to_string(n) + " more bytes)");
};
using Reader = detail::ByteReader<decltype(short_read)>;

// Reads a shaped array and checks it against the expected shape.
Vec get_array(Reader& r, std::size_t rows, std::size_t cols, const char* what) {
  const auto got_rows = r.scalar<std::uint64_t>();
  const auto got_cols = r.scalar<std::uint64_t>();
  if (got_rows != rows || got_cols != cols) {
    corrupt(std::string(what) + " has shape " + std::to_string(got_rows) + "x" +
            std::to_string(got_cols) + ", expected " + std::to_string(rows) + "x" +
            std::to_string(cols));
  }
  if (cols != 0 && rows > r.remaining() / sizeof(double) / cols) {
    corrupt(std::string(what) + " declares more values than the file holds");
  }
  Vec values(rows * cols);
  r.array<double>(values);
  return values;
}

AdamState get_adam(Reader& r, std::size_t size, const char* what) {
  AdamState s;
  s.step = r.scalar<std::uint64_t>();
  s.m = get_array(r, 1, size, what);
  s.v = get_array(r, 1, size, what);
  return s;
}

Matrix to_matrix(std::size_t rows, std::size_t cols, const Vec& values) {
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data().begin());
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  const TrainConfig& c = ckpt.config;
  const TrainState& s = ckpt.state;
  const std::size_t pooled_dim = s.head.input_dim();
  const std::size_t embed_dim = s.head.embed_dim();
  if (embed_dim != c.embed_dim || s.proxies.rows() != embed_dim ||
      s.proxies.cols() != s.class_ids.size() || s.head.bias.size() != embed_dim) {
    throw Error(ErrorCode::ConfigMismatch, "checkpoint state does not match its config");
  }

  detail::ByteWriter w;
  w.bytes(kCheckpointMagic, sizeof kCheckpointMagic);
  w.scalar<std::uint32_t>(kCheckpointVersion);

  w.scalar<std::uint32_t>(c.epochs);
  w.scalar<std::uint64_t>(c.batch_size);
  w.scalar<std::uint64_t>(c.embed_dim);
  w.scalar<std::uint64_t>(pooled_dim);
  w.scalar<std::uint8_t>(static_cast<std::uint8_t>(c.pooling));
  for (int i = 0; i < 3; ++i) w.scalar<std::uint8_t>(0);
  w.scalar<std::uint64_t>(c.seed);
  w.scalar<double>(c.loss.alpha);
  w.scalar<double>(c.loss.delta);
  w.scalar<double>(c.loss.lambda);
  w.scalar<double>(c.optim.base_lr);
  w.scalar<double>(c.optim.weight_decay);
  w.scalar<double>(c.optim.beta1);
  w.scalar<double>(c.optim.beta2);
  w.scalar<double>(c.optim.eps);
  w.scalar<std::uint32_t>(c.optim.step_size);
  w.scalar<double>(c.optim.gamma);
  w.scalar<std::uint32_t>(c.optim.warmup_epochs);
  w.scalar<double>(c.optim.proxy_lr_multiplier);

  w.scalar<std::uint32_t>(s.epochs_completed);
  w.scalar<std::uint64_t>(s.class_ids.size());
  w.array<std::int64_t>(s.class_ids);

  put_array(w, pooled_dim, embed_dim, s.head.weights.data());
  put_array(w, 1, embed_dim, s.head.bias);
  put_array(w, s.proxies.rows(), s.proxies.cols(), s.proxies.data());
  put_adam(w, s.optim.weights);
  put_adam(w, s.optim.bias);
  put_adam(w, s.optim.proxies);

  detail::write_file(path, w.buffer());
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto bytes = detail::read_file(path);
  Reader r(bytes, short_read);

  char magic[8];
  r.bytes(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    corrupt("'" + path + "' is not a PIRTCKP1 checkpoint");
  }
  const auto version = r.scalar<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::VersionMismatch,
                "checkpoint version " + std::to_string(version) + ", expected " +
                    std::to_string(kCheckpointVersion));
  }

  Checkpoint ckpt;
  TrainConfig& c = ckpt.config;
  c.epochs = r.scalar<std::uint32_t>();
  c.batch_size = r.scalar<std::uint64_t>();
  c.embed_dim = r.scalar<std::uint64_t>();
  const auto pooled_dim = r.scalar<std::uint64_t>();
  const auto pooling = r.scalar<std::uint8_t>();
  if (pooling > static_cast<std::uint8_t>(PoolingMethod::Dist)) {
    corrupt("unknown pooling id " + std::to_string(pooling));
  }
  c.pooling = static_cast<PoolingMethod>(pooling);
  for (int i = 0; i < 3; ++i) r.scalar<std::uint8_t>();
  c.seed = r.scalar<std::uint64_t>();
  c.loss.alpha = r.scalar<double>();
  c.loss.delta = r.scalar<double>();
  c.loss.lambda = r.scalar<double>();
  c.optim.base_lr = r.scalar<double>();
  c.optim.weight_decay = r.scalar<double>();
  c.optim.beta1 = r.scalar<double>();
  c.optim.beta2 = r.scalar<double>();
  c.optim.eps = r.scalar<double>();
  c.optim.step_size = r.scalar<std::uint32_t>();
  c.optim.gamma = r.scalar<double>();
  c.optim.warmup_epochs = r.scalar<std::uint32_t>();
  c.optim.proxy_lr_multiplier = r.scalar<double>();

  TrainState& s = ckpt.state;
  s.epochs_completed = r.scalar<std::uint32_t>();
  const auto num_classes = r.scalar<std::uint64_t>();
  if (num_classes > r.remaining() / sizeof(std::int64_t)) {
    corrupt("class list longer than the file");
  }
  s.class_ids.resize(num_classes);
  r.array<std::int64_t>(s.class_ids);

  const std::size_t e = c.embed_dim;
  s.head.weights = to_matrix(pooled_dim, e, get_array(r, pooled_dim, e, "head weights"));
  s.head.bias = get_array(r, 1, e, "head bias");
  s.proxies = to_matrix(e, num_classes, get_array(r, e, num_classes, "proxies"));
  s.optim.weights = get_adam(r, pooled_dim * e, "weight moments");
  s.optim.bias = get_adam(r, e, "bias moments");
  s.optim.proxies = get_adam(r, e * num_classes, "proxy moments");

  if (r.remaining() != 0) {
    corrupt(std::to_string(r.remaining()) + " trailing bytes after checkpoint payload");
  }
  return ckpt;
}

Checkpoint load_checkpoint(const std::string& path, std::size_t expected_embed_dim,
                           std::size_t expected_pooled_dim) {
  Checkpoint ckpt = load_checkpoint(path);
  if (ckpt.config.embed_dim != expected_embed_dim) {
    throw Error(ErrorCode::ConfigMismatch,
                "checkpoint embed_dim " + std::to_string(ckpt.config.embed_dim) +
                    ", expected " + std::to_string(expected_embed_dim));
  }
  if (ckpt.state.head.input_dim() != expected_pooled_dim) {
    throw Error(ErrorCode::ConfigMismatch,
                "checkpoint pooled width " + std::to_string(ckpt.state.head.input_dim()) +
                    ", expected " + std::to_string(expected_pooled_dim));
  }
  return ckpt;
}

}  // namespace pirt
