#ifndef ENTROPT_DATA_HPP
#define ENTROPT_DATA_HPP

#include <cstdint>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <zlib.h>

#include "entropt/rng.hpp"

namespace entropt {

class IdxFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

// gzFile reads plain files too, which gives transparent .gz support.
class IdxReader {
 public:
  explicit IdxReader(const std::string& path)
      : path_(path), file_(gzopen(path.c_str(), "rb")) {
    if (!file_) throw IdxFormatError("idx: cannot open " + path);
  }
  ~IdxReader() {
    if (file_) gzclose(file_);
  }
  IdxReader(const IdxReader&) = delete;
  IdxReader& operator=(const IdxReader&) = delete;

  std::uint32_t read_u32_be() {
    unsigned char b[4];
    read_exact(b, 4);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
  }

  void read_exact(void* dst, std::size_t n) {
    const int got = gzread(file_, dst, static_cast<unsigned>(n));
    if (got < 0 || static_cast<std::size_t>(got) != n)
      throw IdxFormatError("idx: truncated file " + path_);
  }

  bool at_eof() {
    unsigned char probe;
    return gzread(file_, &probe, 1) == 0;
  }

 private:
  std::string path_;
  gzFile file_;
};

}  // namespace detail

// Parses the big-endian IDX image container: magic 0x00000803 then
// (N, rows, cols) then N*rows*cols unsigned bytes. Pixels are flattened
// column-per-image and scaled to [0,1].
inline Eigen::MatrixXd load_idx_images(const std::string& path) {
  detail::IdxReader in(path);
  const std::uint32_t magic = in.read_u32_be();
  if (magic != detail::kIdxImagesMagic)
    throw IdxFormatError("idx: bad image magic in " + path);
  const std::uint32_t n = in.read_u32_be();
  const std::uint32_t rows = in.read_u32_be();
  const std::uint32_t cols = in.read_u32_be();
  const std::size_t pixels = std::size_t(rows) * cols;
  if (n == 0 || pixels == 0)
    throw IdxFormatError("idx: empty image dimensions in " + path);

  Eigen::MatrixXd images(pixels, n);
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read_exact(buf.data(), pixels);
    for (std::size_t p = 0; p < pixels; ++p)
      images(static_cast<Eigen::Index>(p), i) = buf[p] / 255.0;
  }
  if (!in.at_eof())
    throw IdxFormatError("idx: trailing bytes in " + path);
  return images;
}

// Labels container: magic 0x00000801 then N unsigned bytes in [0,10).
inline Eigen::VectorXi load_idx_labels(const std::string& path) {
  detail::IdxReader in(path);
  const std::uint32_t magic = in.read_u32_be();
  if (magic != detail::kIdxLabelsMagic)
    throw IdxFormatError("idx: bad label magic in " + path);
  const std::uint32_t n = in.read_u32_be();
  Eigen::VectorXi labels(n);
  std::vector<unsigned char> buf(n);
  in.read_exact(buf.data(), n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (buf[i] > 9)
      throw IdxFormatError("idx: label " + std::to_string(int(buf[i])) +
                           " out of range in " + path);
    labels[static_cast<Eigen::Index>(i)] = buf[i];
  }
  if (!in.at_eof())
    throw IdxFormatError("idx: trailing bytes in " + path);
  return labels;
}

// Fixture writers, byte-exact inverses of the loaders (uncompressed).
inline void write_idx_images(const std::string& path,
                             const std::vector<unsigned char>& pixels,
                             std::uint32_t n, std::uint32_t rows,
                             std::uint32_t cols) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("idx: cannot write " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    std::fwrite(b, 1, 4, f);
  };
  put_u32(detail::kIdxImagesMagic);
  put_u32(n);
  put_u32(rows);
  put_u32(cols);
  std::fwrite(pixels.data(), 1, pixels.size(), f);
  std::fclose(f);
}

inline void write_idx_labels(const std::string& path,
                             const std::vector<unsigned char>& labels) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw std::runtime_error("idx: cannot write " + path);
  auto put_u32 = [&](std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24),
                          static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v)};
    std::fwrite(b, 1, 4, f);
  };
  put_u32(detail::kIdxLabelsMagic);
  put_u32(static_cast<std::uint32_t>(labels.size()));
  std::fwrite(labels.data(), 1, labels.size(), f);
  std::fclose(f);
}

// Immutable labeled image collection; images stored one per column.
struct Dataset {
  Eigen::MatrixXd images;
  Eigen::VectorXi labels;
  std::string images_path;
  std::string labels_path;

  static Dataset load(const std::string& images_path,
                      const std::string& labels_path) {
    Dataset ds;
    ds.images = load_idx_images(images_path);
    ds.labels = load_idx_labels(labels_path);
    if (ds.images.cols() != ds.labels.size())
      throw IdxFormatError("idx: image count " +
                           std::to_string(ds.images.cols()) +
                           " != label count " +
                           std::to_string(ds.labels.size()));
    ds.images_path = images_path;
    ds.labels_path = labels_path;
    return ds;
  }

  Eigen::Index size() const { return images.cols(); }
};

// Uniform sample of n examples without replacement (partial Fisher-Yates);
// a fixed per-run seed keeps accuracy trajectories comparable across
// algorithms.
inline std::pair<Eigen::MatrixXd, Eigen::VectorXi> heldout_subset(
    const Dataset& ds, Eigen::Index n, RngStream stream) {
  if (n < 1 || n > ds.size())
    throw std::invalid_argument("heldout: n outside [1, dataset size]");
  Rng rng(stream);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(ds.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    idx[i] = static_cast<Eigen::Index>(i);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto j = i + rng.uniform_int(ds.size() - i);
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  Eigen::MatrixXd images(ds.images.rows(), n);
  Eigen::VectorXi labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    images.col(i) = ds.images.col(idx[static_cast<std::size_t>(i)]);
    labels[i] = ds.labels[idx[static_cast<std::size_t>(i)]];
  }
  return {std::move(images), std::move(labels)};
}

// Minibatch index stream. The default policy samples with replacement per
// update; epoch shuffling exists for the epoch-based SGD baseline.
class Batcher {
 public:
  enum class Policy { WithReplacement, EpochShuffle };

  Batcher(Eigen::Index dataset_size, Eigen::Index batch_size, RngStream stream,
          Policy policy = Policy::WithReplacement)
      : n_(dataset_size), b_(batch_size), rng_(stream), policy_(policy) {
    if (n_ < 1) throw std::invalid_argument("batcher: empty dataset");
    if (b_ < 1) throw std::invalid_argument("batcher: batch size must be >= 1");
  }

  std::vector<std::int64_t> next() {
    std::vector<std::int64_t> batch(static_cast<std::size_t>(b_));
    if (policy_ == Policy::WithReplacement) {
      for (auto& i : batch) i = rng_.uniform_int(n_);
    } else {
      for (auto& i : batch) {
        if (cursor_ >= n_) reshuffle();
        i = order_[static_cast<std::size_t>(cursor_++)];
      }
    }
    return batch;
  }

 private:
  void reshuffle() {
    if (order_.empty()) {
      order_.resize(static_cast<std::size_t>(n_));
      for (std::size_t i = 0; i < order_.size(); ++i)
        order_[i] = static_cast<std::int64_t>(i);
    }
    for (Eigen::Index i = n_ - 1; i > 0; --i)
      std::swap(order_[static_cast<std::size_t>(i)],
                order_[static_cast<std::size_t>(rng_.uniform_int(i + 1))]);
    cursor_ = 0;
  }

  Eigen::Index n_;
  Eigen::Index b_;
  Rng rng_;
  Policy policy_;
  std::vector<std::int64_t> order_;
  Eigen::Index cursor_ = std::numeric_limits<Eigen::Index>::max();
};

}  // namespace entropt

#endif
