#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "scnn/dense.hpp"
#include "scnn/rng.hpp"

namespace scnn {

/// Raw IDX tensor: unsigned-byte payload with 1 to 3 big-endian dimensions.
struct IdxTensor {
  std::vector<std::uint32_t> dims;
  std::vector<std::uint8_t> bytes;

  std::size_t element_count() const;
};

struct Dataset {
  DenseMatrix features;     // samples x features
  std::vector<int> labels;  // in [0, num_classes)
  int num_classes = 0;

  std::size_t size() const { return labels.size(); }
  void validate() const;  // throws DataError on a broken invariant
};

/// Parses an IDX file (magic 0x00000801/0x00000802/0x00000803 for 1-3 dims of
/// unsigned bytes). Files starting with the gzip signature 0x1F 0x8B are
/// decompressed transparently. Throws DataError for a bad magic, an
/// unsupported element type, or a truncated payload (expected vs actual byte
/// counts are named in the message).
IdxTensor load_idx(const std::string& path);

/// Writes the uncompressed IDX encoding of the tensor.
void write_idx(const IdxTensor& tensor, const std::string& path);

/// Loads the four standard Fashion-MNIST files (train/t10k x images/labels)
/// from dir, accepting plain or .gz names. Images are flattened row-major and
/// scaled to [0, 1] by division by 255.
std::pair<Dataset, Dataset> load_fashion_mnist(const std::string& dir);

/// Gaussian blobs with the class-c mean on coordinate axis c mod feature_dim
/// (unit scale). Deterministic given seed.
Dataset synth_blobs(int num_classes, std::size_t samples_per_class,
                    std::size_t feature_dim, double spread, RngSeed seed);

}  // namespace scnn
