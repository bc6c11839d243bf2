#include "scnn/dataset.hpp"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "scnn/errors.hpp"

namespace scnn {

namespace {

std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return bytes;
}

std::vector<std::uint8_t> gunzip(const std::vector<std::uint8_t>& compressed,
                                 const std::string& path) {
  z_stream zs{};
  // 15 window bits + 16 selects gzip framing.
  if (inflateInit2(&zs, 15 + 16) != Z_OK) {
    throw DataError("zlib init failed for " + path);
  }
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> buffer(1 << 16);
  zs.next_in = const_cast<Bytef*>(compressed.data());
  zs.avail_in = static_cast<uInt>(compressed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    zs.next_out = buffer.data();
    zs.avail_out = static_cast<uInt>(buffer.size());
    rc = inflate(&zs, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&zs);
      throw DataError("gzip decompression failed for " + path);
    }
    out.insert(out.end(), buffer.data(),
               buffer.data() + (buffer.size() - zs.avail_out));
  }
  inflateEnd(&zs);
  return out;
}

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) |
         (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void write_be32(std::uint32_t v, std::ostream& os) {
  const char bytes[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                         static_cast<char>(v >> 8), static_cast<char>(v)};
  os.write(bytes, 4);
}

std::string find_mnist_file(const std::string& dir, const std::string& stem) {
  namespace fs = std::filesystem;
  const std::string plain = dir + "/" + stem;
  if (fs::exists(plain)) return plain;
  if (fs::exists(plain + ".gz")) return plain + ".gz";
  throw DataError("missing Fashion-MNIST file " + stem + " (or " + stem +
                  ".gz) in " + dir);
}

Dataset images_to_dataset(const IdxTensor& images, const IdxTensor& labels,
                          const std::string& what) {
  if (images.dims.size() != 3) {
    throw DataError(what + ": image tensor must have 3 dims, got " +
                    std::to_string(images.dims.size()));
  }
  if (labels.dims.size() != 1) {
    throw DataError(what + ": label tensor must have 1 dim, got " +
                    std::to_string(labels.dims.size()));
  }
  const std::size_t count = images.dims[0];
  if (labels.dims[0] != count) {
    throw DataError(what + ": " + std::to_string(count) + " images but " +
                    std::to_string(labels.dims[0]) + " labels");
  }
  const std::size_t pixels =
      std::size_t{images.dims[1]} * std::size_t{images.dims[2]};
  Dataset ds;
  ds.num_classes = 10;
  ds.features = DenseMatrix(count, pixels);
  ds.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto row = ds.features.row(i);
    const std::uint8_t* src = images.bytes.data() + i * pixels;
    for (std::size_t j = 0; j < pixels; ++j) {
      row[j] = static_cast<double>(src[j]) / 255.0;
    }
    const int label = labels.bytes[i];
    if (label < 0 || label >= ds.num_classes) {
      throw DataError(what + ": label " + std::to_string(label) +
                      " out of range at sample " + std::to_string(i));
    }
    ds.labels[i] = label;
  }
  return ds;
}

}  // namespace

std::size_t IdxTensor::element_count() const {
  std::size_t n = 1;
  for (auto d : dims) n *= d;
  return dims.empty() ? 0 : n;
}

void Dataset::validate() const {
  if (labels.size() != features.rows()) {
    throw DataError("Dataset: label count does not match sample count");
  }
  if (num_classes <= 0) throw DataError("Dataset: num_classes must be positive");
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw DataError("Dataset: label " + std::to_string(y) + " out of range");
    }
  }
  if (!features.all_finite()) {
    throw DataError("Dataset: non-finite feature value");
  }
}

IdxTensor load_idx(const std::string& path) {
  std::vector<std::uint8_t> bytes = read_file_bytes(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1F && bytes[1] == 0x8B) {
    bytes = gunzip(bytes, path);
  }
  if (bytes.size() < 4) throw DataError(path + ": truncated IDX header");
  if (bytes[0] != 0 || bytes[1] != 0) {
    throw DataError(path + ": bad IDX magic");
  }
  if (bytes[2] != 0x08) {
    throw DataError(path + ": unsupported element type 0x" +
                    std::to_string(bytes[2]) + " (only unsigned byte)");
  }
  const std::size_t ndims = bytes[3];
  if (ndims < 1 || ndims > 3) {
    throw DataError(path + ": unsupported dimension count " +
                    std::to_string(ndims));
  }
  if (bytes.size() < 4 + 4 * ndims) {
    throw DataError(path + ": truncated IDX dimension table");
  }
  IdxTensor tensor;
  tensor.dims.resize(ndims);
  std::size_t expected = 1;
  for (std::size_t d = 0; d < ndims; ++d) {
    tensor.dims[d] = read_be32(bytes.data() + 4 + 4 * d);
    expected *= tensor.dims[d];
  }
  const std::size_t actual = bytes.size() - 4 - 4 * ndims;
  if (actual != expected) {
    throw DataError(path + ": payload has " + std::to_string(actual) +
                    " bytes, expected " + std::to_string(expected));
  }
  tensor.bytes.assign(bytes.begin() + 4 + 4 * ndims, bytes.end());
  return tensor;
}

void write_idx(const IdxTensor& tensor, const std::string& path) {
  if (tensor.dims.empty() || tensor.dims.size() > 3) {
    throw std::invalid_argument("write_idx: tensor must have 1 to 3 dims");
  }
  if (tensor.element_count() != tensor.bytes.size()) {
    throw std::invalid_argument("write_idx: dims do not match payload size");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  const char magic[4] = {0, 0, 0x08, static_cast<char>(tensor.dims.size())};
  out.write(magic, 4);
  for (auto d : tensor.dims) write_be32(d, out);
  out.write(reinterpret_cast<const char*>(tensor.bytes.data()),
            static_cast<std::streamsize>(tensor.bytes.size()));
}

std::pair<Dataset, Dataset> load_fashion_mnist(const std::string& dir) {
  const IdxTensor train_images =
      load_idx(find_mnist_file(dir, "train-images-idx3-ubyte"));
  const IdxTensor train_labels =
      load_idx(find_mnist_file(dir, "train-labels-idx1-ubyte"));
  const IdxTensor test_images =
      load_idx(find_mnist_file(dir, "t10k-images-idx3-ubyte"));
  const IdxTensor test_labels =
      load_idx(find_mnist_file(dir, "t10k-labels-idx1-ubyte"));
  Dataset train = images_to_dataset(train_images, train_labels, "train set");
  Dataset test = images_to_dataset(test_images, test_labels, "test set");
  train.validate();
  test.validate();
  return {std::move(train), std::move(test)};
}

Dataset synth_blobs(int num_classes, std::size_t samples_per_class,
                    std::size_t feature_dim, double spread, RngSeed seed) {
  if (num_classes <= 0 || samples_per_class == 0 || feature_dim == 0 ||
      spread < 0.0) {
    throw std::invalid_argument("synth_blobs: arguments must be positive");
  }
  SplitMix64 eng(derive_stream(seed, rng_domain::kBlob, 0));
  Dataset ds;
  ds.num_classes = num_classes;
  const std::size_t total = samples_per_class * num_classes;
  ds.features = DenseMatrix(total, feature_dim);
  ds.labels.resize(total);
  std::size_t row = 0;
  for (int c = 0; c < num_classes; ++c) {
    const std::size_t axis = static_cast<std::size_t>(c) % feature_dim;
    for (std::size_t s = 0; s < samples_per_class; ++s, ++row) {
      auto dst = ds.features.row(row);
      for (std::size_t j = 0; j < feature_dim; ++j) {
        dst[j] = (j == axis ? 1.0 : 0.0) +
                 (spread > 0.0 ? spread * eng.normal() : 0.0);
      }
      ds.labels[row] = c;
    }
  }
  return ds;
}

}  // namespace scnn
