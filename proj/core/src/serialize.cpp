#include "scnn/serialize.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "scnn/errors.hpp"

namespace scnn {

namespace {

constexpr char kMagic[4] = {'S', 'C', 'N', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const std::uint8_t* data, std::size_t size, std::string path)
      : data_(data), size_(size), path_(std::move(path)) {}

  std::uint8_t u8() { return take(1)[0]; }

  std::uint32_t u32() {
    const std::uint8_t* p = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{p[i]} << (8 * i);
    return v;
  }

  std::uint64_t u64() {
    const std::uint8_t* p = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{p[i]} << (8 * i);
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t offset() const { return offset_; }

 private:
  const std::uint8_t* take(std::size_t n) {
    if (offset_ + n > size_) {
      throw DataError(path_ + ": truncated model file");
    }
    const std::uint8_t* p = data_ + offset_;
    offset_ += n;
    return p;
  }

  const std::uint8_t* data_;
  std::size_t size_;
  std::size_t offset_ = 0;
  std::string path_;
};

std::uint32_t payload_crc(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(data), static_cast<uInt>(size)));
}

}  // namespace

void save_model(const Network& net, const std::string& path) {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(net.depth()));
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const LayerParams& layer = net.layers[l];
    out.push_back(static_cast<std::uint8_t>(net.kinds[l]));
    put_u32(out, static_cast<std::uint32_t>(layer.weights.rows()));
    put_u32(out, static_cast<std::uint32_t>(layer.weights.cols()));
    for (auto v : layer.weights.row_ptr()) put_u64(out, v);
    for (auto v : layer.weights.col_idx()) put_u32(out, v);
    for (auto v : layer.weights.values()) put_f64(out, v);
    for (auto v : layer.bias) put_f64(out, v);
  }
  put_u32(out, payload_crc(out.data(), out.size()));

  std::ofstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot write model file " + path);
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw DataError("failed while writing model file " + path);
}

Network load_model(const std::string& path,
                   std::optional<std::size_t> sc_num_blocks) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw DataError("cannot open model file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(file)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 4 + 4 + 4 + 4) {
    throw DataError(path + ": truncated model file");
  }
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw DataError(path + ": not a model file (bad magic)");
  }
  const std::uint32_t stored_crc = [&] {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= std::uint32_t{bytes[bytes.size() - 4 + i]} << (8 * i);
    }
    return v;
  }();
  if (payload_crc(bytes.data(), bytes.size() - 4) != stored_crc) {
    throw DataError(path + ": CRC mismatch, file is corrupt");
  }

  Reader r(bytes.data(), bytes.size() - 4, path);
  r.u32();  // magic, already checked
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw DataError(path + ": unsupported model version " +
                    std::to_string(version));
  }
  const std::uint32_t layer_count = r.u32();
  if (layer_count == 0) throw DataError(path + ": model has no layers");

  Network net;
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint8_t tag = r.u8();
    if (tag > 2) {
      throw DataError(path + ": unknown connectivity tag " +
                      std::to_string(tag));
    }
    const std::size_t rows = r.u32();
    const std::size_t cols = r.u32();
    std::vector<std::uint64_t> row_ptr(rows + 1);
    for (auto& v : row_ptr) v = r.u64();
    const std::size_t nnz = row_ptr.back();
    std::vector<std::uint32_t> col_idx(nnz);
    for (auto& v : col_idx) v = r.u32();
    std::vector<double> values(nnz);
    for (auto& v : values) v = r.f64();
    std::vector<double> bias(rows);
    for (auto& v : bias) v = r.f64();

    LayerParams params;
    params.weights = CsrMatrix(rows, cols, std::move(row_ptr),
                               std::move(col_idx), std::move(values));
    params.bias = std::move(bias);
    params.mask.n_left = cols;
    params.mask.n_right = rows;
    params.mask.adjacency.resize(cols);
    params.weights.for_each_edge([&](std::size_t row, std::size_t col, double) {
      params.mask.adjacency[col].push_back(static_cast<std::uint32_t>(row));
    });
    for (auto& nbrs : params.mask.adjacency) {
      std::sort(nbrs.begin(), nbrs.end());
    }

    if (l == 0) {
      net.layer_dims.push_back(cols);
    } else if (net.layer_dims.back() != cols) {
      throw DataError(path + ": layer " + std::to_string(l) +
                      " width does not chain with the previous layer");
    }
    net.layer_dims.push_back(rows);
    net.layers.push_back(std::move(params));
    const auto kind = static_cast<ConnectivityKind>(tag);
    net.kinds.push_back(kind);
    std::size_t blocks = 0;
    if (kind == ConnectivityKind::Sc && sc_num_blocks.has_value()) {
      blocks = *sc_num_blocks;
      if (blocks == 0 || rows % blocks != 0 || cols % blocks != 0) {
        throw DataError(path + ": block count " + std::to_string(blocks) +
                        " does not divide layer dims " + std::to_string(cols) +
                        "x" + std::to_string(rows));
      }
    }
    net.sc_blocks.push_back(blocks);
  }
  if (r.offset() != bytes.size() - 4) {
    throw DataError(path + ": trailing bytes after last layer");
  }
  return net;
}

}  // namespace scnn
