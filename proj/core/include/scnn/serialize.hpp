#pragma once

#include <optional>
#include <string>

#include "scnn/network.hpp"

namespace scnn {

/// Little-endian model container:
///   magic "SCNN", version u32 = 1, layer count u32;
///   per layer: connectivity tag u8 (0 full, 1 rsp, 2 sc),
///     dims u32 x2 (CSR rows = target width, CSR cols = source width),
///     row_ptr u64[rows+1], col_idx u32[nnz], values f64[nnz],
///     bias f64[rows];
///   trailing CRC32 (zlib polynomial) of every preceding byte.
void save_model(const Network& net, const std::string& path);

/// Verifies magic, version and CRC, then rebuilds the network. The container
/// stores only the connectivity tag, so for SC models the block count must be
/// supplied by the caller when block-structured operations (pruning, block
/// means) are wanted.
Network load_model(const std::string& path,
                   std::optional<std::size_t> sc_num_blocks = std::nullopt);

}  // namespace scnn
