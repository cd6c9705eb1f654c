#pragma once

#include <filesystem>
#include <iosfwd>

#include "inag/nn/dense_net.hpp"

namespace inag::nn {

/// Text checkpoint, version 1. Line-oriented, values as C99 hex floats so
/// parameters round-trip bit for bit:
///
///   inag-densenet 1
///   seed <u64>
///   layers <count>
///   layer <index> <in> <out> <activation>     (repeated per layer)
///   w <in hex floats>                          (one line per output row)
///   b <out hex floats>
///   end
///
/// docs/checkpoint-format.md has the full description.
void write_checkpoint(std::ostream& out, const DenseNet& net);
DenseNet read_checkpoint(std::istream& in);

void save_checkpoint(const std::filesystem::path& path, const DenseNet& net);
DenseNet load_checkpoint(const std::filesystem::path& path);

}  // namespace inag::nn
