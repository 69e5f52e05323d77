#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tvlm/autograd.hpp"

namespace tvlm {

// Single-file parameter checkpoint: a manifest (name, shape, byte offset into
// the payload) followed by the payload of little-endian 64-bit floats.
// Round trips are bit-exact.
void save_checkpoint(const std::string& path, const std::vector<ParamPtr>& params);

// Raw contents in manifest order.
std::vector<std::pair<std::string, Tensor>> read_checkpoint(const std::string& path);

// Strict restore: every given parameter must be present with matching shape.
// Extra entries in the file are an error too, so a checkpoint and a model
// can never silently disagree.
void load_checkpoint(const std::string& path, const std::vector<ParamPtr>& params);

}  // namespace tvlm
