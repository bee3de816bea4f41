#pragma once

#include <string>

#include "prog/tensor.hpp"

namespace prog::diff {

// Text checkpoint container, format "progckpt v1":
//
//   progckpt v1
//   params <count>
//   <name> <rank> <d0> [d1] [exempt]
//   <16-hex-digit IEEE754 words, one line per tensor>
//
// Values travel as raw bit patterns, so save/load round-trips bitwise.
void save_checkpoint(const ModelParams& params, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

}  // namespace prog::diff
