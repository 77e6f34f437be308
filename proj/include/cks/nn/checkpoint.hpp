#pragma once

#include <filesystem>
#include <map>

#include "cks/nn/tensor.hpp"

namespace cks::nn {

// Parameter blob: {magic "MDL1", u32 n_tensors, per-tensor {name, dims, f32 data}}.
// Architecture descriptors live in a sibling JSON handled by each model type.

void save_blob(const std::filesystem::path& path,
               const std::vector<std::pair<std::string, const Tensor*>>& named);
std::map<std::string, Tensor> load_blob(const std::filesystem::path& path);

}  // namespace cks::nn
