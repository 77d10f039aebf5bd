#pragma once

#include <map>
#include <string>

#include "json.hpp"
#include "wordbound/nn/model.hpp"

namespace wordbound::nn {

// File layout: a text header followed by raw tensor data.
//   wordbound-checkpoint v1
//   <one-line JSON: {"config": {...}, "seed": ..., "step": ..., ...}>
//   tensor <name> <rows> <cols>     (one line per tensor, declaration order)
//   end
//   <little-endian float32 row-major payloads in declaration order>
// Extra tensors (optimizer state, "opt.*") ride along after the parameters.

nlohmann::json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

void save_checkpoint(const std::string& path, const Parameters<float>& params,
                     const nlohmann::json& meta,
                     const std::map<std::string, Matrix<float>>& extra = {});

// meta/extra are optional outputs. Throws BadCheckpoint on malformed input.
Parameters<float> load_checkpoint(const std::string& path, nlohmann::json* meta = nullptr,
                                  std::map<std::string, Matrix<float>>* extra = nullptr);

}  // namespace wordbound::nn
