// Copyright 2026 The cvegnn Authors
// SPDX-License-Identifier: Apache-2.0

// Weight checkpoints: "GNNW", u32 K, u32 dims[K + 1], then every W^(k) as
// row-major f64, all little-endian.

#pragma once

#include <filesystem>
#include <stdexcept>

#include "cvegnn/model.hpp"

namespace cvegnn {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_params(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_params(const std::filesystem::path& path);

}  // namespace cvegnn
