#pragma once

#include <filesystem>

#include "flowforge/flow.hpp"

namespace flowforge {

// Middlebury .flo: "PIEH" magic (float 202021.25), little-endian int32
// width/height, then float32 (u,v) pairs row-major. The validity mask rides
// in a sidecar PNG next to the file ("<name>.flo" -> "<name>.mask.png").

void write_flo(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flo(const std::filesystem::path& path);  // mask all-true

// .flo plus the sidecar mask
void write_flow_with_mask(const std::filesystem::path& flo_path, const FlowField& flow);
FlowField read_flow_with_mask(const std::filesystem::path& flo_path);

std::filesystem::path mask_path_for(const std::filesystem::path& flo_path);

}  // namespace flowforge
