#pragma once

#include <iosfwd>
#include <string>

#include "voxnca/grid.hpp"

namespace voxnca {

// Grid files are a one-line JSON header (dims, variant, k, H, version)
// followed by the raw little-endian float32 channel array.
void save_grid(const CellGrid& g, const std::string& path);
CellGrid load_grid(const std::string& path);

// One character per voxel type, one block per z slice. Row y=0 printed first.
std::string layer_dump(const TypeField& f);

// Plain "x y z type" lines, one per non-empty voxel. '#' starts a comment.
void save_voxel_list(const TypeField& f, const std::string& path);
TypeField load_voxel_list(const std::string& path);

void write_text_file(const std::string& path, const std::string& contents);

}  // namespace voxnca
