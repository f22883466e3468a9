#pragma once

#include "voxnca/grid.hpp"

namespace voxnca {

// Built-in training target: a four-legged walker with all four materials,
// ~40 voxels inside a 7x7x5 bounding box on a 9x9x9 grid. The cell (3,3,3)
// (the conv seed position) is occupied.
TypeField demo_quadruped_target();

}  // namespace voxnca
