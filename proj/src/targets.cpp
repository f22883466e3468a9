#include "voxnca/targets.hpp"

#include <cstdlib>

namespace voxnca {

TypeField demo_quadruped_target() {
    TypeField f = TypeField::empty(9, 9, 9);
    // legs: front/left pair in phase, back/right pair counter phase
    const Vec3i legs_a[] = {{3, 1, 0}, {1, 3, 0}};
    const Vec3i legs_b[] = {{3, 5, 0}, {5, 3, 0}};
    for (int z = 0; z <= 2; ++z) {
        for (const Vec3i& l : legs_a) f.set(l.x, l.y, z, VoxelType::MuscleA);
        for (const Vec3i& l : legs_b) f.set(l.x, l.y, z, VoxelType::MuscleB);
    }
    // body slab: diamond of bone at z=3
    for (int y = 0; y <= 6; ++y)
        for (int x = 0; x <= 6; ++x)
            if (std::abs(x - 3) + std::abs(y - 3) <= 3) f.set(x, y, 3, VoxelType::HardPassive);
    // soft cap at z=4
    for (int y = 2; y <= 4; ++y)
        for (int x = 2; x <= 4; ++x)
            if (std::abs(x - 3) + std::abs(y - 3) <= 1) f.set(x, y, 4, VoxelType::SoftPassive);
    return f;
}

}  // namespace voxnca
