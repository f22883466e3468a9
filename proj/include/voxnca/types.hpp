#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace voxnca {

// Voxel materials. Codes are fixed and serialized as-is.
enum class VoxelType : int {
    Empty = 0,
    SoftPassive = 1,  // low-stiffness passive
    HardPassive = 2,  // bone
    MuscleA = 3,      // in phase with the global signal
    MuscleB = 4,      // counter phase
};

constexpr int kVoxelTypeCount = 5;

inline char voxel_type_char(VoxelType t) {
    static constexpr std::array<char, kVoxelTypeCount> chars = {'.', 's', 'H', 'A', 'B'};
    int c = static_cast<int>(t);
    return (c >= 0 && c < kVoxelTypeCount) ? chars[size_t(c)] : '?';
}

inline const char* voxel_type_name(VoxelType t) {
    switch (t) {
        case VoxelType::Empty: return "empty";
        case VoxelType::SoftPassive: return "soft";
        case VoxelType::HardPassive: return "hard";
        case VoxelType::MuscleA: return "muscle_a";
        case VoxelType::MuscleB: return "muscle_b";
    }
    return "?";
}

enum class GridVariant { Dense, Conv };

inline const char* grid_variant_name(GridVariant v) {
    return v == GridVariant::Dense ? "dense" : "conv";
}

struct Vec3i {
    int x = 0, y = 0, z = 0;
    bool operator==(const Vec3i&) const = default;
};

}  // namespace voxnca
