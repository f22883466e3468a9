#include "voxnca/grid.hpp"

#include <algorithm>

namespace voxnca {

namespace {

std::vector<Vec3i> make_offsets(bool three_d) {
    std::vector<Vec3i> out;
    int zr = three_d ? 1 : 0;
    for (int dz = -zr; dz <= zr; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) out.push_back({dx, dy, dz});
    return out;
}

const std::vector<Vec3i> kOffsets2d = make_offsets(false);
const std::vector<Vec3i> kOffsets3d = make_offsets(true);

}  // namespace

std::span<const Vec3i> moore_offsets(bool three_d) {
    const auto& v = three_d ? kOffsets3d : kOffsets2d;
    return {v.data(), v.size()};
}

CellGrid dense_seed_grid(int nx, int ny, int nz, Vec3i seed_pos) {
    CellGrid g = CellGrid::zeros(nx, ny, nz, GridVariant::Dense);
    if (!g.in_bounds(seed_pos.x, seed_pos.y, seed_pos.z))
        throw std::out_of_range("seed out of bounds");
    float* c = g.cell(seed_pos.x, seed_pos.y, seed_pos.z);
    c[0] = float(int(VoxelType::SoftPassive));
    c[1] = 1.0f;
    return g;
}

CellGrid conv_seed_grid(int nx, int ny, int nz, Vec3i seed_pos, Rng& rng, int type_channels,
                        int hidden_channels) {
    CellGrid g = CellGrid::zeros(nx, ny, nz, GridVariant::Conv, type_channels, hidden_channels);
    write_conv_seed(g, seed_pos, rng);
    return g;
}

CellGrid dense_grid_from_types(const TypeField& f) {
    CellGrid g = CellGrid::zeros(f.nx, f.ny, f.nz, GridVariant::Dense);
    for (int i = 0; i < f.cell_count(); ++i) {
        if (f.types[size_t(i)] == VoxelType::Empty) continue;
        float* c = g.cell(i);
        c[0] = float(int(f.types[size_t(i)]));
        c[1] = 1.0f;
    }
    return g;
}

bool occupied_bounding_box(const TypeField& f, Vec3i& lo, Vec3i& hi) {
    bool any = false;
    lo = {f.nx, f.ny, f.nz};
    hi = {-1, -1, -1};
    for (int z = 0; z < f.nz; ++z)
        for (int y = 0; y < f.ny; ++y)
            for (int x = 0; x < f.nx; ++x)
                if (f.at(x, y, z) != VoxelType::Empty) {
                    any = true;
                    lo.x = std::min(lo.x, x); lo.y = std::min(lo.y, y); lo.z = std::min(lo.z, z);
                    hi.x = std::max(hi.x, x); hi.y = std::max(hi.y, y); hi.z = std::max(hi.z, z);
                }
    return any;
}

}  // namespace voxnca
