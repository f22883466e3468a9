#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "voxnca/rng.hpp"
#include "voxnca/types.hpp"

namespace voxnca {

// Aliveness threshold of the masked update rule. A cell is alive when the max
// aliveness over its Moore neighborhood (self included) is >= this value.
inline constexpr double kAliveThreshold = 0.1;

// Dense lattice of per-cell state vectors, x-fastest order.
//
// Two variants share the lattice:
//   Dense: 2 channels per cell, (type code, alpha); alpha is the aliveness.
//   Conv:  k type channels + 1 aliveness channel + H hidden channels.
template <class Real>
struct BasicGrid {
    int nx = 0, ny = 0, nz = 0;
    GridVariant variant = GridVariant::Conv;
    int type_channels = kVoxelTypeCount;  // k
    int hidden_channels = 0;              // H (conv only)
    std::vector<Real> data;

    static BasicGrid zeros(int nx, int ny, int nz, GridVariant variant,
                           int type_channels = kVoxelTypeCount, int hidden_channels = 0) {
        BasicGrid g;
        g.nx = nx;
        g.ny = ny;
        g.nz = nz;
        g.variant = variant;
        g.type_channels = type_channels;
        g.hidden_channels = hidden_channels;
        if (nx <= 0 || ny <= 0 || nz <= 0) throw std::invalid_argument("grid dims must be positive");
        g.data.assign(size_t(g.cell_count()) * size_t(g.channels()), Real(0));
        return g;
    }

    int channels() const {
        return variant == GridVariant::Dense ? 2 : type_channels + 1 + hidden_channels;
    }
    // Index of the aliveness value inside a cell's state vector.
    int alive_channel() const { return variant == GridVariant::Dense ? 1 : type_channels; }

    int cell_count() const { return nx * ny * nz; }
    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
    }
    int cell_index(int x, int y, int z) const { return x + nx * (y + ny * z); }

    Real* cell(int idx) { return data.data() + size_t(idx) * size_t(channels()); }
    const Real* cell(int idx) const { return data.data() + size_t(idx) * size_t(channels()); }
    Real* cell(int x, int y, int z) { return cell(cell_index(x, y, z)); }
    const Real* cell(int x, int y, int z) const { return cell(cell_index(x, y, z)); }

    Real alive_value(int idx) const { return cell(idx)[alive_channel()]; }

    bool same_shape(const BasicGrid& o) const {
        return nx == o.nx && ny == o.ny && nz == o.nz && variant == o.variant &&
               type_channels == o.type_channels && hidden_channels == o.hidden_channels;
    }

    template <class R2>
    BasicGrid<R2> cast() const {
        BasicGrid<R2> g;
        g.nx = nx; g.ny = ny; g.nz = nz;
        g.variant = variant;
        g.type_channels = type_channels;
        g.hidden_channels = hidden_channels;
        g.data.assign(data.begin(), data.end());
        return g;
    }
};

using CellGrid = BasicGrid<float>;

// Decoded voxel types on a lattice.
struct TypeField {
    int nx = 0, ny = 0, nz = 0;
    std::vector<VoxelType> types;

    static TypeField empty(int nx, int ny, int nz) {
        TypeField f;
        f.nx = nx; f.ny = ny; f.nz = nz;
        f.types.assign(size_t(nx) * size_t(ny) * size_t(nz), VoxelType::Empty);
        return f;
    }
    int cell_count() const { return nx * ny * nz; }
    int cell_index(int x, int y, int z) const { return x + nx * (y + ny * z); }
    bool in_bounds(int x, int y, int z) const {
        return x >= 0 && x < nx && y >= 0 && y < ny && z >= 0 && z < nz;
    }
    VoxelType at(int x, int y, int z) const { return types[size_t(cell_index(x, y, z))]; }
    void set(int x, int y, int z, VoxelType t) { types[size_t(cell_index(x, y, z))] = t; }
    int non_empty_count() const {
        int n = 0;
        for (VoxelType t : types) n += (t != VoxelType::Empty);
        return n;
    }
    bool same_dims(const TypeField& o) const { return nx == o.nx && ny == o.ny && nz == o.nz; }
};

// Moore neighborhood offsets including self: 9 sites in 2D, 27 in 3D.
// Order is (dz, dy, dx) lexicographic with dx fastest; self sits in the middle.
std::span<const Vec3i> moore_offsets(bool three_d);

struct StepMasks {
    std::vector<uint8_t> update;  // u_t, i.i.d. Bernoulli(p)
    std::vector<uint8_t> alive;   // a_t, neighborhood-max aliveness >= threshold
};

// Per-cell 1 iff max aliveness over the 3x3x3 (3x3 in 2D reduces to the same
// zero-padded loop) Moore neighborhood >= kAliveThreshold. Out-of-bounds
// neighbors count as dead.
template <class Real>
std::vector<uint8_t> alive_mask(const BasicGrid<Real>& g) {
    std::vector<uint8_t> mask(size_t(g.cell_count()), 0);
    const int ac = g.alive_channel();
    const int ch = g.channels();
    const Real* base = g.data.data();
    for (int z = 0; z < g.nz; ++z) {
        for (int y = 0; y < g.ny; ++y) {
            for (int x = 0; x < g.nx; ++x) {
                Real best = Real(0);
                for (int dz = -1; dz <= 1; ++dz) {
                    int zz = z + dz;
                    if (zz < 0 || zz >= g.nz) continue;
                    for (int dy = -1; dy <= 1; ++dy) {
                        int yy = y + dy;
                        if (yy < 0 || yy >= g.ny) continue;
                        for (int dx = -1; dx <= 1; ++dx) {
                            int xx = x + dx;
                            if (xx < 0 || xx >= g.nx) continue;
                            Real v = base[size_t(g.cell_index(xx, yy, zz)) * ch + ac];
                            if (v > best) best = v;
                        }
                    }
                }
                mask[size_t(g.cell_index(x, y, z))] = best >= Real(kAliveThreshold) ? 1 : 0;
            }
        }
    }
    return mask;
}

inline std::vector<uint8_t> sample_update_mask(int cell_count, double p, Rng& rng) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("update probability outside [0,1]");
    std::vector<uint8_t> mask(size_t(cell_count), 0);
    for (auto& m : mask) m = rng.bernoulli(p) ? 1 : 0;
    return mask;
}

// h_t = a_t * (h_{t-1} + u_t * delta). Alive-masked cells are zeroed on every
// channel.
template <class Real>
BasicGrid<Real> masked_additive_step(const BasicGrid<Real>& g, const std::vector<Real>& delta,
                                     const StepMasks& masks) {
    const int ch = g.channels();
    const size_t n = size_t(g.cell_count());
    if (delta.size() != n * size_t(ch)) throw std::invalid_argument("delta size mismatch");
    if (masks.update.size() != n || masks.alive.size() != n)
        throw std::invalid_argument("mask size mismatch");
    BasicGrid<Real> out = g;
    for (size_t i = 0; i < n; ++i) {
        Real* dst = out.data.data() + i * ch;
        if (!masks.alive[i]) {
            for (int c = 0; c < ch; ++c) dst[c] = Real(0);
            continue;
        }
        if (masks.update[i]) {
            const Real* dl = delta.data() + i * ch;
            for (int c = 0; c < ch; ++c) dst[c] += dl[c];
        }
    }
    return out;
}

// Single-cell seeds. Dense: SoftPassive with alpha 1. Conv: aliveness 1 and
// H hidden channels drawn i.i.d. uniform [0,1].
CellGrid dense_seed_grid(int nx, int ny, int nz, Vec3i seed_pos);
CellGrid conv_seed_grid(int nx, int ny, int nz, Vec3i seed_pos, Rng& rng,
                        int type_channels = kVoxelTypeCount, int hidden_channels = 10);

template <class Real>
void write_conv_seed(BasicGrid<Real>& g, Vec3i seed_pos, Rng& rng) {
    if (!g.in_bounds(seed_pos.x, seed_pos.y, seed_pos.z)) throw std::out_of_range("seed out of bounds");
    Real* c = g.cell(seed_pos.x, seed_pos.y, seed_pos.z);
    c[g.alive_channel()] = Real(1);
    for (int h = 0; h < g.hidden_channels; ++h)
        c[g.type_channels + 1 + h] = Real(rng.uniform());
}

// Per-cell voxel type. Cells whose own aliveness is below the threshold decode
// to Empty; conv cells take the argmax of the k type channels (ties break to
// the lowest code), dense cells the stored code.
template <class Real>
TypeField decode_types(const BasicGrid<Real>& g) {
    TypeField f = TypeField::empty(g.nx, g.ny, g.nz);
    const int ch = g.channels();
    const int ac = g.alive_channel();
    for (int i = 0; i < g.cell_count(); ++i) {
        const Real* c = g.data.data() + size_t(i) * ch;
        if (!(c[ac] >= Real(kAliveThreshold))) continue;
        int code;
        if (g.variant == GridVariant::Dense) {
            code = int(std::lround(double(c[0])));
            if (code < 0) code = 0;
            if (code >= kVoxelTypeCount) code = kVoxelTypeCount - 1;
        } else {
            code = 0;
            Real best = c[0];
            for (int k = 1; k < g.type_channels; ++k)
                if (c[k] > best) { best = c[k]; code = k; }
        }
        f.types[size_t(i)] = static_cast<VoxelType>(code);
    }
    return f;
}

// Dense grid whose cells carry the given types with alpha 1 on non-empty
// cells. Used to stage regeneration rollouts from a frozen morphology.
CellGrid dense_grid_from_types(const TypeField& f);

// Bounding box of cells with aliveness >= threshold. Returns false if none.
template <class Real>
bool alive_bounding_box(const BasicGrid<Real>& g, Vec3i& lo, Vec3i& hi) {
    bool any = false;
    lo = {g.nx, g.ny, g.nz};
    hi = {-1, -1, -1};
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                if (g.alive_value(g.cell_index(x, y, z)) >= Real(kAliveThreshold)) {
                    any = true;
                    lo.x = std::min(lo.x, x); lo.y = std::min(lo.y, y); lo.z = std::min(lo.z, z);
                    hi.x = std::max(hi.x, x); hi.y = std::max(hi.y, y); hi.z = std::max(hi.z, z);
                }
            }
    return any;
}

// Bounding box of non-empty cells in a decoded field. Returns false if none.
bool occupied_bounding_box(const TypeField& f, Vec3i& lo, Vec3i& hi);

}  // namespace voxnca
