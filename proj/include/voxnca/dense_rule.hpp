#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "voxnca/grid.hpp"
#include "voxnca/rng.hpp"

namespace voxnca {

// Three-layer update rule for the evolutionary NCA. Each cell observes
// (type code / 4, alpha) for every Moore neighbor and emits 5 type logits
// plus its next alpha. The middle layer is either a linear layer or an LSTM
// cell (per-cell memory).
struct DenseConfig {
    bool three_d = false;
    int hidden_dim = 64;
    bool recurrent = false;
    double update_p = 0.5;  // Bernoulli gate of the masked update

    int neighborhood_size() const { return three_d ? 27 : 9; }
    int input_dim() const { return neighborhood_size() * 2; }
    static constexpr int output_dim = kVoxelTypeCount + 1;
};

// Flat parameter layout (row-major, out-major). Feed-forward:
//   W1[h][in] b1[h] | W2[h][h] b2[h] | W3[6][h] b3[6]
// Recurrent replaces the middle block with an LSTM on the layer-1 output,
// gate order i,f,g,o:
//   Wx[4][h][h] Uh[4][h][h] bg[4][h]
struct DenseLayout {
    size_t w1 = 0, b1 = 0;
    size_t w2 = 0, b2 = 0;        // feed-forward middle
    size_t wx = 0, uh = 0, bg = 0;  // recurrent middle
    size_t w3 = 0, b3 = 0;
    size_t total = 0;
};

DenseLayout dense_layout(const DenseConfig& cfg);
size_t dense_param_count(const DenseConfig& cfg);

// Per-layer normal init, std 1/sqrt(fan_in); LSTM forget-gate bias starts at 1.
std::vector<float> dense_init_params(const DenseConfig& cfg, Rng& rng);

// Per-cell LSTM state. Cells that die (alive mask 0) have their memory zeroed.
struct DenseMemories {
    std::vector<float> h, c;
    static DenseMemories zeros(int cells, int hidden_dim) {
        DenseMemories m;
        m.h.assign(size_t(cells) * size_t(hidden_dim), 0.0f);
        m.c.assign(size_t(cells) * size_t(hidden_dim), 0.0f);
        return m;
    }
    bool empty() const { return h.empty(); }
};

// One synchronous step: network output (argmax type, sigmoid alpha) replaces
// the cell state through the masked additive contract. `memories` must be
// non-null iff cfg.recurrent.
CellGrid dense_forward(const DenseConfig& cfg, std::span<const float> params, const CellGrid& grid,
                       DenseMemories* memories, Rng& rng);

// Rollout from a seed with fresh (zero) memories; returns all steps+1 grids.
std::vector<CellGrid> dense_grow(const DenseConfig& cfg, std::span<const float> params,
                                 const CellGrid& seed, int steps, Rng& rng);

// Parameter file: one-line JSON header (config hash, count) + raw float32.
void save_dense_params(const DenseConfig& cfg, std::span<const float> params,
                       const std::string& path);
std::vector<float> load_dense_params(const DenseConfig& cfg, const std::string& path);

std::string dense_config_hash(const DenseConfig& cfg);

}  // namespace voxnca
