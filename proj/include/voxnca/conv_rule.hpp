#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "voxnca/grid.hpp"
#include "voxnca/rng.hpp"

namespace voxnca {

// Convolutional update rule: a 3x3x3 perception convolution (D -> 3D channels,
// zero padded) feeding a per-cell update net of two ReLU 1x1x1 layers and a
// final linear 1x1x1 layer back to D channels. The delta it produces goes
// through the shared masked additive step.
struct ConvConfig {
    int type_channels = kVoxelTypeCount;  // k
    int hidden_channels = 10;             // H
    int width1 = 64;
    int width2 = 64;
    double init_std = 0.1;
    double update_p = 0.5;

    int state_dim() const { return type_channels + 1 + hidden_channels; }  // D
    int perception_dim() const { return 3 * state_dim(); }

    bool operator==(const ConvConfig&) const = default;
};

// Flat layout:
//   Wp[27][D][3D] bp[3D] | W1[3D][w1] b1[w1] | W2[w1][w2] b2[w2] | Wf[w2][D] bf[D]
// Weight matrices are input-major with the output channel contiguous.
struct ConvLayout {
    size_t wp = 0, bp = 0;
    size_t w1 = 0, b1 = 0;
    size_t w2 = 0, b2 = 0;
    size_t wf = 0, bf = 0;
    size_t total = 0;
};

ConvLayout conv_layout(const ConvConfig& cfg);

template <class Real>
struct ConvParams {
    ConvConfig cfg;
    std::vector<Real> values;

    static ConvParams zeros(const ConvConfig& cfg) {
        ConvParams p;
        p.cfg = cfg;
        p.values.assign(conv_layout(cfg).total, Real(0));
        return p;
    }
    // i.i.d. normal(0, init_std) on every weight and bias
    static ConvParams init(const ConvConfig& cfg, Rng& rng) {
        ConvParams p = zeros(cfg);
        for (auto& v : p.values) v = Real(rng.normal(0.0, cfg.init_std));
        return p;
    }

    template <class R2>
    ConvParams<R2> cast() const {
        ConvParams<R2> p;
        p.cfg = cfg;
        p.values.assign(values.begin(), values.end());
        return p;
    }
};

// Everything the reverse pass needs for one step: the pre-step state, the
// realized masks, and the update-net activations on the alive set.
template <class Real>
struct ConvStepRecord {
    std::vector<Real> state;       // h_{t-1}, cells * D
    std::vector<int32_t> active;   // cells with alive mask 1, ascending
    std::vector<uint8_t> alive;    // per cell
    std::vector<uint8_t> update;   // per cell
    std::vector<Real> percept;     // |active| * 3D
    std::vector<Real> act1;        // |active| * w1, post-ReLU
    std::vector<Real> act2;        // |active| * w2, post-ReLU
};

template <class Real>
struct ConvTape {
    int nx = 0, ny = 0, nz = 0;
    ConvConfig cfg;
    std::vector<ConvStepRecord<Real>> steps;
};

// One masked additive step. `record`, when given, captures the tape fragment.
template <class Real>
BasicGrid<Real> conv_forward_step(const ConvParams<Real>& params, const BasicGrid<Real>& grid,
                                  Rng& rng, double p, ConvStepRecord<Real>* record = nullptr);

// T chained steps; fills `tape` (when non-null) with per-step records.
template <class Real>
BasicGrid<Real> conv_rollout(const ConvParams<Real>& params, const BasicGrid<Real>& seed, int steps,
                             Rng& rng, double p, ConvTape<Real>* tape = nullptr);

// Reverse-mode gradients of the recorded rollout w.r.t. every parameter, for
// an upstream gradient on the final grid. The realized masks are constants of
// the rollout. Returns a flat vector with the ConvLayout offsets.
template <class Real>
std::vector<Real> conv_backward(const ConvParams<Real>& params, const ConvTape<Real>& tape,
                                const std::vector<Real>& final_grad);

}  // namespace voxnca
