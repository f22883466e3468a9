#pragma once

#include <functional>
#include <string>
#include <vector>

#include "voxnca/adam.hpp"
#include "voxnca/conv_rule.hpp"
#include "voxnca/loss.hpp"

namespace voxnca {

// Pool-based damage training of the conv rule: every step samples a batch
// from the pool, replaces the worst sampled state with a fresh single-cell
// seed, sphere-damages the two best, rolls everything out T ~ U[t_min, t_max]
// steps, and trains on the summed loss before writing the outputs back.
struct TrainConfig {
    int max_steps = 20000;
    int t_min = 48, t_max = 64;
    int damage_radius = 3;
    int batch = 5;
    int pool_size = 32;
    bool stop_at_zero_loss = true;
    double zero_loss_eps = 1e-4;  // "reaches 0": mean loss below eps ...
    int zero_loss_patience = 50;  // ... for this many consecutive steps
    double learning_rate = 1e-3;
    double grad_clip = 10.0;  // global norm; 0 disables
    int workers = 1;
    int log_every = 10;
};

struct SeedPool {
    std::vector<CellGrid> grids;
    std::vector<int> ages;

    static SeedPool init(int size, Vec3i dims, Vec3i seed_pos, const ConvConfig& cfg, Rng& rng);
    int size() const { return int(grids.size()); }
};

struct TrainRow {
    int step = 0;
    float loss = 0.0f;  // batch mean
    float ce = 0.0f;
    float iou = 0.0f;
    int t_steps = 0;
    int damaged = 0;
};

struct TrainResult {
    std::vector<TrainRow> curve;
    int steps = 0;
    bool converged = false;
    float final_loss = 0.0f;
    float min_loss = 0.0f;
};

using TrainCallback = std::function<void(const TrainRow&)>;

// `external_pool`, when given, is used (and initialized if empty) instead of
// a run-local pool, so callers can resume training or inspect pool state.
TrainResult pool_train(ConvParams<float>& params, Adam<float>& adam, const TypeField& target,
                       const TrainConfig& cfg, Vec3i seed_pos, Rng& rng,
                       const TrainCallback& on_step = nullptr, SeedPool* external_pool = nullptr);

// Pure rollout from a (typically damaged) state; returns all steps+1 grids.
std::vector<CellGrid> regrow(const ConvParams<float>& params, const CellGrid& start, int steps,
                             Rng& rng);

std::string train_curve_csv(const std::vector<TrainRow>& curve);

// Checkpoint: conv config + Adam state + step counter + rng state, then the
// raw float32 parameter and moment arrays.
struct Checkpoint {
    ConvParams<float> params;
    Adam<float> adam;
    std::string rng_state;
    int step = 0;
};

void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace voxnca
