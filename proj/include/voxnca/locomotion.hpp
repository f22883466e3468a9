#pragma once

#include "voxnca/dense_rule.hpp"
#include "voxnca/ga.hpp"
#include "voxnca/physics.hpp"

namespace voxnca {

// Everything one locomotion evaluation needs: grow for growth_steps with the
// dense rule, materialize the seed component, simulate, score.
struct LocomotionProtocol {
    DenseConfig rule;
    Vec3i dims{7, 7, 1};
    Vec3i seed_pos{3, 3, 0};
    int growth_steps = 10;
    SimConfig sim;
    double voxel_cost_weight = 0.0;  // 3D runs subtract cost * non-empty voxels
};

// 7x7, seed (3,3), 0.25 s (10 actuation cycles), distance-only fitness.
LocomotionProtocol protocol_2d(bool recurrent = false);
// 9x9x9, seed (4,4,4), 0.5 s, fitness = distance - cost.
LocomotionProtocol protocol_3d(bool recurrent = false);

FitnessRecord evaluate_locomotion(const LocomotionProtocol& proto,
                                  const std::vector<float>& genome, uint64_t eval_seed);

// Grows with a fixed seed and returns the final decoded morphology.
TypeField grow_morphology(const LocomotionProtocol& proto, const std::vector<float>& genome,
                          uint64_t eval_seed);

GaResult evolve_locomotion(const LocomotionProtocol& proto, const GaConfig& ga,
                           const GaCallback& on_generation = nullptr);

// Regeneration by evolving a second dense NCA: rollouts start from the
// damaged morphology (memories zeroed) and fitness is the voxel-similarity
// count against the frozen target, in [0, cells].
struct RegenTask {
    TypeField target;
    CellGrid damaged_start;  // dense variant
    DenseConfig rule;
    int growth_steps = 10;
};

FitnessRecord evaluate_regeneration(const RegenTask& task, const std::vector<float>& genome,
                                    uint64_t eval_seed);

GaResult evolve_regeneration(const RegenTask& task, const GaConfig& ga,
                             const GaCallback& on_generation = nullptr);

}  // namespace voxnca
