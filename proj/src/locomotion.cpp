#include "voxnca/locomotion.hpp"

#include "voxnca/damage.hpp"

namespace voxnca {

LocomotionProtocol protocol_2d(bool recurrent) {
    LocomotionProtocol p;
    p.rule.three_d = false;
    p.rule.recurrent = recurrent;
    p.dims = {7, 7, 1};
    p.seed_pos = {3, 3, 0};
    p.sim.duration = 0.25;
    p.voxel_cost_weight = 0.0;
    return p;
}

LocomotionProtocol protocol_3d(bool recurrent) {
    LocomotionProtocol p;
    p.rule.three_d = true;
    p.rule.recurrent = recurrent;
    p.dims = {9, 9, 9};
    p.seed_pos = {4, 4, 4};
    p.sim.duration = 0.5;
    p.voxel_cost_weight = 0.05;
    return p;
}

FitnessRecord evaluate_locomotion(const LocomotionProtocol& proto,
                                  const std::vector<float>& genome, uint64_t eval_seed) {
    Rng rng(eval_seed);
    const CellGrid seed = dense_seed_grid(proto.dims.x, proto.dims.y, proto.dims.z, proto.seed_pos);
    const auto sequence = dense_grow(proto.rule, genome, seed, proto.growth_steps, rng);
    const TypeField body = decode_types(sequence.back());

    FitnessRecord rec;
    rec.voxel_cost = double(body.non_empty_count());
    if (rec.voxel_cost == 0.0) {
        rec.empty_body = true;
        rec.fitness = 0.0;  // zero voxels after growth
        return rec;
    }
    const RobotModel model = materialize(body, proto.seed_pos, proto.sim);
    const SimResult sim = simulate(model, proto.sim);
    rec.diverged = sim.diverged;
    if (sim.diverged) {
        rec.fitness = 0.0;
        return rec;
    }
    rec.distance = sim.distance;
    rec.fitness = sim.distance - proto.voxel_cost_weight * rec.voxel_cost;
    return rec;
}

TypeField grow_morphology(const LocomotionProtocol& proto, const std::vector<float>& genome,
                          uint64_t eval_seed) {
    Rng rng(eval_seed);
    const CellGrid seed = dense_seed_grid(proto.dims.x, proto.dims.y, proto.dims.z, proto.seed_pos);
    const auto sequence = dense_grow(proto.rule, genome, seed, proto.growth_steps, rng);
    return decode_types(sequence.back());
}

GaResult evolve_locomotion(const LocomotionProtocol& proto, const GaConfig& ga,
                           const GaCallback& on_generation) {
    const DenseConfig rule = proto.rule;
    return ga_run(
        ga, [rule](Rng& rng) { return dense_init_params(rule, rng); },
        [proto](const std::vector<float>& genome, uint64_t seed) {
            return evaluate_locomotion(proto, genome, seed);
        },
        on_generation);
}

FitnessRecord evaluate_regeneration(const RegenTask& task, const std::vector<float>& genome,
                                    uint64_t eval_seed) {
    Rng rng(eval_seed);
    const auto sequence = dense_grow(task.rule, genome, task.damaged_start, task.growth_steps, rng);
    const Similarity sim = similarity(decode_types(sequence.back()), task.target);
    FitnessRecord rec;
    rec.similarity = double(sim.matched);
    rec.fitness = double(sim.matched);
    return rec;
}

GaResult evolve_regeneration(const RegenTask& task, const GaConfig& ga,
                             const GaCallback& on_generation) {
    const DenseConfig rule = task.rule;
    return ga_run(
        ga, [rule](Rng& rng) { return dense_init_params(rule, rng); },
        [&task](const std::vector<float>& genome, uint64_t seed) {
            return evaluate_regeneration(task, genome, seed);
        },
        on_generation);
}

}  // namespace voxnca
