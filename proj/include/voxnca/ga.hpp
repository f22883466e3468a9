#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "voxnca/rng.hpp"

namespace voxnca {

// Truncation-selection GA with elitism: every generation the population is
// sorted by fitness, the top elite_count pass unchanged, and the rest are
// parents drawn uniformly (with replacement) from the top truncation_fraction
// and mutated with theta' = theta + sigma * N(0, I).
struct GaConfig {
    int population = 50;
    int generations = 100;
    double truncation_fraction = 0.25;
    int elite_count = 1;
    double sigma = 0.03;
    uint64_t seed = 0;
    int workers = 1;
};

struct FitnessRecord {
    double fitness = 0.0;
    double distance = 0.0;
    double voxel_cost = 0.0;
    double similarity = -1.0;  // matched voxel count, regeneration runs only
    bool diverged = false;
    bool empty_body = false;
};

struct GaGenStats {
    int gen = 0;
    double best = 0.0, mean = 0.0, p95 = 0.0;
};

struct GaResult {
    std::vector<float> best_genome;
    FitnessRecord best_record;
    std::vector<GaGenStats> history;
};

using GenomeInit = std::function<std::vector<float>(Rng&)>;
// Evaluation must be deterministic in (genome, eval_seed); the same eval_seed
// is handed to every genome of a generation so comparisons are fair.
using GenomeEval = std::function<FitnessRecord(const std::vector<float>&, uint64_t)>;
using GaCallback =
    std::function<void(const GaGenStats&, const std::vector<float>& best_genome)>;

GaResult ga_run(const GaConfig& cfg, const GenomeInit& init, const GenomeEval& evaluate,
                const GaCallback& on_generation = nullptr);

std::string ga_history_csv(const std::vector<GaGenStats>& history);

}  // namespace voxnca
