#include "voxnca/ga.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "voxnca/parallel.hpp"

namespace voxnca {

namespace {

int truncation_count(const GaConfig& cfg) {
    int t = int(std::lround(cfg.truncation_fraction * cfg.population));
    t = std::max(t, cfg.elite_count);
    t = std::max(t, 1);
    return std::min(t, cfg.population);
}

}  // namespace

GaResult ga_run(const GaConfig& cfg, const GenomeInit& init, const GenomeEval& evaluate,
                const GaCallback& on_generation) {
    if (cfg.population < 1 || cfg.generations < 1)
        throw std::invalid_argument("ga: population and generations must be positive");
    if (cfg.elite_count < 1 || cfg.elite_count > cfg.population)
        throw std::invalid_argument("ga: elite_count outside [1, population]");
    if (cfg.truncation_fraction <= 0.0 || cfg.truncation_fraction > 1.0)
        throw std::invalid_argument("ga: truncation_fraction outside (0, 1]");
    if (cfg.sigma <= 0.0) throw std::invalid_argument("ga: sigma must be positive");

    Rng master(cfg.seed);
    const int pop = cfg.population;
    const int top = truncation_count(cfg);

    std::vector<std::vector<float>> genomes(static_cast<size_t>(pop));
    for (auto& g : genomes) g = init(master);
    const size_t genome_len = genomes[0].size();

    std::vector<FitnessRecord> records(static_cast<size_t>(pop));
    std::vector<int> order(static_cast<size_t>(pop));

    GaResult result;
    result.history.reserve(size_t(cfg.generations));

    for (int gen = 0; gen < cfg.generations; ++gen) {
        const uint64_t eval_seed = master.split();
        parallel_for(pop, cfg.workers, [&](int i) {
            records[size_t(i)] = evaluate(genomes[size_t(i)], eval_seed);
        });

        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return records[size_t(a)].fitness > records[size_t(b)].fitness;
        });

        GaGenStats stats;
        stats.gen = gen;
        stats.best = records[size_t(order[0])].fitness;
        double sum = 0.0;
        for (const auto& r : records) sum += r.fitness;
        stats.mean = sum / pop;
        std::vector<double> sorted_asc(static_cast<size_t>(pop));
        for (int i = 0; i < pop; ++i)
            sorted_asc[size_t(i)] = records[size_t(order[size_t(pop - 1 - i)])].fitness;
        const int rank = std::max(0, int(std::ceil(0.95 * pop)) - 1);
        stats.p95 = sorted_asc[size_t(rank)];
        result.history.push_back(stats);

        if (gen == 0 || stats.best > result.best_record.fitness ||
            result.best_genome.empty()) {
            result.best_genome = genomes[size_t(order[0])];
            result.best_record = records[size_t(order[0])];
        }
        if (on_generation) on_generation(stats, genomes[size_t(order[0])]);

        if (gen + 1 == cfg.generations) break;

        std::vector<std::vector<float>> next(static_cast<size_t>(pop));
        for (int e = 0; e < cfg.elite_count; ++e) next[size_t(e)] = genomes[size_t(order[size_t(e)])];
        for (int i = cfg.elite_count; i < pop; ++i) {
            const int parent = order[size_t(master.below(top))];
            std::vector<float> child = genomes[size_t(parent)];
            for (size_t j = 0; j < genome_len; ++j)
                child[j] += float(cfg.sigma * master.normal());
            next[size_t(i)] = std::move(child);
        }
        genomes = std::move(next);
    }
    return result;
}

std::string ga_history_csv(const std::vector<GaGenStats>& history) {
    std::ostringstream os;
    os << "gen,best,mean,p95\n";
    os.precision(10);
    for (const auto& h : history) os << h.gen << ',' << h.best << ',' << h.mean << ',' << h.p95 << '\n';
    return os.str();
}

}  // namespace voxnca
