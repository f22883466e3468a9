#include "voxnca/pool_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "voxnca/damage.hpp"
#include "voxnca/parallel.hpp"

namespace voxnca {

SeedPool SeedPool::init(int size, Vec3i dims, Vec3i seed_pos, const ConvConfig& cfg, Rng& rng) {
    SeedPool pool;
    pool.grids.reserve(size_t(size));
    for (int i = 0; i < size; ++i)
        pool.grids.push_back(conv_seed_grid(dims.x, dims.y, dims.z, seed_pos, rng,
                                            cfg.type_channels, cfg.hidden_channels));
    pool.ages.assign(size_t(size), 0);
    return pool;
}

namespace {

// damage center: uniform over the bounding box of live cells, grid center if
// the state is entirely dead
Vec3i pick_damage_center(const CellGrid& g, Rng& rng) {
    Vec3i lo, hi;
    if (!alive_bounding_box(g, lo, hi))
        return {g.nx / 2, g.ny / 2, g.nz / 2};
    return {rng.range(lo.x, hi.x), rng.range(lo.y, hi.y), rng.range(lo.z, hi.z)};
}

}  // namespace

TrainResult pool_train(ConvParams<float>& params, Adam<float>& adam, const TypeField& target,
                       const TrainConfig& cfg, Vec3i seed_pos, Rng& rng,
                       const TrainCallback& on_step, SeedPool* external_pool) {
    validate_target(target);
    if (cfg.batch < 1 || cfg.batch > cfg.pool_size)
        throw std::invalid_argument("batch outside [1, pool_size]");
    if (cfg.t_min < 1 || cfg.t_max < cfg.t_min) throw std::invalid_argument("bad T range");
    if (cfg.damage_radius < 1) throw std::invalid_argument("damage radius must be >= 1");

    const Vec3i dims{target.nx, target.ny, target.nz};
    SeedPool local_pool;
    SeedPool& pool = external_pool ? *external_pool : local_pool;
    if (pool.size() == 0) pool = SeedPool::init(cfg.pool_size, dims, seed_pos, params.cfg, rng);
    if (pool.size() != cfg.pool_size) throw std::invalid_argument("pool size mismatch");

    TrainResult result;
    result.min_loss = std::numeric_limits<float>::max();
    int low_streak = 0;
    const int damage_count = std::min(2, std::max(0, cfg.batch - 1));

    std::vector<int> indices(static_cast<size_t>(cfg.pool_size));
    std::iota(indices.begin(), indices.end(), 0);

    for (int step = 1; step <= cfg.max_steps; ++step) {
        // sample batch distinct pool slots
        std::vector<int> idx(static_cast<size_t>(cfg.batch));
        for (int j = 0; j < cfg.batch; ++j) {
            const int pick = rng.range(j, cfg.pool_size - 1);
            std::swap(indices[size_t(j)], indices[size_t(pick)]);
            idx[size_t(j)] = indices[size_t(j)];
        }

        // per-seed losses on the current states, sorted worst first
        std::vector<double> pre_loss(static_cast<size_t>(cfg.batch));
        for (int j = 0; j < cfg.batch; ++j)
            pre_loss[size_t(j)] = double(nca_loss(pool.grids[size_t(idx[size_t(j)])], target).loss);
        std::vector<int> order(static_cast<size_t>(cfg.batch));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
            return pre_loss[size_t(a)] > pre_loss[size_t(b)];
        });

        std::vector<CellGrid> seeds(static_cast<size_t>(cfg.batch));
        std::vector<int> slot(static_cast<size_t>(cfg.batch));
        for (int j = 0; j < cfg.batch; ++j) {
            slot[size_t(j)] = idx[size_t(order[size_t(j)])];
            seeds[size_t(j)] = pool.grids[size_t(slot[size_t(j)])];
        }

        // worst sampled state -> fresh single-cell seed
        seeds[0] = conv_seed_grid(dims.x, dims.y, dims.z, seed_pos, rng, params.cfg.type_channels,
                                  params.cfg.hidden_channels);
        // two lowest-loss states get sphere damage
        for (int j = cfg.batch - damage_count; j < cfg.batch; ++j) {
            const Vec3i center = pick_damage_center(seeds[size_t(j)], rng);
            seeds[size_t(j)] = damage_sphere(seeds[size_t(j)], center, cfg.damage_radius);
        }

        const int t_steps = rng.range(cfg.t_min, cfg.t_max);
        std::vector<uint64_t> stream(static_cast<size_t>(cfg.batch));
        for (auto& s : stream) s = rng.split();

        std::vector<CellGrid> outputs(static_cast<size_t>(cfg.batch));
        std::vector<ConvTape<float>> tapes(static_cast<size_t>(cfg.batch));
        std::vector<LossResult<float>> losses(static_cast<size_t>(cfg.batch));
        std::vector<std::vector<float>> grads(static_cast<size_t>(cfg.batch));
        std::vector<uint8_t> ok(static_cast<size_t>(cfg.batch), 1);
        parallel_for(cfg.batch, cfg.workers, [&](int j) {
            Rng child(stream[size_t(j)]);
            outputs[size_t(j)] =
                conv_rollout(params, seeds[size_t(j)], t_steps, child, params.cfg.update_p,
                             &tapes[size_t(j)]);
            for (float v : outputs[size_t(j)].data)
                if (!std::isfinite(v)) { ok[size_t(j)] = 0; break; }
            if (ok[size_t(j)]) {
                losses[size_t(j)] = nca_loss(outputs[size_t(j)], target);
                if (!std::isfinite(double(losses[size_t(j)].loss))) ok[size_t(j)] = 0;
            }
            if (ok[size_t(j)])
                grads[size_t(j)] = conv_backward(params, tapes[size_t(j)], losses[size_t(j)].grad);
            tapes[size_t(j)].steps.clear();
        });

        // summed gradient, fixed order; exploded rollouts contribute nothing
        // and their slots are reseeded instead of poisoning the pool
        std::vector<float> total(conv_layout(params.cfg).total, 0.0f);
        double loss_sum = 0.0, ce_sum = 0.0, iou_sum = 0.0;
        int ok_count = 0;
        for (int j = 0; j < cfg.batch; ++j) {
            if (!ok[size_t(j)]) continue;
            for (size_t i = 0; i < total.size(); ++i) total[i] += grads[size_t(j)][i];
            loss_sum += double(losses[size_t(j)].loss);
            ce_sum += double(losses[size_t(j)].ce);
            iou_sum += double(losses[size_t(j)].iou);
            ++ok_count;
        }

        if (ok_count > 0) {
            if (cfg.grad_clip > 0.0) {
                double norm2 = 0.0;
                for (float v : total) norm2 += double(v) * double(v);
                const double norm = std::sqrt(norm2);
                if (norm > cfg.grad_clip) {
                    const float scale = float(cfg.grad_clip / norm);
                    for (auto& v : total) v *= scale;
                }
            }
            adam.step(params.values, total);
        }

        // outputs replace the sampled slots
        for (int j = 0; j < cfg.batch; ++j) {
            const int s = slot[size_t(j)];
            if (ok[size_t(j)]) {
                pool.grids[size_t(s)] = std::move(outputs[size_t(j)]);
                pool.ages[size_t(s)] = j == 0 ? 0 : pool.ages[size_t(s)] + 1;
            } else {
                pool.grids[size_t(s)] = conv_seed_grid(dims.x, dims.y, dims.z, seed_pos, rng,
                                                       params.cfg.type_channels,
                                                       params.cfg.hidden_channels);
                pool.ages[size_t(s)] = 0;
            }
        }

        TrainRow row;
        row.step = step;
        const int denom = std::max(ok_count, 1);
        row.loss = ok_count > 0 ? float(loss_sum / denom) : std::numeric_limits<float>::infinity();
        row.ce = float(ce_sum / denom);
        row.iou = float(iou_sum / denom);
        row.t_steps = t_steps;
        row.damaged = damage_count;
        result.steps = step;
        result.final_loss = row.loss;
        result.min_loss = std::min(result.min_loss, row.loss);
        if (step % cfg.log_every == 0 || step == 1 || step == cfg.max_steps)
            result.curve.push_back(row);
        if (on_step) on_step(row);

        if (cfg.stop_at_zero_loss) {
            low_streak = row.loss < cfg.zero_loss_eps ? low_streak + 1 : 0;
            if (low_streak >= cfg.zero_loss_patience) {
                result.converged = true;
                if (result.curve.empty() || result.curve.back().step != step)
                    result.curve.push_back(row);
                break;
            }
        }
    }
    return result;
}

std::vector<CellGrid> regrow(const ConvParams<float>& params, const CellGrid& start, int steps,
                             Rng& rng) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    std::vector<CellGrid> seq;
    seq.reserve(size_t(steps) + 1);
    seq.push_back(start);
    for (int t = 0; t < steps; ++t)
        seq.push_back(conv_forward_step(params, seq.back(), rng, params.cfg.update_p));
    return seq;
}

std::string train_curve_csv(const std::vector<TrainRow>& curve) {
    std::ostringstream os;
    os << "step,loss,ce,iou,t,damaged\n";
    os.precision(8);
    for (const auto& r : curve)
        os << r.step << ',' << r.loss << ',' << r.ce << ',' << r.iou << ',' << r.t_steps << ','
           << r.damaged << '\n';
    return os.str();
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    const ConvConfig& c = ck.params.cfg;
    nlohmann::json header = {
        {"format", "voxnca-checkpoint"},
        {"version", 1},
        {"config",
         {{"type_channels", c.type_channels},
          {"hidden_channels", c.hidden_channels},
          {"width1", c.width1},
          {"width2", c.width2},
          {"init_std", c.init_std},
          {"update_p", c.update_p}}},
        {"adam",
         {{"lr", ck.adam.lr},
          {"beta1", ck.adam.beta1},
          {"beta2", ck.adam.beta2},
          {"eps", ck.adam.eps},
          {"t", ck.adam.t}}},
        {"rng", ck.rng_state},
        {"step", ck.step},
        {"param_count", ck.params.values.size()},
    };
    out << header.dump() << '\n';
    auto write_block = [&](const std::vector<float>& v) {
        out.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(float)));
    };
    write_block(ck.params.values);
    write_block(ck.adam.m);
    write_block(ck.adam.v);
    if (!out) throw std::runtime_error("write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("missing checkpoint header: " + path);
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("format", "") != "voxnca-checkpoint")
        throw std::runtime_error("not a checkpoint file: " + path);

    Checkpoint ck;
    const auto& jc = header.at("config");
    ck.params.cfg.type_channels = jc.at("type_channels");
    ck.params.cfg.hidden_channels = jc.at("hidden_channels");
    ck.params.cfg.width1 = jc.at("width1");
    ck.params.cfg.width2 = jc.at("width2");
    ck.params.cfg.init_std = jc.at("init_std");
    ck.params.cfg.update_p = jc.at("update_p");

    const size_t count = header.at("param_count");
    if (count != conv_layout(ck.params.cfg).total)
        throw std::runtime_error("checkpoint parameter count mismatch: " + path);

    ck.adam = Adam<float>(count);
    const auto& ja = header.at("adam");
    ck.adam.lr = ja.at("lr");
    ck.adam.beta1 = ja.at("beta1");
    ck.adam.beta2 = ja.at("beta2");
    ck.adam.eps = ja.at("eps");
    ck.adam.t = ja.at("t");
    ck.rng_state = header.at("rng");
    ck.step = header.at("step");

    ck.params.values.resize(count);
    auto read_block = [&](std::vector<float>& v) {
        in.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(float)));
        if (size_t(in.gcount()) != v.size() * sizeof(float))
            throw std::runtime_error("truncated checkpoint: " + path);
    };
    read_block(ck.params.values);
    read_block(ck.adam.m);
    read_block(ck.adam.v);
    return ck;
}

}  // namespace voxnca
