#include "voxnca/dense_rule.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace voxnca {

namespace {

inline float sigmoidf(float x) { return 1.0f / (1.0f + std::exp(-x)); }

}  // namespace

DenseLayout dense_layout(const DenseConfig& cfg) {
    const size_t in = size_t(cfg.input_dim());
    const size_t h = size_t(cfg.hidden_dim);
    const size_t out = size_t(DenseConfig::output_dim);
    DenseLayout l;
    size_t off = 0;
    l.w1 = off; off += h * in;
    l.b1 = off; off += h;
    if (cfg.recurrent) {
        l.wx = off; off += 4 * h * h;
        l.uh = off; off += 4 * h * h;
        l.bg = off; off += 4 * h;
    } else {
        l.w2 = off; off += h * h;
        l.b2 = off; off += h;
    }
    l.w3 = off; off += out * h;
    l.b3 = off; off += out;
    l.total = off;
    return l;
}

size_t dense_param_count(const DenseConfig& cfg) { return dense_layout(cfg).total; }

std::vector<float> dense_init_params(const DenseConfig& cfg, Rng& rng) {
    const DenseLayout l = dense_layout(cfg);
    const size_t h = size_t(cfg.hidden_dim);
    std::vector<float> p(l.total, 0.0f);
    auto fill = [&](size_t off, size_t count, double std) {
        for (size_t i = 0; i < count; ++i) p[off + i] = float(rng.normal(0.0, std));
    };
    fill(l.w1, h * size_t(cfg.input_dim()), 1.0 / std::sqrt(double(cfg.input_dim())));
    if (cfg.recurrent) {
        fill(l.wx, 4 * h * h, 1.0 / std::sqrt(double(h)));
        fill(l.uh, 4 * h * h, 1.0 / std::sqrt(double(h)));
        // forget-gate bias (gate order i,f,g,o)
        for (size_t i = 0; i < h; ++i) p[l.bg + h + i] = 1.0f;
    } else {
        fill(l.w2, h * h, 1.0 / std::sqrt(double(h)));
    }
    fill(l.w3, size_t(DenseConfig::output_dim) * h, 1.0 / std::sqrt(double(h)));
    return p;
}

CellGrid dense_forward(const DenseConfig& cfg, std::span<const float> params, const CellGrid& grid,
                       DenseMemories* memories, Rng& rng) {
    if (grid.variant != GridVariant::Dense)
        throw std::invalid_argument("dense_forward needs a dense-variant grid");
    const DenseLayout l = dense_layout(cfg);
    if (params.size() != l.total) throw std::invalid_argument("parameter vector size mismatch");
    const int cells = grid.cell_count();
    const int h = cfg.hidden_dim;
    if (cfg.recurrent) {
        if (!memories || memories->h.size() != size_t(cells) * size_t(h))
            throw std::invalid_argument("recurrent rule needs memories sized to the grid");
    }

    const std::vector<uint8_t> alive = alive_mask(grid);
    const std::vector<uint8_t> update = sample_update_mask(cells, cfg.update_p, rng);

    const auto offsets = moore_offsets(cfg.three_d);
    if (int(offsets.size()) != cfg.neighborhood_size())
        throw std::invalid_argument("config dimensionality does not match grid use");

    std::vector<float> delta(size_t(cells) * 2, 0.0f);
    std::vector<float> input(size_t(cfg.input_dim()), 0.0f);
    std::vector<float> a1(size_t(h), 0.0f);
    std::vector<float> mid(size_t(h), 0.0f);
    std::vector<float> gates(cfg.recurrent ? size_t(4 * h) : size_t(0), 0.0f);
    std::vector<float> new_h, new_c;
    if (cfg.recurrent) {
        new_h = memories->h;
        new_c = memories->c;
    }

    const float* P = params.data();
    for (int z = 0; z < grid.nz; ++z)
        for (int y = 0; y < grid.ny; ++y)
            for (int x = 0; x < grid.nx; ++x) {
                const int idx = grid.cell_index(x, y, z);
                if (!alive[size_t(idx)] || !update[size_t(idx)]) continue;

                // observation: (type code / 4, alpha) per neighbor, zeros outside
                int j = 0;
                for (const Vec3i& o : offsets) {
                    int xx = x + o.x, yy = y + o.y, zz = z + o.z;
                    if (grid.in_bounds(xx, yy, zz)) {
                        const float* n = grid.cell(xx, yy, zz);
                        input[size_t(j++)] = n[0] * 0.25f;
                        input[size_t(j++)] = n[1];
                    } else {
                        input[size_t(j++)] = 0.0f;
                        input[size_t(j++)] = 0.0f;
                    }
                }

                const int in = cfg.input_dim();
                for (int r = 0; r < h; ++r) {
                    const float* w = P + l.w1 + size_t(r) * size_t(in);
                    float acc = P[l.b1 + size_t(r)];
                    for (int c = 0; c < in; ++c) acc += w[c] * input[size_t(c)];
                    a1[size_t(r)] = std::tanh(acc);
                }

                if (cfg.recurrent) {
                    float* hm = memories->h.data() + size_t(idx) * size_t(h);
                    float* cm = memories->c.data() + size_t(idx) * size_t(h);
                    for (int gte = 0; gte < 4; ++gte)
                        for (int r = 0; r < h; ++r) {
                            const size_t row = size_t(gte) * size_t(h) + size_t(r);
                            const float* wx = P + l.wx + row * size_t(h);
                            const float* uh = P + l.uh + row * size_t(h);
                            float acc = P[l.bg + row];
                            for (int c = 0; c < h; ++c)
                                acc += wx[c] * a1[size_t(c)] + uh[c] * hm[c];
                            gates[row] = acc;
                        }
                    for (int r = 0; r < h; ++r) {
                        float gi = sigmoidf(gates[size_t(r)]);
                        float gf = sigmoidf(gates[size_t(h + r)]);
                        float gg = std::tanh(gates[size_t(2 * h + r)]);
                        float go = sigmoidf(gates[size_t(3 * h + r)]);
                        float cn = gf * cm[r] + gi * gg;
                        float hn = go * std::tanh(cn);
                        new_c[size_t(idx) * size_t(h) + size_t(r)] = cn;
                        new_h[size_t(idx) * size_t(h) + size_t(r)] = hn;
                        mid[size_t(r)] = std::tanh(hn);
                    }
                } else {
                    for (int r = 0; r < h; ++r) {
                        const float* w = P + l.w2 + size_t(r) * size_t(h);
                        float acc = P[l.b2 + size_t(r)];
                        for (int c = 0; c < h; ++c) acc += w[c] * a1[size_t(c)];
                        mid[size_t(r)] = std::tanh(acc);
                    }
                }

                float outv[DenseConfig::output_dim];
                for (int r = 0; r < DenseConfig::output_dim; ++r) {
                    const float* w = P + l.w3 + size_t(r) * size_t(h);
                    float acc = P[l.b3 + size_t(r)];
                    for (int c = 0; c < h; ++c) acc += w[c] * mid[size_t(c)];
                    outv[r] = acc;
                }
                int code = 0;
                for (int k = 1; k < kVoxelTypeCount; ++k)
                    if (outv[k] > outv[code]) code = k;
                float alpha = sigmoidf(outv[kVoxelTypeCount]);

                const float* cur = grid.cell(idx);
                delta[size_t(idx) * 2 + 0] = float(code) - cur[0];
                delta[size_t(idx) * 2 + 1] = alpha - cur[1];
            }

    CellGrid next = masked_additive_step(grid, delta, StepMasks{update, alive});

    if (cfg.recurrent) {
        for (int i = 0; i < cells; ++i) {
            float* dh = new_h.data() + size_t(i) * size_t(h);
            float* dc = new_c.data() + size_t(i) * size_t(h);
            if (!alive[size_t(i)]) {
                std::memset(dh, 0, size_t(h) * sizeof(float));
                std::memset(dc, 0, size_t(h) * sizeof(float));
            }
        }
        memories->h = std::move(new_h);
        memories->c = std::move(new_c);
    }
    return next;
}

std::vector<CellGrid> dense_grow(const DenseConfig& cfg, std::span<const float> params,
                                 const CellGrid& seed, int steps, Rng& rng) {
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    std::vector<CellGrid> seq;
    seq.reserve(size_t(steps) + 1);
    seq.push_back(seed);
    DenseMemories mem;
    if (cfg.recurrent) mem = DenseMemories::zeros(seed.cell_count(), cfg.hidden_dim);
    for (int t = 0; t < steps; ++t)
        seq.push_back(dense_forward(cfg, params, seq.back(), cfg.recurrent ? &mem : nullptr, rng));
    return seq;
}

std::string dense_config_hash(const DenseConfig& cfg) {
    // FNV-1a over the fields that determine the layout
    std::ostringstream os;
    os << "dense|" << cfg.three_d << '|' << cfg.hidden_dim << '|' << cfg.recurrent;
    uint64_t acc = 1469598103934665603ull;
    for (char c : os.str()) {
        acc ^= uint64_t(uint8_t(c));
        acc *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex << acc;
    return hex.str();
}

void save_dense_params(const DenseConfig& cfg, std::span<const float> params,
                       const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + path);
    nlohmann::json header = {
        {"format", "voxnca-params"},
        {"version", 1},
        {"config_hash", dense_config_hash(cfg)},
        {"count", params.size()},
    };
    out << header.dump() << '\n';
    out.write(reinterpret_cast<const char*>(params.data()),
              std::streamsize(params.size() * sizeof(float)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<float> load_dense_params(const DenseConfig& cfg, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("missing params header: " + path);
    nlohmann::json header = nlohmann::json::parse(line);
    if (header.value("format", "") != "voxnca-params")
        throw std::runtime_error("not a params file: " + path);
    if (header.at("config_hash").get<std::string>() != dense_config_hash(cfg))
        throw std::runtime_error("params file was written for a different config: " + path);
    size_t count = header.at("count");
    if (count != dense_param_count(cfg))
        throw std::runtime_error("params count mismatch: " + path);
    std::vector<float> p(count);
    in.read(reinterpret_cast<char*>(p.data()), std::streamsize(count * sizeof(float)));
    if (size_t(in.gcount()) != count * sizeof(float))
        throw std::runtime_error("truncated params data: " + path);
    return p;
}

}  // namespace voxnca
