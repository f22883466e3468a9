#include "voxnca/conv_rule.hpp"

#include <cstring>
#include <stdexcept>

namespace voxnca {

ConvLayout conv_layout(const ConvConfig& cfg) {
    const size_t d = size_t(cfg.state_dim());
    const size_t p3 = size_t(cfg.perception_dim());
    const size_t w1 = size_t(cfg.width1);
    const size_t w2 = size_t(cfg.width2);
    ConvLayout l;
    size_t off = 0;
    l.wp = off; off += 27 * d * p3;
    l.bp = off; off += p3;
    l.w1 = off; off += p3 * w1;
    l.b1 = off; off += w1;
    l.w2 = off; off += w1 * w2;
    l.b2 = off; off += w2;
    l.wf = off; off += w2 * d;
    l.bf = off; off += d;
    l.total = off;
    return l;
}

namespace {

// tap order matches moore_offsets(true): (dz, dy, dx) lexicographic, dx fastest
inline int tap_neighbor(const Vec3i& o, int x, int y, int z, int nx, int ny, int nz) {
    int xx = x + o.x, yy = y + o.y, zz = z + o.z;
    if (xx < 0 || xx >= nx || yy < 0 || yy >= ny || zz < 0 || zz >= nz) return -1;
    return xx + nx * (yy + ny * zz);
}

}  // namespace

template <class Real>
BasicGrid<Real> conv_forward_step(const ConvParams<Real>& params, const BasicGrid<Real>& grid,
                                  Rng& rng, double p, ConvStepRecord<Real>* record) {
    if (grid.variant != GridVariant::Conv)
        throw std::invalid_argument("conv_forward_step needs a conv-variant grid");
    if (grid.type_channels != params.cfg.type_channels ||
        grid.hidden_channels != params.cfg.hidden_channels)
        throw std::invalid_argument("grid channel layout does not match the rule config");

    const ConvConfig& cfg = params.cfg;
    const ConvLayout l = conv_layout(cfg);
    if (params.values.size() != l.total) throw std::invalid_argument("parameter size mismatch");
    const int d = cfg.state_dim();
    const int p3 = cfg.perception_dim();
    const int w1 = cfg.width1;
    const int w2 = cfg.width2;
    const int cells = grid.cell_count();

    std::vector<uint8_t> alive = alive_mask(grid);
    std::vector<uint8_t> update = sample_update_mask(cells, p, rng);

    std::vector<int32_t> active;
    active.reserve(64);
    for (int i = 0; i < cells; ++i)
        if (alive[size_t(i)]) active.push_back(i);
    const size_t na = active.size();

    std::vector<Real> percept(na * size_t(p3));
    std::vector<Real> act1(na * size_t(w1));
    std::vector<Real> act2(na * size_t(w2));
    std::vector<Real> delta(size_t(d), Real(0));

    const Real* P = params.values.data();
    const auto offsets = moore_offsets(true);
    BasicGrid<Real> next = BasicGrid<Real>::zeros(grid.nx, grid.ny, grid.nz, GridVariant::Conv,
                                                  cfg.type_channels, cfg.hidden_channels);

    for (size_t ai = 0; ai < na; ++ai) {
        const int idx = active[ai];
        const int x = idx % grid.nx;
        const int y = (idx / grid.nx) % grid.ny;
        const int z = idx / (grid.nx * grid.ny);

        // perception: 3x3x3 convolution, zero padded
        Real* pc = percept.data() + ai * size_t(p3);
        for (int oc = 0; oc < p3; ++oc) pc[oc] = P[l.bp + size_t(oc)];
        for (int tap = 0; tap < 27; ++tap) {
            const int nbr = tap_neighbor(offsets[size_t(tap)], x, y, z, grid.nx, grid.ny, grid.nz);
            if (nbr < 0) continue;
            const Real* in = grid.data.data() + size_t(nbr) * size_t(d);
            const Real* w = P + l.wp + (size_t(tap) * size_t(d)) * size_t(p3);
            for (int ic = 0; ic < d; ++ic) {
                const Real v = in[ic];
                if (v == Real(0)) { continue; }
                const Real* wrow = w + size_t(ic) * size_t(p3);
                for (int oc = 0; oc < p3; ++oc) pc[oc] += wrow[oc] * v;
            }
        }

        // update net: ReLU(W1), ReLU(W2), linear final
        Real* a1 = act1.data() + ai * size_t(w1);
        for (int oc = 0; oc < w1; ++oc) a1[oc] = P[l.b1 + size_t(oc)];
        for (int ic = 0; ic < p3; ++ic) {
            const Real v = pc[ic];
            const Real* wrow = P + l.w1 + size_t(ic) * size_t(w1);
            for (int oc = 0; oc < w1; ++oc) a1[oc] += wrow[oc] * v;
        }
        for (int oc = 0; oc < w1; ++oc) a1[oc] = a1[oc] > Real(0) ? a1[oc] : Real(0);

        Real* a2 = act2.data() + ai * size_t(w2);
        for (int oc = 0; oc < w2; ++oc) a2[oc] = P[l.b2 + size_t(oc)];
        for (int ic = 0; ic < w1; ++ic) {
            const Real v = a1[ic];
            if (v == Real(0)) continue;
            const Real* wrow = P + l.w2 + size_t(ic) * size_t(w2);
            for (int oc = 0; oc < w2; ++oc) a2[oc] += wrow[oc] * v;
        }
        for (int oc = 0; oc < w2; ++oc) a2[oc] = a2[oc] > Real(0) ? a2[oc] : Real(0);

        Real* dl = delta.data();
        for (int oc = 0; oc < d; ++oc) dl[oc] = P[l.bf + size_t(oc)];
        for (int ic = 0; ic < w2; ++ic) {
            const Real v = a2[ic];
            if (v == Real(0)) continue;
            const Real* wrow = P + l.wf + size_t(ic) * size_t(d);
            for (int oc = 0; oc < d; ++oc) dl[oc] += wrow[oc] * v;
        }

        // h_t = a * (h_{t-1} + u * delta); non-alive cells stay zero
        const Real* cur = grid.data.data() + size_t(idx) * size_t(d);
        Real* dst = next.data.data() + size_t(idx) * size_t(d);
        if (update[size_t(idx)]) {
            for (int c = 0; c < d; ++c) dst[c] = cur[c] + dl[c];
        } else {
            for (int c = 0; c < d; ++c) dst[c] = cur[c];
        }
    }

    if (record) {
        record->state = grid.data;
        record->active = std::move(active);
        record->alive = std::move(alive);
        record->update = std::move(update);
        record->percept = std::move(percept);
        record->act1 = std::move(act1);
        record->act2 = std::move(act2);
    }
    return next;
}

template <class Real>
BasicGrid<Real> conv_rollout(const ConvParams<Real>& params, const BasicGrid<Real>& seed, int steps,
                             Rng& rng, double p, ConvTape<Real>* tape) {
    if (steps < 1) throw std::invalid_argument("rollout needs steps >= 1");
    if (tape) {
        tape->nx = seed.nx; tape->ny = seed.ny; tape->nz = seed.nz;
        tape->cfg = params.cfg;
        tape->steps.clear();
        tape->steps.reserve(size_t(steps));
    }
    BasicGrid<Real> g = seed;
    for (int t = 0; t < steps; ++t) {
        if (tape) {
            tape->steps.emplace_back();
            g = conv_forward_step(params, g, rng, p, &tape->steps.back());
        } else {
            g = conv_forward_step<Real>(params, g, rng, p, nullptr);
        }
    }
    return g;
}

template <class Real>
std::vector<Real> conv_backward(const ConvParams<Real>& params, const ConvTape<Real>& tape,
                                const std::vector<Real>& final_grad) {
    const ConvConfig& cfg = params.cfg;
    const ConvLayout l = conv_layout(cfg);
    const int d = cfg.state_dim();
    const int p3 = cfg.perception_dim();
    const int w1 = cfg.width1;
    const int w2 = cfg.width2;
    const int nx = tape.nx, ny = tape.ny, nz = tape.nz;
    const size_t cells = size_t(nx) * size_t(ny) * size_t(nz);
    if (final_grad.size() != cells * size_t(d))
        throw std::invalid_argument("final gradient does not match tape dims");
    if (!(tape.cfg == cfg)) throw std::invalid_argument("tape config does not match params");

    std::vector<Real> grads(l.total, Real(0));
    std::vector<Real> g = final_grad;
    std::vector<Real> g_prev(cells * size_t(d));
    std::vector<Real> gd(size_t(d), Real(0)), ga2(size_t(w2), Real(0)), ga1(size_t(w1), Real(0)), gp(size_t(p3), Real(0));

    const Real* P = params.values.data();
    const auto offsets = moore_offsets(true);

    for (size_t s = tape.steps.size(); s-- > 0;) {
        const ConvStepRecord<Real>& rec = tape.steps[s];
        std::fill(g_prev.begin(), g_prev.end(), Real(0));

        for (size_t ai = 0; ai < rec.active.size(); ++ai) {
            const int idx = rec.active[ai];
            const Real* go = g.data() + size_t(idx) * size_t(d);

            // residual path: h_t depends directly on h_{t-1} where alive
            Real* gi = g_prev.data() + size_t(idx) * size_t(d);
            for (int c = 0; c < d; ++c) gi[c] += go[c];

            if (!rec.update[size_t(idx)]) continue;

            // delta path, reverse of final -> ReLU(W2) -> ReLU(W1) -> perception
            for (int c = 0; c < d; ++c) gd[size_t(c)] = go[c];

            const Real* a2 = rec.act2.data() + ai * size_t(w2);
            for (int c = 0; c < d; ++c) grads[l.bf + size_t(c)] += gd[size_t(c)];
            for (int ic = 0; ic < w2; ++ic) {
                const Real* wrow = P + l.wf + size_t(ic) * size_t(d);
                Real* grow = grads.data() + l.wf + size_t(ic) * size_t(d);
                Real acc = Real(0);
                const Real v = a2[ic];
                for (int oc = 0; oc < d; ++oc) {
                    grow[oc] += v * gd[size_t(oc)];
                    acc += wrow[oc] * gd[size_t(oc)];
                }
                ga2[size_t(ic)] = a2[ic] > Real(0) ? acc : Real(0);
            }

            const Real* a1 = rec.act1.data() + ai * size_t(w1);
            for (int c = 0; c < w2; ++c) grads[l.b2 + size_t(c)] += ga2[size_t(c)];
            for (int ic = 0; ic < w1; ++ic) {
                const Real* wrow = P + l.w2 + size_t(ic) * size_t(w2);
                Real* grow = grads.data() + l.w2 + size_t(ic) * size_t(w2);
                Real acc = Real(0);
                const Real v = a1[ic];
                for (int oc = 0; oc < w2; ++oc) {
                    grow[oc] += v * ga2[size_t(oc)];
                    acc += wrow[oc] * ga2[size_t(oc)];
                }
                ga1[size_t(ic)] = a1[ic] > Real(0) ? acc : Real(0);
            }

            const Real* pc = rec.percept.data() + ai * size_t(p3);
            for (int c = 0; c < w1; ++c) grads[l.b1 + size_t(c)] += ga1[size_t(c)];
            for (int ic = 0; ic < p3; ++ic) {
                const Real* wrow = P + l.w1 + size_t(ic) * size_t(w1);
                Real* grow = grads.data() + l.w1 + size_t(ic) * size_t(w1);
                Real acc = Real(0);
                const Real v = pc[ic];
                for (int oc = 0; oc < w1; ++oc) {
                    grow[oc] += v * ga1[size_t(oc)];
                    acc += wrow[oc] * ga1[size_t(oc)];
                }
                gp[size_t(ic)] = acc;
            }

            for (int c = 0; c < p3; ++c) grads[l.bp + size_t(c)] += gp[size_t(c)];

            const int x = idx % nx;
            const int y = (idx / nx) % ny;
            const int z = idx / (nx * ny);
            for (int tap = 0; tap < 27; ++tap) {
                const int nbr = tap_neighbor(offsets[size_t(tap)], x, y, z, nx, ny, nz);
                if (nbr < 0) continue;
                const Real* in = rec.state.data() + size_t(nbr) * size_t(d);
                Real* gin = g_prev.data() + size_t(nbr) * size_t(d);
                const Real* w = P + l.wp + (size_t(tap) * size_t(d)) * size_t(p3);
                Real* gw = grads.data() + l.wp + (size_t(tap) * size_t(d)) * size_t(p3);
                for (int ic = 0; ic < d; ++ic) {
                    const Real* wrow = w + size_t(ic) * size_t(p3);
                    Real* growp = gw + size_t(ic) * size_t(p3);
                    const Real v = in[ic];
                    Real acc = Real(0);
                    for (int oc = 0; oc < p3; ++oc) {
                        growp[oc] += v * gp[size_t(oc)];
                        acc += wrow[oc] * gp[size_t(oc)];
                    }
                    gin[ic] += acc;
                }
            }
        }
        std::swap(g, g_prev);
    }
    return grads;
}

template BasicGrid<float> conv_forward_step<float>(const ConvParams<float>&, const BasicGrid<float>&,
                                                   Rng&, double, ConvStepRecord<float>*);
template BasicGrid<double> conv_forward_step<double>(const ConvParams<double>&,
                                                     const BasicGrid<double>&, Rng&, double,
                                                     ConvStepRecord<double>*);
template BasicGrid<float> conv_rollout<float>(const ConvParams<float>&, const BasicGrid<float>&, int,
                                              Rng&, double, ConvTape<float>*);
template BasicGrid<double> conv_rollout<double>(const ConvParams<double>&, const BasicGrid<double>&,
                                                int, Rng&, double, ConvTape<double>*);
template std::vector<float> conv_backward<float>(const ConvParams<float>&, const ConvTape<float>&,
                                                 const std::vector<float>&);
template std::vector<double> conv_backward<double>(const ConvParams<double>&,
                                                   const ConvTape<double>&,
                                                   const std::vector<double>&);

}  // namespace voxnca
