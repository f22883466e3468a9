#include <doctest.h>

#include <cmath>

#include "voxnca/conv_rule.hpp"
#include "voxnca/loss.hpp"

using namespace voxnca;

namespace {

// independent per-cell reference of the full delta chain, double accumulation
template <class Real>
std::vector<double> naive_delta(const ConvParams<Real>& params, const BasicGrid<Real>& g) {
    const ConvConfig& cfg = params.cfg;
    const ConvLayout l = conv_layout(cfg);
    const int d = cfg.state_dim(), p3 = cfg.perception_dim(), w1 = cfg.width1, w2 = cfg.width2;
    const auto offsets = moore_offsets(true);
    std::vector<double> out(size_t(g.cell_count()) * size_t(d));
    for (int z = 0; z < g.nz; ++z)
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x) {
                std::vector<double> pc(static_cast<size_t>(p3));
                for (int oc = 0; oc < p3; ++oc) {
                    double acc = double(params.values[l.bp + size_t(oc)]);
                    for (int tap = 0; tap < 27; ++tap) {
                        const Vec3i o = offsets[size_t(tap)];
                        const int xx = x + o.x, yy = y + o.y, zz = z + o.z;
                        if (!g.in_bounds(xx, yy, zz)) continue;
                        for (int ic = 0; ic < d; ++ic)
                            acc += double(params.values[l.wp + (size_t(tap) * size_t(d) + size_t(ic)) * size_t(p3) + size_t(oc)]) *
                                   double(g.cell(xx, yy, zz)[ic]);
                    }
                    pc[size_t(oc)] = acc;
                }
                std::vector<double> a1(static_cast<size_t>(w1));
                for (int oc = 0; oc < w1; ++oc) {
                    double acc = double(params.values[l.b1 + size_t(oc)]);
                    for (int ic = 0; ic < p3; ++ic)
                        acc += double(params.values[l.w1 + size_t(ic) * size_t(w1) + size_t(oc)]) * pc[size_t(ic)];
                    a1[size_t(oc)] = acc > 0 ? acc : 0;
                }
                std::vector<double> a2(static_cast<size_t>(w2));
                for (int oc = 0; oc < w2; ++oc) {
                    double acc = double(params.values[l.b2 + size_t(oc)]);
                    for (int ic = 0; ic < w1; ++ic)
                        acc += double(params.values[l.w2 + size_t(ic) * size_t(w2) + size_t(oc)]) * a1[size_t(ic)];
                    a2[size_t(oc)] = acc > 0 ? acc : 0;
                }
                for (int oc = 0; oc < d; ++oc) {
                    double acc = double(params.values[l.bf + size_t(oc)]);
                    for (int ic = 0; ic < w2; ++ic)
                        acc += double(params.values[l.wf + size_t(ic) * size_t(d) + size_t(oc)]) * a2[size_t(ic)];
                    out[size_t(g.cell_index(x, y, z)) * size_t(d) + size_t(oc)] = acc;
                }
            }
    return out;
}

BasicGrid<double> random_small_grid(const ConvConfig& cfg, int n, Rng& rng) {
    BasicGrid<double> g = BasicGrid<double>::zeros(n, n, n, GridVariant::Conv, cfg.type_channels,
                                                   cfg.hidden_channels);
    // a live blob plus faint values elsewhere
    for (int i = 0; i < g.cell_count(); ++i) {
        double* c = g.cell(i);
        for (int k = 0; k < g.channels(); ++k) c[k] = rng.uniform(-0.3, 0.3);
        c[g.alive_channel()] = rng.uniform(0.0, 0.08);
    }
    const int mid = n / 2;
    for (int dz = 0; dz <= 1; ++dz)
        for (int dy = 0; dy <= 1; ++dy)
            for (int dx = 0; dx <= 1; ++dx) {
                double* c = g.cell(mid - dx, mid - dy, mid - dz);
                c[g.alive_channel()] = rng.uniform(0.3, 0.9);
            }
    return g;
}

TypeField random_target(int n, int k, Rng& rng) {
    TypeField f = TypeField::empty(n, n, n);
    for (auto& t : f.types)
        t = VoxelType(rng.below(k));
    // force at least one empty and one non-empty
    f.types[0] = VoxelType::Empty;
    f.types[1] = VoxelType::SoftPassive;
    return f;
}

struct GradCheckSetup {
    ConvParams<double> params;
    BasicGrid<double> seed;
    TypeField target;
    int steps = 2;
};

double rollout_loss(const GradCheckSetup& s) {
    Rng rng(1);  // p=1, the stream is unused
    auto final_grid = conv_rollout(s.params, s.seed, s.steps, rng, 1.0);
    return double(nca_loss(final_grid, s.target).loss);
}

// pre-activations and aliveness values must stay clear of their thresholds so
// central differences see a smooth function
bool instance_is_clean(const GradCheckSetup& s, double guard = 1e-3) {
    Rng rng(1);
    ConvTape<double> tape;
    auto final_grid = conv_rollout(s.params, s.seed, s.steps, rng, 1.0, &tape);
    const int ac = s.seed.alive_channel();
    const ConvConfig& cfg = s.params.cfg;
    const ConvLayout l = conv_layout(cfg);
    const int d = cfg.state_dim(), p3 = cfg.perception_dim(), w1 = cfg.width1, w2 = cfg.width2;
    const double* P = s.params.values.data();
    for (const auto& rec : tape.steps) {
        for (size_t i = 0; i < rec.state.size() / size_t(d); ++i) {
            const double a = rec.state[i * size_t(d) + size_t(ac)];
            if (std::abs(a - kAliveThreshold) < guard) return false;
        }
        // recompute ReLU pre-activations from the recorded layer inputs
        for (size_t ai = 0; ai < rec.active.size(); ++ai) {
            const double* pc = rec.percept.data() + ai * size_t(p3);
            for (int oc = 0; oc < w1; ++oc) {
                double z = P[l.b1 + size_t(oc)];
                for (int ic = 0; ic < p3; ++ic)
                    z += P[l.w1 + size_t(ic) * size_t(w1) + size_t(oc)] * pc[ic];
                if (std::abs(z) < guard) return false;
            }
            const double* a1 = rec.act1.data() + ai * size_t(w1);
            for (int oc = 0; oc < w2; ++oc) {
                double z = P[l.b2 + size_t(oc)];
                for (int ic = 0; ic < w1; ++ic)
                    z += P[l.w2 + size_t(ic) * size_t(w2) + size_t(oc)] * a1[ic];
                if (std::abs(z) < guard) return false;
            }
        }
    }
    for (int i = 0; i < final_grid.cell_count(); ++i)
        if (std::abs(final_grid.alive_value(i) - kAliveThreshold) < guard) return false;
    return true;
}

// max relative error between analytic and central-difference gradients
double gradcheck_max_rel_err(GradCheckSetup& s, double eps = 1e-6) {
    Rng rng(1);
    ConvTape<double> tape;
    auto final_grid = conv_rollout(s.params, s.seed, s.steps, rng, 1.0, &tape);
    auto loss = nca_loss(final_grid, s.target);
    auto analytic = conv_backward(s.params, tape, loss.grad);

    double worst = 0.0;
    for (size_t i = 0; i < s.params.values.size(); ++i) {
        const double saved = s.params.values[i];
        s.params.values[i] = saved + eps;
        const double lp = rollout_loss(s);
        s.params.values[i] = saved - eps;
        const double lm = rollout_loss(s);
        s.params.values[i] = saved;
        const double fd = (lp - lm) / (2.0 * eps);
        const double an = analytic[i];
        const double mag = std::max(std::abs(fd), std::abs(an));
        if (mag < 1e-7) continue;  // both effectively zero
        worst = std::max(worst, std::abs(fd - an) / mag);
    }
    return worst;
}

GradCheckSetup make_instance(uint64_t seed, int n, int k, int h, int w, int steps) {
    GradCheckSetup s;
    Rng rng(seed);
    ConvConfig cfg;
    cfg.type_channels = k;
    cfg.hidden_channels = h;
    cfg.width1 = w;
    cfg.width2 = w;
    cfg.update_p = 1.0;
    s.params = ConvParams<double>::init(cfg, rng);
    for (auto& v : s.params.values) v *= 2.0;  // std 0.2, keeps activations lively
    s.seed = random_small_grid(cfg, n, rng);
    s.target = random_target(n, k, rng);
    s.steps = steps;
    return s;
}

}  // namespace

TEST_CASE("forward step with only a final-layer bias adds u*b on the alive region") {
    ConvConfig cfg;
    cfg.hidden_channels = 2;  // D = 8
    cfg.width1 = 6;
    cfg.width2 = 6;
    auto params = ConvParams<float>::zeros(cfg);
    const ConvLayout l = conv_layout(cfg);
    const float bias = 0.37f;
    params.values[l.bf + 2] = bias;  // one type channel

    CellGrid g = CellGrid::zeros(3, 3, 3, GridVariant::Conv, cfg.type_channels, cfg.hidden_channels);
    g.cell(1, 1, 1)[g.alive_channel()] = 0.8f;

    Rng rng(3);
    ConvStepRecord<float> rec;
    CellGrid out = conv_forward_step(params, g, rng, 0.5, &rec);
    for (int i = 0; i < g.cell_count(); ++i) {
        const float* c = out.cell(i);
        if (rec.alive[size_t(i)]) {
            const float expect = g.cell(i)[2] + (rec.update[size_t(i)] ? bias : 0.0f);
            CHECK(c[2] == expect);
            // other channels keep their (zero or seed) values
            CHECK(c[g.alive_channel()] == g.cell(i)[g.alive_channel()]);
        } else {
            for (int ch = 0; ch < out.channels(); ++ch) CHECK(c[ch] == 0.0f);
        }
    }
}

TEST_CASE("rollout with T=1 equals one forward step") {
    ConvConfig cfg;
    cfg.width1 = 8;
    cfg.width2 = 8;
    Rng init(5);
    auto params = ConvParams<float>::init(cfg, init);
    Rng sr(7);
    CellGrid seed = conv_seed_grid(5, 5, 5, {2, 2, 2}, sr);
    Rng a(9), b(9);
    CHECK(conv_rollout(params, seed, 1, a, 0.5).data ==
          conv_forward_step(params, seed, b, 0.5).data);
}

TEST_CASE("random rollouts stay finite and keep dead cells at zero") {
    ConvConfig cfg;
    cfg.width1 = 12;
    cfg.width2 = 12;
    Rng init(11);
    auto params = ConvParams<float>::init(cfg, init);
    Rng sr(13);
    CellGrid seed = conv_seed_grid(7, 7, 7, {3, 3, 3}, sr);
    Rng roll(15);
    ConvTape<float> tape;
    CellGrid g = conv_rollout(params, seed, 5, roll, 0.5, &tape);
    CHECK(tape.steps.size() == 5);
    for (float v : g.data) CHECK(std::isfinite(v));
    const auto& last = tape.steps.back();
    for (int i = 0; i < g.cell_count(); ++i)
        if (!last.alive[size_t(i)])
            for (int c = 0; c < g.channels(); ++c) CHECK(g.cell(i)[c] == 0.0f);
}

TEST_CASE("forward delta matches the naive per-cell reference") {
    ConvConfig cfg;
    cfg.type_channels = 4;
    cfg.hidden_channels = 3;  // D = 8
    cfg.width1 = 10;
    cfg.width2 = 10;
    cfg.update_p = 1.0;
    Rng rng(17);
    auto params = ConvParams<double>::init(cfg, rng);
    BasicGrid<double> g = random_small_grid(cfg, 5, rng);

    Rng step(19);
    ConvStepRecord<double> rec;
    auto out = conv_forward_step(params, g, step, 1.0, &rec);
    auto reference = naive_delta(params, g);

    const int d = cfg.state_dim();
    for (int i = 0; i < g.cell_count(); ++i) {
        if (!rec.alive[size_t(i)]) continue;
        for (int c = 0; c < d; ++c) {
            const double impl = out.cell(i)[c] - g.cell(i)[c];  // u == 1 everywhere
            CHECK(impl == doctest::Approx(reference[size_t(i) * size_t(d) + size_t(c)]).epsilon(1e-9));
        }
    }
}

TEST_CASE("zero upstream gradient gives zero parameter gradients") {
    ConvConfig cfg;
    cfg.width1 = 8;
    cfg.width2 = 8;
    Rng init(21);
    auto params = ConvParams<float>::init(cfg, init);
    Rng sr(23);
    CellGrid seed = conv_seed_grid(5, 5, 5, {2, 2, 2}, sr);
    Rng roll(25);
    ConvTape<float> tape;
    conv_rollout(params, seed, 3, roll, 0.5, &tape);
    std::vector<float> up(seed.data.size(), 0.0f);
    auto grads = conv_backward(params, tape, up);
    for (float v : grads) CHECK(v == 0.0f);
}

TEST_CASE("analytic gradients match central finite differences on small instances") {
    int done = 0;
    uint64_t seed = 1;
    while (done < 3 && seed < 60) {
        GradCheckSetup s = make_instance(seed++, 3, 3, 1, 6, 2);
        if (!instance_is_clean(s)) continue;
        const double err = gradcheck_max_rel_err(s);
        CHECK(err < 1e-4);
        ++done;
    }
    CHECK(done == 3);
}

TEST_CASE("two identical tape contributions sum to exactly twice the gradient") {
    ConvConfig cfg;
    cfg.width1 = 8;
    cfg.width2 = 8;
    cfg.update_p = 1.0;
    Rng init(31);
    auto params = ConvParams<double>::init(cfg, init);
    auto g = random_small_grid(cfg, 4, init);
    TypeField target = random_target(4, cfg.type_channels, init);

    Rng r1(33);
    ConvTape<double> tape;
    auto out = conv_rollout(params, g, 2, r1, 1.0, &tape);
    auto loss = nca_loss(out, target);
    auto single = conv_backward(params, tape, loss.grad);

    std::vector<double> doubled(single.size(), 0.0);
    for (int rep = 0; rep < 2; ++rep) {
        auto part = conv_backward(params, tape, loss.grad);
        for (size_t i = 0; i < part.size(); ++i) doubled[i] += part[i];
    }
    for (size_t i = 0; i < single.size(); ++i) CHECK(doubled[i] == 2.0 * single[i]);
}

TEST_CASE("receptive field grows by at most Chebyshev 2 per step") {
    ConvConfig cfg;
    cfg.hidden_channels = 0;  // D = 6
    cfg.width1 = 6;
    cfg.width2 = 6;
    cfg.update_p = 1.0;
    Rng init(37);
    auto params = ConvParams<float>::init(cfg, init);

    CellGrid a = CellGrid::zeros(9, 9, 9, GridVariant::Conv, cfg.type_channels, cfg.hidden_channels);
    for (int i = 0; i < a.cell_count(); ++i) {
        a.cell(i)[a.alive_channel()] = 0.5f;  // everything alive so masks do not gate
        a.cell(i)[0] = 0.2f;
    }
    CellGrid b = a;
    b.cell(4, 4, 4)[1] += 0.3f;

    const int t = 2;
    Rng ra(39), rb(39);
    auto oa = conv_rollout(params, a, t, ra, 1.0);
    auto ob = conv_rollout(params, b, t, rb, 1.0);
    for (int z = 0; z < 9; ++z)
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 9; ++x) {
                const int cheb = std::max({std::abs(x - 4), std::abs(y - 4), std::abs(z - 4)});
                if (cheb <= 2 * t) continue;
                const float* ca = oa.cell(x, y, z);
                const float* cb = ob.cell(x, y, z);
                for (int c = 0; c < oa.channels(); ++c) CHECK(ca[c] == cb[c]);
            }
}

TEST_CASE("zero update net makes alive-consistent grids fixed points") {
    ConvConfig cfg;
    cfg.width1 = 8;
    cfg.width2 = 8;
    Rng init(41);
    auto params = ConvParams<float>::init(cfg, init);
    const ConvLayout l = conv_layout(cfg);
    // zero the final layer: delta is identically zero, the rest is irrelevant
    for (size_t i = l.wf; i < l.total; ++i) params.values[i] = 0.0f;

    Rng sr(43);
    CellGrid seed = conv_seed_grid(5, 5, 5, {2, 2, 2}, sr);
    Rng roll(45);
    auto out = conv_rollout(params, seed, 4, roll, 0.5);
    CHECK(out.data == seed.data);
}
