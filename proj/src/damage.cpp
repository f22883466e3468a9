#include "voxnca/damage.hpp"

#include <cstring>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace voxnca {

std::string damage_name(const DamageSpec& spec) {
    if (spec.kind == DamageSpec::Kind::Sphere) {
        std::ostringstream os;
        os << "sphere_r" << spec.radius;
        return os.str();
    }
    switch (spec.axis) {
        case Axis::X: return spec.side == Side::Low ? "left" : "right";
        case Axis::Y: return spec.side == Side::Low ? "front" : "back";
        case Axis::Z: return spec.side == Side::Low ? "bottom" : "top";
    }
    return "?";
}

std::array<DamageSpec, 6> six_half_cuts(int depth) {
    return {
        DamageSpec::half_cut(Axis::X, Side::Low, depth),   // left
        DamageSpec::half_cut(Axis::X, Side::High, depth),  // right
        DamageSpec::half_cut(Axis::Z, Side::High, depth),  // top
        DamageSpec::half_cut(Axis::Z, Side::Low, depth),   // bottom
        DamageSpec::half_cut(Axis::Y, Side::Low, depth),   // front
        DamageSpec::half_cut(Axis::Y, Side::High, depth),  // back
    };
}

namespace {

template <class Real>
void clear_cell(BasicGrid<Real>& g, int idx) {
    Real* c = g.cell(idx);
    for (int k = 0; k < g.channels(); ++k) c[k] = Real(0);
    if (g.variant == GridVariant::Conv) c[0] = Real(1);  // mark as the empty type
}

}  // namespace

template <class Real>
BasicGrid<Real> apply_damage(const BasicGrid<Real>& grid, const DamageSpec& spec) {
    BasicGrid<Real> out = grid;
    if (spec.kind == DamageSpec::Kind::Sphere) {
        if (!grid.in_bounds(spec.center.x, spec.center.y, spec.center.z))
            throw std::invalid_argument("sphere center out of bounds");
        if (spec.radius < 0) throw std::invalid_argument("sphere radius must be >= 0");
        const int r2 = spec.radius * spec.radius;
        for (int z = 0; z < grid.nz; ++z)
            for (int y = 0; y < grid.ny; ++y)
                for (int x = 0; x < grid.nx; ++x) {
                    const int dx = x - spec.center.x, dy = y - spec.center.y, dz = z - spec.center.z;
                    if (dx * dx + dy * dy + dz * dz <= r2)
                        clear_cell(out, grid.cell_index(x, y, z));
                }
        return out;
    }

    // HalfCut, anchored to the occupied bounding box of the decoded grid
    const TypeField decoded = decode_types(grid);
    Vec3i lo, hi;
    if (!occupied_bounding_box(decoded, lo, hi)) return out;  // nothing to cut
    int axis_lo, axis_hi;
    switch (spec.axis) {
        case Axis::X: axis_lo = lo.x; axis_hi = hi.x; break;
        case Axis::Y: axis_lo = lo.y; axis_hi = hi.y; break;
        default: axis_lo = lo.z; axis_hi = hi.z; break;
    }
    const int extent = axis_hi - axis_lo + 1;
    if (spec.depth < 1 || spec.depth > extent)
        throw std::invalid_argument("half-cut depth outside [1, axis extent]");
    const int c0 = spec.side == Side::Low ? axis_lo : axis_hi - spec.depth + 1;
    const int c1 = c0 + spec.depth - 1;

    for (int z = 0; z < grid.nz; ++z)
        for (int y = 0; y < grid.ny; ++y)
            for (int x = 0; x < grid.nx; ++x) {
                const int a = spec.axis == Axis::X ? x : spec.axis == Axis::Y ? y : z;
                if (a >= c0 && a <= c1) clear_cell(out, grid.cell_index(x, y, z));
            }
    return out;
}

template BasicGrid<float> apply_damage<float>(const BasicGrid<float>&, const DamageSpec&);
template BasicGrid<double> apply_damage<double>(const BasicGrid<double>&, const DamageSpec&);

Similarity similarity(const TypeField& a, const TypeField& b) {
    if (!a.same_dims(b)) throw std::invalid_argument("similarity: dims mismatch");
    Similarity s;
    s.total = a.cell_count();
    for (int i = 0; i < s.total; ++i)
        s.matched += (a.types[size_t(i)] == b.types[size_t(i)]);
    s.percent = s.total > 0 ? 100.0 * double(s.matched) / double(s.total) : 0.0;
    return s;
}

RecoveryReport recovery_report(const TypeField& original, const TypeField& damaged,
                               const TypeField& regrown, Vec3i seed_pos, const SimConfig& sim,
                               int regrow_steps, const std::string& damage) {
    RecoveryReport rep;
    rep.damage = damage;
    rep.regrow_steps = regrow_steps;
    rep.regrown_similarity = similarity(regrown, original);

    const SimResult r_orig = simulate(materialize(original, seed_pos, sim), sim);
    const SimResult r_dmg = simulate(materialize(damaged, seed_pos, sim), sim);
    const SimResult r_new = simulate(materialize(regrown, seed_pos, sim), sim);
    rep.any_diverged = r_orig.diverged || r_dmg.diverged || r_new.diverged;
    rep.distance_original = distance_fitness(r_orig);
    rep.distance_damaged = distance_fitness(r_dmg);
    rep.distance_regrown = distance_fitness(r_new);
    if (rep.distance_original > 0.0) {
        rep.damaged_percent = 100.0 * rep.distance_damaged / rep.distance_original;
        rep.regrown_percent = 100.0 * rep.distance_regrown / rep.distance_original;
    } else {
        rep.percent_valid = false;
    }
    return rep;
}

std::string recovery_report_json(const std::vector<RecoveryReport>& reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) {
        arr.push_back({
            {"damage", r.damage},
            {"similarity_matched", r.regrown_similarity.matched},
            {"similarity_total", r.regrown_similarity.total},
            {"similarity_percent", r.regrown_similarity.percent},
            {"distance_original", r.distance_original},
            {"distance_damaged", r.distance_damaged},
            {"distance_regrown", r.distance_regrown},
            {"damaged_percent", r.damaged_percent},
            {"regrown_percent", r.regrown_percent},
            {"percent_valid", r.percent_valid},
            {"regrow_steps", r.regrow_steps},
            {"any_diverged", r.any_diverged},
        });
    }
    return arr.dump(2);
}

std::string recovery_report_table(const std::vector<RecoveryReport>& reports) {
    std::ostringstream os;
    os << "damage      similarity      locomotion orig/damaged/regrown\n";
    for (const auto& r : reports) {
        char line[160];
        std::snprintf(line, sizeof(line), "%-10s  %4d/%-4d %5.1f%%  %8.3f / %8.3f / %8.3f",
                      r.damage.c_str(), r.regrown_similarity.matched, r.regrown_similarity.total,
                      r.regrown_similarity.percent, r.distance_original, r.distance_damaged,
                      r.distance_regrown);
        os << line;
        if (!r.percent_valid) os << "  (original does not move; percentages undefined)";
        os << '\n';
    }
    return os.str();
}

}  // namespace voxnca
