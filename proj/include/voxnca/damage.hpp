#pragma once

#include <array>
#include <string>
#include <vector>

#include "voxnca/grid.hpp"
#include "voxnca/physics.hpp"

namespace voxnca {

enum class Axis { X = 0, Y = 1, Z = 2 };
enum class Side { Low = 0, High = 1 };

// HalfCut removes `depth` whole columns along one axis, anchored to the
// occupied bounding box of the damaged grid. Sphere clears a Euclidean ball.
// Cleared cells lose every channel; conv-variant grids additionally get the
// Empty type channel set to one, matching the training damage.
struct DamageSpec {
    enum class Kind { HalfCut, Sphere };
    Kind kind = Kind::HalfCut;
    Axis axis = Axis::X;
    Side side = Side::Low;
    int depth = 3;
    Vec3i center{};
    int radius = 3;

    static DamageSpec half_cut(Axis axis, Side side, int depth = 3) {
        DamageSpec s;
        s.kind = Kind::HalfCut;
        s.axis = axis;
        s.side = side;
        s.depth = depth;
        return s;
    }
    static DamageSpec sphere(Vec3i center, int radius = 3) {
        DamageSpec s;
        s.kind = Kind::Sphere;
        s.center = center;
        s.radius = radius;
        return s;
    }
};

std::string damage_name(const DamageSpec& spec);

// left, right, top, bottom, front, back (x low/high, z high/low, y low/high)
std::array<DamageSpec, 6> six_half_cuts(int depth = 3);

template <class Real>
BasicGrid<Real> apply_damage(const BasicGrid<Real>& grid, const DamageSpec& spec);

// Shared sphere-damage entry used by pool training.
template <class Real>
BasicGrid<Real> damage_sphere(const BasicGrid<Real>& grid, Vec3i center, int radius = 3) {
    return apply_damage(grid, DamageSpec::sphere(center, radius));
}

struct Similarity {
    int matched = 0;
    int total = 0;
    double percent = 0.0;
};

// Per-cell type equality over every cell, empty included.
Similarity similarity(const TypeField& a, const TypeField& b);

struct RecoveryReport {
    std::string damage;
    Similarity regrown_similarity;  // regrown vs original
    double distance_original = 0.0;
    double distance_damaged = 0.0;
    double distance_regrown = 0.0;
    double damaged_percent = 0.0;  // vs original
    double regrown_percent = 0.0;
    bool percent_valid = true;  // false when the original does not move
    int regrow_steps = 0;
    bool any_diverged = false;
};

RecoveryReport recovery_report(const TypeField& original, const TypeField& damaged,
                               const TypeField& regrown, Vec3i seed_pos, const SimConfig& sim,
                               int regrow_steps, const std::string& damage);

std::string recovery_report_json(const std::vector<RecoveryReport>& reports);
std::string recovery_report_table(const std::vector<RecoveryReport>& reports);

}  // namespace voxnca
