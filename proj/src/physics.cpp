#include "voxnca/physics.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace voxnca {

namespace {

double material_stiffness(VoxelType t, const SimConfig& cfg) {
    switch (t) {
        case VoxelType::SoftPassive: return cfg.stiffness_soft;
        case VoxelType::HardPassive: return cfg.stiffness_hard;
        case VoxelType::MuscleA:
        case VoxelType::MuscleB: return cfg.stiffness_muscle;
        default: return 0.0;
    }
}

// expansion sign under the global signal: +1 in phase, -1 counter phase
double muscle_sign(VoxelType t) {
    if (t == VoxelType::MuscleA) return 1.0;
    if (t == VoxelType::MuscleB) return -1.0;
    return 0.0;
}

// axial + face-diagonal + body-diagonal neighbor offsets, positive half
constexpr std::array<Vec3i, 13> kSpringOffsets = {{
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {1, 1, 0}, {1, -1, 0}, {1, 0, 1}, {1, 0, -1}, {0, 1, 1}, {0, 1, -1},
    {1, 1, 1}, {1, 1, -1}, {1, -1, 1}, {1, -1, -1},
}};

}  // namespace

RobotModel materialize(const TypeField& field, Vec3i seed_pos, const SimConfig& cfg) {
    RobotModel model;
    model.planar = field.nz == 1;
    if (!field.in_bounds(seed_pos.x, seed_pos.y, seed_pos.z)) return model;
    if (field.at(seed_pos.x, seed_pos.y, seed_pos.z) == VoxelType::Empty) return model;

    // 6-connected component containing the seed
    std::vector<int> component_index(size_t(field.cell_count()), -1);
    std::deque<Vec3i> queue{seed_pos};
    component_index[size_t(field.cell_index(seed_pos.x, seed_pos.y, seed_pos.z))] = -2;
    std::vector<Vec3i> kept;
    constexpr std::array<Vec3i, 6> axial = {{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0},
                                             {0, -1, 0}, {0, 0, 1}, {0, 0, -1}}};
    while (!queue.empty()) {
        Vec3i v = queue.front();
        queue.pop_front();
        component_index[size_t(field.cell_index(v.x, v.y, v.z))] = int(kept.size());
        kept.push_back(v);
        for (const Vec3i& d : axial) {
            int x = v.x + d.x, y = v.y + d.y, z = v.z + d.z;
            if (!field.in_bounds(x, y, z)) continue;
            int idx = field.cell_index(x, y, z);
            if (component_index[size_t(idx)] != -1) continue;
            if (field.at(x, y, z) == VoxelType::Empty) continue;
            component_index[size_t(idx)] = -2;
            queue.push_back({x, y, z});
        }
    }

    // grid -> world: 2D grids stand in the x/z plane with grid y as height
    int min_h = 1 << 30;
    for (const Vec3i& v : kept) min_h = std::min(min_h, model.planar ? v.y : v.z);
    model.positions.reserve(kept.size());
    for (const Vec3i& v : kept) {
        if (model.planar)
            model.positions.push_back({double(v.x), 0.0, double(v.y - min_h)});
        else
            model.positions.push_back({double(v.x), double(v.y), double(v.z - min_h)});
        model.masses.push_back(cfg.voxel_mass);
        model.voxel_types.push_back(field.at(v.x, v.y, v.z));
    }

    for (size_t i = 0; i < kept.size(); ++i) {
        const Vec3i v = kept[i];
        for (const Vec3i& d : kSpringOffsets) {
            int x = v.x + d.x, y = v.y + d.y, z = v.z + d.z;
            if (!field.in_bounds(x, y, z)) continue;
            int j = component_index[size_t(field.cell_index(x, y, z))];
            if (j < 0) continue;
            RobotSpring s;
            s.a = int(i);
            s.b = j;
            s.rest = std::sqrt(double(d.x * d.x + d.y * d.y + d.z * d.z));
            const VoxelType ta = model.voxel_types[i];
            const VoxelType tb = model.voxel_types[size_t(j)];
            const double ka = material_stiffness(ta, cfg);
            const double kb = material_stiffness(tb, cfg);
            s.stiffness = 2.0 * ka * kb / (ka + kb);  // series of the two half-voxels
            s.actuation = 0.5 * (muscle_sign(ta) + muscle_sign(tb));
            model.springs.push_back(s);
        }
    }
    return model;
}

SimResult simulate(const RobotModel& model, const SimConfig& cfg) {
    SimResult res;
    if (model.empty()) {
        res.diverged = false;
        return res;
    }
    const int n = model.voxel_count();
    std::vector<Vec3d> pos = model.positions;
    std::vector<Vec3d> vel(static_cast<size_t>(n));
    std::vector<Vec3d> force(static_cast<size_t>(n));

    const double dt = cfg.dt;
    const int steps = int(std::llround(cfg.duration / dt));
    const double omega = 2.0 * 3.14159265358979323846 * cfg.frequency;
    const double total_mass = [&] {
        double m = 0;
        for (double v : model.masses) m += v;
        return m;
    }();

    auto com = [&](const std::vector<Vec3d>& p) {
        Vec3d c;
        for (int i = 0; i < n; ++i) {
            c.x += model.masses[size_t(i)] * p[size_t(i)].x;
            c.y += model.masses[size_t(i)] * p[size_t(i)].y;
            c.z += model.masses[size_t(i)] * p[size_t(i)].z;
        }
        c.x /= total_mass; c.y /= total_mass; c.z /= total_mass;
        return c;
    };

    const Vec3d com0 = com(pos);
    res.trajectory.push_back({0.0, com0.x, com0.y, com0.z});

    // precomputed spring damping coefficients
    std::vector<double> cdamp(model.springs.size());
    for (size_t s = 0; s < model.springs.size(); ++s) {
        const RobotSpring& sp = model.springs[s];
        const double mred = model.masses[size_t(sp.a)] * model.masses[size_t(sp.b)] /
                            (model.masses[size_t(sp.a)] + model.masses[size_t(sp.b)]);
        cdamp[s] = 2.0 * cfg.spring_damping_ratio * std::sqrt(sp.stiffness * mred);
    }

    bool diverged = false;
    for (int step = 0; step < steps && !diverged; ++step) {
        const double t = step * dt;
        const double signal = std::sin(omega * t);

        for (int i = 0; i < n; ++i)
            force[size_t(i)] = {0.0, 0.0, -model.masses[size_t(i)] * cfg.gravity};

        for (size_t s = 0; s < model.springs.size(); ++s) {
            const RobotSpring& sp = model.springs[s];
            const Vec3d& pa = pos[size_t(sp.a)];
            const Vec3d& pb = pos[size_t(sp.b)];
            const double dx = pb.x - pa.x, dy = pb.y - pa.y, dz = pb.z - pa.z;
            const double len = std::sqrt(dx * dx + dy * dy + dz * dz);
            if (len < 1e-9) continue;
            const double ux = dx / len, uy = dy / len, uz = dz / len;
            const double rest = sp.rest * (1.0 + cfg.amplitude * sp.actuation * signal);
            const Vec3d& va = vel[size_t(sp.a)];
            const Vec3d& vb = vel[size_t(sp.b)];
            const double relv = (vb.x - va.x) * ux + (vb.y - va.y) * uy + (vb.z - va.z) * uz;
            const double fmag = sp.stiffness * (len - rest) + cdamp[s] * relv;
            force[size_t(sp.a)].x += fmag * ux;
            force[size_t(sp.a)].y += fmag * uy;
            force[size_t(sp.a)].z += fmag * uz;
            force[size_t(sp.b)].x -= fmag * ux;
            force[size_t(sp.b)].y -= fmag * uy;
            force[size_t(sp.b)].z -= fmag * uz;
        }

        for (int i = 0; i < n; ++i) {
            const double m = model.masses[size_t(i)];
            Vec3d& p = pos[size_t(i)];
            Vec3d& v = vel[size_t(i)];
            Vec3d& f = force[size_t(i)];

            if (p.z < 0.0) {
                double fn = -cfg.ground_stiffness * p.z - cfg.ground_damping * v.z;
                if (fn < 0.0) fn = 0.0;
                f.z += fn;
                const double vt = std::sqrt(v.x * v.x + v.y * v.y);
                if (vt > 1e-12) {
                    const double fstop = m * vt / dt;
                    const double ff = std::min(cfg.friction * fn, fstop);
                    f.x -= ff * v.x / vt;
                    f.y -= ff * v.y / vt;
                }
            }

            v.x += dt * f.x / m;
            v.y += dt * f.y / m;
            v.z += dt * f.z / m;
            const double drag = 1.0 - cfg.damping * dt;
            v.x *= drag; v.y *= drag; v.z *= drag;
            if (model.planar) v.y = 0.0;
            p.x += dt * v.x;
            p.y += dt * v.y;
            p.z += dt * v.z;

            const double speed2 = v.x * v.x + v.y * v.y + v.z * v.z;
            if (!std::isfinite(speed2) || speed2 > cfg.blowup_speed * cfg.blowup_speed)
                diverged = true;
            if (p.z < res.min_height) res.min_height = p.z;
        }

        if ((step + 1) % cfg.trajectory_stride == 0 || step + 1 == steps) {
            const Vec3d c = com(pos);
            res.trajectory.push_back({(step + 1) * dt, c.x, c.y, c.z});
        }
    }

    res.diverged = diverged;
    res.final_positions = pos;
    res.final_velocities = vel;
    if (!diverged) {
        const Vec3d c = com(pos);
        const double ddx = c.x - com0.x;
        const double ddy = c.y - com0.y;
        res.distance = std::sqrt(ddx * ddx + ddy * ddy);
    }
    return res;
}

double kinetic_energy(const RobotModel& model, const SimResult& r) {
    double e = 0.0;
    for (size_t i = 0; i < r.final_velocities.size(); ++i) {
        const Vec3d& v = r.final_velocities[i];
        e += 0.5 * model.masses[i] * (v.x * v.x + v.y * v.y + v.z * v.z);
    }
    return e;
}

std::string trajectory_csv(const SimResult& r) {
    std::ostringstream os;
    os << "t,com_x,com_y,com_z\n";
    os.precision(10);
    for (const auto& row : r.trajectory)
        os << row[0] << ',' << row[1] << ',' << row[2] << ',' << row[3] << '\n';
    return os.str();
}

}  // namespace voxnca
