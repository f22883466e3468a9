#pragma once

#include <array>
#include <string>
#include <vector>

#include "voxnca/grid.hpp"

namespace voxnca {

struct Vec3d {
    double x = 0, y = 0, z = 0;
};

// Mass-spring stand-in for a full voxel FEM simulator. One point mass per
// occupied voxel; axial, face-diagonal and body-diagonal springs between
// adjacent voxels. Muscles drive spring rest lengths against one global
// sinusoidal signal; MuscleB runs at counter phase to MuscleA.
//
// All constants live here and are declared defaults of this engine, not
// values taken from any external simulator. Distances are in voxel edge
// lengths, time in seconds.
struct SimConfig {
    double duration = 0.25;
    double frequency = 40.0;   // Hz of the global actuation signal
    double amplitude = 0.14;   // rest-length fraction
    double dt = 1.0 / 16000.0;
    double gravity = 50.0;     // voxel-lengths / s^2

    double stiffness_soft = 25000.0;
    double stiffness_hard = 100000.0;
    double stiffness_muscle = 50000.0;
    double voxel_mass = 1.0;

    double friction = 0.5;              // Coulomb, against the ground plane
    double damping = 0.2;               // global linear velocity damping, 1/s
    double spring_damping_ratio = 0.05; // along-axis relative damping
    double ground_stiffness = 5.0e5;
    double ground_damping = 300.0;

    double blowup_speed = 1.0e4;  // divergence guard, voxel-lengths / s
    int trajectory_stride = 16;   // steps between recorded COM samples
};

struct RobotSpring {
    int a = 0, b = 0;
    double rest = 1.0;
    double stiffness = 0.0;
    double actuation = 0.0;  // rest-length oscillation factor in [-1, 1]
};

struct RobotModel {
    std::vector<Vec3d> positions;  // initial, lowest layer resting on z=0
    std::vector<double> masses;
    std::vector<VoxelType> voxel_types;
    std::vector<RobotSpring> springs;
    bool planar = false;  // one-voxel-deep robots move in the x/z plane
    int voxel_count() const { return int(positions.size()); }
    bool empty() const { return positions.empty(); }
};

struct SimResult {
    std::vector<std::array<double, 4>> trajectory;  // t, com x, y, z
    double distance = 0.0;  // ground-plane displacement of the COM
    bool diverged = false;
    double min_height = 0.0;  // lowest mass height seen over the whole run
    std::vector<Vec3d> final_positions;
    std::vector<Vec3d> final_velocities;
};

// Keeps the 6-connected component containing seed_pos; everything else is
// discarded. An empty decoded field (or an empty seed cell) gives an empty,
// flagged model. 2D fields (nz == 1) map grid y to world height.
RobotModel materialize(const TypeField& field, Vec3i seed_pos, const SimConfig& cfg);

// Semi-implicit Euler. Deterministic; divergence sets the flag and zeroes the
// distance.
SimResult simulate(const RobotModel& model, const SimConfig& cfg);

inline double distance_fitness(const SimResult& r) { return r.diverged ? 0.0 : r.distance; }

double kinetic_energy(const RobotModel& model, const SimResult& r);

std::string trajectory_csv(const SimResult& r);

}  // namespace voxnca
