#include <doctest.h>

#include <cmath>

#include "voxnca/physics.hpp"
#include "voxnca/targets.hpp"

using namespace voxnca;

namespace {

// small 2D crawler: two muscle pairs on a soft spine
TypeField crawler_field() {
    TypeField f = TypeField::empty(5, 2, 1);
    f.set(0, 0, 0, VoxelType::MuscleA);
    f.set(1, 0, 0, VoxelType::SoftPassive);
    f.set(2, 0, 0, VoxelType::HardPassive);
    f.set(3, 0, 0, VoxelType::SoftPassive);
    f.set(4, 0, 0, VoxelType::MuscleB);
    f.set(1, 1, 0, VoxelType::MuscleA);
    f.set(2, 1, 0, VoxelType::SoftPassive);
    f.set(3, 1, 0, VoxelType::MuscleB);
    return f;
}

// y-symmetric 3D block with symmetric muscles
TypeField symmetric_field() {
    TypeField f = TypeField::empty(4, 5, 3);
    for (int z = 0; z < 2; ++z)
        for (int y = 0; y < 5; ++y)
            for (int x = 0; x < 3; ++x) {
                VoxelType t = VoxelType::SoftPassive;
                if (x == 0) t = VoxelType::MuscleA;
                if (x == 2) t = VoxelType::MuscleB;
                f.set(x, y, z, t);
            }
    return f;
}

TypeField mirror_y(const TypeField& f) {
    TypeField m = TypeField::empty(f.nx, f.ny, f.nz);
    for (int z = 0; z < f.nz; ++z)
        for (int y = 0; y < f.ny; ++y)
            for (int x = 0; x < f.nx; ++x) m.set(x, f.ny - 1 - y, z, f.at(x, y, z));
    return m;
}

int naive_spring_count(const TypeField& f) {
    // brute-force enumeration over all occupied pairs within the 26-neighborhood
    int count = 0;
    for (int i = 0; i < f.cell_count(); ++i) {
        if (f.types[size_t(i)] == VoxelType::Empty) continue;
        const int xi = i % f.nx, yi = (i / f.nx) % f.ny, zi = i / (f.nx * f.ny);
        for (int j = i + 1; j < f.cell_count(); ++j) {
            if (f.types[size_t(j)] == VoxelType::Empty) continue;
            const int xj = j % f.nx, yj = (j / f.nx) % f.ny, zj = j / (f.nx * f.ny);
            const int dx = std::abs(xi - xj), dy = std::abs(yi - yj), dz = std::abs(zi - zj);
            if (std::max({dx, dy, dz}) == 1) ++count;
        }
    }
    return count;
}

SimConfig quiet_config() {
    SimConfig cfg;
    cfg.duration = 0.1;
    cfg.amplitude = 0.0;
    return cfg;
}

}  // namespace

TEST_CASE("empty field materializes to an empty, flagged model") {
    SimConfig cfg;
    TypeField f = TypeField::empty(3, 3, 3);
    RobotModel m = materialize(f, {1, 1, 1}, cfg);
    CHECK(m.empty());
    SimResult r = simulate(m, cfg);
    CHECK(distance_fitness(r) == 0.0);
}

TEST_CASE("two adjacent voxels give 2 masses and 1 axial spring") {
    SimConfig cfg;
    TypeField f = TypeField::empty(3, 1, 1);
    f.set(0, 0, 0, VoxelType::SoftPassive);
    f.set(1, 0, 0, VoxelType::SoftPassive);
    RobotModel m = materialize(f, {0, 0, 0}, cfg);
    CHECK(m.voxel_count() == 2);
    REQUIRE(m.springs.size() == 1);
    CHECK(m.springs[0].rest == 1.0);
    CHECK(m.springs[0].actuation == 0.0);
}

TEST_CASE("L-tromino spring count matches brute-force adjacency enumeration") {
    SimConfig cfg;
    TypeField f = TypeField::empty(3, 3, 1);
    f.set(0, 0, 0, VoxelType::HardPassive);
    f.set(0, 1, 0, VoxelType::HardPassive);
    f.set(1, 1, 0, VoxelType::HardPassive);
    RobotModel m = materialize(f, {0, 0, 0}, cfg);
    CHECK(int(m.springs.size()) == naive_spring_count(f));  // 2 axial + 1 shear
    CHECK(int(m.springs.size()) == 3);
}

TEST_CASE("demo target's spring count matches the enumeration oracle") {
    SimConfig cfg;
    TypeField f = demo_quadruped_target();
    RobotModel m = materialize(f, {3, 3, 3}, cfg);
    CHECK(m.voxel_count() == f.non_empty_count());  // target is seed-connected
    CHECK(int(m.springs.size()) == naive_spring_count(f));
}

TEST_CASE("only the seed component is kept") {
    SimConfig cfg;
    TypeField f = TypeField::empty(5, 1, 1);
    f.set(0, 0, 0, VoxelType::SoftPassive);
    f.set(1, 0, 0, VoxelType::SoftPassive);
    f.set(4, 0, 0, VoxelType::HardPassive);  // disconnected
    RobotModel m = materialize(f, {0, 0, 0}, cfg);
    CHECK(m.voxel_count() == 2);
    // an empty seed cell leaves no component at all
    RobotModel none = materialize(f, {2, 0, 0}, cfg);
    CHECK(none.empty());
}

TEST_CASE("muscle pairs actuate, opposing muscles cancel") {
    SimConfig cfg;
    TypeField f = TypeField::empty(4, 1, 1);
    f.set(0, 0, 0, VoxelType::MuscleA);
    f.set(1, 0, 0, VoxelType::MuscleA);
    f.set(2, 0, 0, VoxelType::SoftPassive);
    f.set(3, 0, 0, VoxelType::MuscleB);
    RobotModel m = materialize(f, {0, 0, 0}, cfg);
    for (const auto& s : m.springs) {
        const VoxelType ta = m.voxel_types[size_t(s.a)];
        const VoxelType tb = m.voxel_types[size_t(s.b)];
        if (ta == VoxelType::MuscleA && tb == VoxelType::MuscleA) CHECK(s.actuation == 1.0);
        if (ta == VoxelType::SoftPassive && tb == VoxelType::MuscleB) CHECK(s.actuation == -0.5);
        if (ta == VoxelType::MuscleA && tb == VoxelType::SoftPassive) CHECK(s.actuation == 0.5);
    }
}

TEST_CASE("simulation is deterministic") {
    SimConfig cfg;
    cfg.duration = 0.1;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult a = simulate(m, cfg);
    SimResult b = simulate(m, cfg);
    CHECK(a.distance == b.distance);
    REQUIRE(a.final_positions.size() == b.final_positions.size());
    for (size_t i = 0; i < a.final_positions.size(); ++i) {
        CHECK(a.final_positions[i].x == b.final_positions[i].x);
        CHECK(a.final_positions[i].z == b.final_positions[i].z);
    }
}

TEST_CASE("translating the robot translates the trajectory") {
    SimConfig cfg;
    cfg.duration = 0.1;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    RobotModel shifted = m;
    for (auto& p : shifted.positions) { p.x += 3.0; p.y += 2.0; }
    SimResult a = simulate(m, cfg);
    SimResult b = simulate(shifted, cfg);
    CHECK(a.diverged == b.diverged);
    CHECK(a.distance == doctest::Approx(b.distance).epsilon(1e-9));
    for (size_t i = 0; i < a.final_positions.size(); ++i) {
        CHECK(b.final_positions[i].x - a.final_positions[i].x == doctest::Approx(3.0).epsilon(1e-9));
        CHECK(b.final_positions[i].z == doctest::Approx(a.final_positions[i].z).epsilon(1e-9));
    }
}

TEST_CASE("mirror-symmetric robots do not drift sideways") {
    SimConfig cfg;
    cfg.duration = 0.25;
    RobotModel m = materialize(symmetric_field(), {0, 2, 0}, cfg);
    SimResult r = simulate(m, cfg);
    REQUIRE(!r.diverged);
    const double lateral = std::abs(r.trajectory.back()[2] - r.trajectory.front()[2]);
    CHECK(lateral < 1e-6);
}

TEST_CASE("a robot and its mirror image travel the same distance") {
    SimConfig cfg;
    cfg.duration = 0.25;
    TypeField f = symmetric_field();
    f.set(1, 0, 2, VoxelType::HardPassive);  // break the symmetry
    TypeField g = mirror_y(f);
    SimResult a = simulate(materialize(f, {0, 2, 0}, cfg), cfg);
    SimResult b = simulate(materialize(g, {0, 2, 0}, cfg), cfg);
    REQUIRE(!a.diverged);
    REQUIRE(!b.diverged);
    CHECK(a.distance == doctest::Approx(b.distance).epsilon(1e-6));
}

TEST_CASE("no actuation means settling only") {
    SimConfig cfg = quiet_config();
    cfg.duration = 0.25;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult r = simulate(m, cfg);
    REQUIRE(!r.diverged);
    CHECK(r.distance < 0.05);

    // all-passive robot under full actuation amplitude behaves the same way
    SimConfig act;
    act.duration = 0.25;
    TypeField passive = TypeField::empty(3, 2, 1);
    for (int y = 0; y < 2; ++y)
        for (int x = 0; x < 3; ++x) passive.set(x, y, 0, VoxelType::SoftPassive);
    SimResult rp = simulate(materialize(passive, {0, 0, 0}, act), act);
    REQUIRE(!rp.diverged);
    CHECK(rp.distance < 0.05);
}

TEST_CASE("kinetic energy dies out when actuation is off") {
    SimConfig cfg = quiet_config();
    cfg.duration = 0.5;
    RobotModel m = materialize(symmetric_field(), {0, 2, 0}, cfg);
    SimResult r = simulate(m, cfg);
    REQUIRE(!r.diverged);
    CHECK(kinetic_energy(m, r) < 1e-3);
}

TEST_CASE("masses stay above the ground within tolerance") {
    SimConfig cfg;
    cfg.duration = 0.25;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult r = simulate(m, cfg);
    REQUIRE(!r.diverged);
    CHECK(r.min_height > -0.05);
}

TEST_CASE("halving the timestep moves the final distance by less than 2%") {
    SimConfig cfg;
    cfg.duration = 0.15;
    cfg.frequency = 8.0;  // gentle corpus configuration for integrator checks
    cfg.amplitude = 0.05;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult coarse = simulate(m, cfg);
    SimConfig fine = cfg;
    fine.dt = cfg.dt / 2.0;
    SimResult halved = simulate(m, fine);
    REQUIRE(!coarse.diverged);
    REQUIRE(!halved.diverged);
    const double scale = std::max({std::abs(coarse.distance), std::abs(halved.distance), 1e-3});
    CHECK(std::abs(coarse.distance - halved.distance) / scale < 0.02);
}

TEST_CASE("blow-ups set the diverged flag and zero the distance") {
    SimConfig cfg;
    cfg.duration = 0.05;
    cfg.dt = 0.01;  // hopelessly coarse for these stiffnesses
    cfg.trajectory_stride = 1;
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult r = simulate(m, cfg);
    CHECK(r.diverged);
    CHECK(distance_fitness(r) == 0.0);
}

TEST_CASE("trajectory CSV is well-formed") {
    SimConfig cfg = quiet_config();
    RobotModel m = materialize(crawler_field(), {0, 0, 0}, cfg);
    SimResult r = simulate(m, cfg);
    const std::string csv = trajectory_csv(r);
    CHECK(csv.substr(0, 18) == "t,com_x,com_y,com_");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == long(r.trajectory.size()) + 1);
}
