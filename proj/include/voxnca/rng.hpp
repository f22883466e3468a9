#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace voxnca {

// Deterministic random stream. All randomness in the library goes through this
// wrapper so runs are reproducible from a single master seed; distributions are
// implemented here rather than with std:: distributions, whose output is not
// pinned by the standard.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : gen_(seed) {}

    uint64_t next_u64() { return gen_(); }

    // [0, 1)
    double uniform() { return double(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // [0, n)
    int below(int n) { return int(uniform() * double(n)); }

    // inclusive range
    int range(int lo, int hi) { return lo + below(hi - lo + 1); }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, one value per call (no cached spare, keeps the state trivially
    // serializable).
    double normal() {
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Seed for an independent child stream.
    uint64_t split() { return gen_(); }

    std::string state_string() const {
        std::ostringstream os;
        os << gen_;
        return os.str();
    }

    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> gen_;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace voxnca
