#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace voxnca {

// Bias-corrected Adam. step() throws on non-finite gradients so trainers can
// abort with a checkpoint instead of poisoning the parameters.
template <class Real>
struct Adam {
    Real lr = Real(1e-3);
    Real beta1 = Real(0.9);
    Real beta2 = Real(0.999);
    Real eps = Real(1e-8);
    int64_t t = 0;
    std::vector<Real> m, v;

    explicit Adam(size_t n = 0, Real learning_rate = Real(1e-3))
        : lr(learning_rate), m(n, Real(0)), v(n, Real(0)) {}

    void step(std::span<Real> params, std::span<const Real> grads) {
        if (params.size() != m.size() || grads.size() != m.size())
            throw std::invalid_argument("adam: size mismatch");
        for (size_t i = 0; i < grads.size(); ++i) {
            if (!std::isfinite(double(grads[i]))) {
                std::ostringstream os;
                os << "adam: non-finite gradient at index " << i << " (step " << t + 1 << ")";
                throw std::runtime_error(os.str());
            }
        }
        t += 1;
        const Real bc1 = Real(1) - Real(std::pow(double(beta1), double(t)));
        const Real bc2 = Real(1) - Real(std::pow(double(beta2), double(t)));
        for (size_t i = 0; i < params.size(); ++i) {
            const Real g = grads[i];
            m[i] = beta1 * m[i] + (Real(1) - beta1) * g;
            v[i] = beta2 * v[i] + (Real(1) - beta2) * g * g;
            const Real mhat = m[i] / bc1;
            const Real vhat = v[i] / bc2;
            params[i] -= lr * mhat / (Real(std::sqrt(double(vhat))) + eps);
        }
    }
};

}  // namespace voxnca
