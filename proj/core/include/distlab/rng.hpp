#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace distlab {

/// Seeded generator with hand-rolled uniform/normal transforms.
/// std::uniform_real_distribution and friends are implementation-defined,
/// which would break the byte-identical-output contract across toolchains;
/// the raw mt19937_64 stream is specified, so everything here is portable.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (two draws per call, no cached spare,
    /// so the stream position is independent of call parity).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        // u1 == 0 would take log(0); nudge to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    std::uint64_t raw() { return engine_(); }

    /// Index in [0, n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n; }

    Eigen::VectorXd normal_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    /// Uniform draw from the closed ball of the given radius (rejection from
    /// the bounding cube; acceptance >= 0.5 for dim <= 3).
    Eigen::VectorXd ball(int dim, double radius) {
        Eigen::VectorXd v(dim);
        while (true) {
            double norm2 = 0.0;
            for (int i = 0; i < dim; ++i) {
                v[i] = uniform(-1.0, 1.0);
                norm2 += v[i] * v[i];
            }
            if (norm2 <= 1.0) return radius * v;
        }
    }

    /// Random unit vector.
    Eigen::VectorXd direction(int dim) {
        while (true) {
            Eigen::VectorXd v = normal_vector(dim);
            double n = v.norm();
            if (n > 1e-12) return v / n;
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace distlab
