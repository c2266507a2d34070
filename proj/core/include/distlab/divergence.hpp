#pragma once

#include <vector>

#include "distlab/grid.hpp"

namespace distlab {

/// Per-cell discriminator values in [0, 1]; 1/2 wherever both densities agree.
struct DiscriminatorField {
    std::vector<double> values;
};

/// KL(p || q) in nats, with 0*log(0) = 0. Absolute-continuity failure
/// (a p-cell with mass where q has none) returns +infinity as a first-class
/// value, never an exception.
double kl(const GridDensity& p, const GridDensity& q);

/// Jensen-Shannon divergence in nats: always finite, symmetric, in [0, log 2].
double jsd(const GridDensity& p, const GridDensity& q);

/// Pointwise-optimal discriminator p / (p + q), with 0/0 -> 1/2.
DiscriminatorField optimal_discriminator(const GridDensity& p_real, const GridDensity& q);

inline constexpr double kLog2 = 0.6931471805599453;

} // namespace distlab
