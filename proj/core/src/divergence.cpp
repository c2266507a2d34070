#include "distlab/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

namespace {

void check_same_grid(const GridDensity& p, const GridDensity& q, const char* who) {
    if (!p.same_grid(q)) throw InvalidInput(std::string(who) + ": box/shape mismatch between grids");
}

} // namespace

double kl(const GridDensity& p, const GridDensity& q) {
    check_same_grid(p, q, "kl");
    NeumaierSum acc;
    for (std::size_t c = 0; c < p.cell_count(); ++c) {
        double pc = p.mass(c);
        if (pc == 0.0) continue;
        double qc = q.mass(c);
        if (qc == 0.0) return std::numeric_limits<double>::infinity();
        acc.add(pc * std::log(pc / qc));
    }
    // Nonnegative analytically; shave accumulated rounding only.
    return std::max(acc.value(), 0.0);
}

double jsd(const GridDensity& p, const GridDensity& q) {
    check_same_grid(p, q, "jsd");
    NeumaierSum acc;
    for (std::size_t c = 0; c < p.cell_count(); ++c) {
        double pc = p.mass(c);
        double qc = q.mass(c);
        double mc = 0.5 * (pc + qc);
        if (pc > 0.0) acc.add(0.5 * pc * std::log(pc / mc));
        if (qc > 0.0) acc.add(0.5 * qc * std::log(qc / mc));
    }
    return std::clamp(acc.value(), 0.0, kLog2);
}

DiscriminatorField optimal_discriminator(const GridDensity& p_real, const GridDensity& q) {
    check_same_grid(p_real, q, "optimal_discriminator");
    DiscriminatorField field;
    field.values.resize(p_real.cell_count());
    for (std::size_t c = 0; c < p_real.cell_count(); ++c) {
        double pc = p_real.mass(c);
        double qc = q.mass(c);
        field.values[c] = pc + qc == 0.0 ? 0.5 : pc / (pc + qc);
    }
    return field;
}

} // namespace distlab
