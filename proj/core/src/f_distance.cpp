#include "distlab/f_distance.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "distlab/divergence.hpp"
#include "distlab/errors.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

// Mass-weighted log terms with the 0 * log(0) = 0 convention.
double weighted_log(double mass, double value) {
    if (mass == 0.0) return 0.0;
    return mass * std::log(value);
}

// Adversarial criterion of a two-cell split at the per-cell optimum
// D_c = P_c / (P_c + Q_c).
double two_cell_criterion(double p_a, double q_a, double p_b, double q_b) {
    double acc = 0.0;
    for (auto [pc, qc] : {std::pair{p_a, q_a}, std::pair{p_b, q_b}}) {
        if (pc + qc == 0.0) continue;
        double d = pc / (pc + qc);
        acc += weighted_log(pc, d) + weighted_log(qc, 1.0 - d);
    }
    return acc;
}

double exhaustive_two_cell(const EmpiricalDistribution& p, const EmpiricalDistribution& q) {
    const int dim = p.dim();
    // Uninformative split: everything on one side, D = P-mass everywhere.
    double best = two_cell_criterion(1.0, 1.0, 0.0, 0.0);

    for (int axis = 0; axis < dim; ++axis) {
        std::vector<double> coords;
        coords.reserve(static_cast<std::size_t>(p.size() + q.size()));
        for (int i = 0; i < p.size(); ++i) coords.push_back(p.points()(i, axis));
        for (int j = 0; j < q.size(); ++j) coords.push_back(q.points()(j, axis));
        std::sort(coords.begin(), coords.end());
        coords.erase(std::unique(coords.begin(), coords.end()), coords.end());

        for (std::size_t c = 0; c + 1 < coords.size(); ++c) {
            double threshold = 0.5 * (coords[c] + coords[c + 1]);
            double p_a = 0.0, q_a = 0.0;
            for (int i = 0; i < p.size(); ++i)
                if (p.points()(i, axis) <= threshold) p_a += p.weight(i);
            for (int j = 0; j < q.size(); ++j)
                if (q.points()(j, axis) <= threshold) q_a += q.weight(j);
            best = std::max(best, two_cell_criterion(p_a, q_a, 1.0 - p_a, 1.0 - q_a));
        }
    }
    return best;
}

Eigen::MatrixXd feature_matrix(const EmpiricalDistribution& dist, int k, std::uint64_t seed) {
    Eigen::MatrixXd features(dist.size(), k);
    Rng rng(seed);
    std::vector<Eigen::VectorXd> projections;
    for (int f = dist.dim(); f < k; ++f) projections.push_back(rng.direction(dist.dim()));
    for (int i = 0; i < dist.size(); ++i) {
        for (int f = 0; f < k; ++f) {
            if (f < dist.dim())
                features(i, f) = dist.points()(i, f);
            else
                features(i, f) = projections[static_cast<std::size_t>(f - dist.dim())].dot(dist.point(i).transpose());
        }
    }
    return features;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logistic_ascent(const EmpiricalDistribution& p,
                       const EmpiricalDistribution& q,
                       int k,
                       double radius,
                       int steps,
                       std::uint64_t seed) {
    // Shared projection seed so the feature map is a fixed function of (k, seed).
    Eigen::MatrixXd phi_p = feature_matrix(p, k, seed);
    Eigen::MatrixXd phi_q = feature_matrix(q, k, seed);

    auto criterion = [&](const Eigen::VectorXd& w, double b) {
        double acc = 0.0;
        for (int i = 0; i < p.size(); ++i)
            acc += p.weight(i) * std::log(std::max(sigmoid(phi_p.row(i).dot(w) + b), 1e-300));
        for (int j = 0; j < q.size(); ++j)
            acc += q.weight(j) * std::log(std::max(1.0 - sigmoid(phi_q.row(j).dot(w) + b), 1e-300));
        return acc;
    };

    Eigen::VectorXd w = Eigen::VectorXd::Zero(k);
    double b = 0.0;
    double best = criterion(w, b); // zero init gives D = 1/2 exactly

    // Concave objective, so plain projected ascent converges to the
    // constrained optimum; the decaying step tames the initial curvature.
    double step = 2.0;
    for (int it = 0; it < steps; ++it) {
        Eigen::VectorXd grad_w = Eigen::VectorXd::Zero(k);
        double grad_b = 0.0;
        for (int i = 0; i < p.size(); ++i) {
            double d = sigmoid(phi_p.row(i).dot(w) + b);
            grad_w += p.weight(i) * (1.0 - d) * phi_p.row(i).transpose();
            grad_b += p.weight(i) * (1.0 - d);
        }
        for (int j = 0; j < q.size(); ++j) {
            double d = sigmoid(phi_q.row(j).dot(w) + b);
            grad_w -= q.weight(j) * d * phi_q.row(j).transpose();
            grad_b -= q.weight(j) * d;
        }
        w += step * grad_w;
        b += step * grad_b;
        double norm = std::sqrt(w.squaredNorm() + b * b);
        if (norm > radius) {
            w *= radius / norm;
            b *= radius / norm;
        }
        best = std::max(best, criterion(w, b));
        step = 2.0 / (1.0 + 0.01 * it);
    }
    return best;
}

} // namespace

double estimate_f_distance(const EmpiricalDistribution& p,
                           const EmpiricalDistribution& q,
                           const FDistanceFamily& family,
                           int steps,
                           std::uint64_t seed) {
    if (p.dim() != q.dim())
        throw InvalidInput("estimate_f_distance: ambient dimension mismatch");

    double criterion;
    switch (family.kind) {
        case FDistanceFamily::Kind::TwoCellPartition:
            criterion = exhaustive_two_cell(p, q);
            break;
        case FDistanceFamily::Kind::LogisticFeatures:
            if (family.feature_count < 1)
                throw InvalidInput("estimate_f_distance: logistic family needs at least one feature");
            criterion = logistic_ascent(p, q, family.feature_count, family.parameter_radius,
                                        std::max(steps, 1), seed);
            break;
        default:
            throw InvalidInput("estimate_f_distance: unknown family");
    }
    return 0.5 * (criterion + 2.0 * kLog2);
}

double f_objective_as_written(const Eigen::VectorXd& p_weights,
                              const Eigen::VectorXd& d_on_p,
                              const Eigen::VectorXd& q_weights,
                              const Eigen::VectorXd& d_on_q) {
    if (p_weights.size() != d_on_p.size() || q_weights.size() != d_on_q.size())
        throw InvalidInput("f_objective_as_written: weight/value size mismatch");
    double ep = 0.0, eq = 0.0;
    for (Eigen::Index i = 0; i < p_weights.size(); ++i) ep += weighted_log(p_weights[i], d_on_p[i]);
    for (Eigen::Index j = 0; j < q_weights.size(); ++j) eq += weighted_log(q_weights[j], 1.0 - d_on_q[j]);
    return std::abs(ep - eq) - 2.0 * std::log(0.5);
}

} // namespace distlab
