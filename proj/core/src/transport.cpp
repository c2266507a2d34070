#include "distlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "distlab/errors.hpp"
#include "distlab/network_simplex.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

Eigen::VectorXd Coupling::row_sums() const {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(source_size);
    for (const Entry& e : entries) sums[e.source] += e.mass;
    return sums;
}

Eigen::VectorXd Coupling::col_sums() const {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(target_size);
    for (const Entry& e : entries) sums[e.target] += e.mass;
    return sums;
}

double Coupling::max_marginal_residual(const EmpiricalDistribution& source,
                                       const EmpiricalDistribution& target) const {
    double r = (row_sums() - source.weights()).cwiseAbs().maxCoeff();
    double c = (col_sums() - target.weights()).cwiseAbs().maxCoeff();
    return std::max(r, c);
}

Eigen::MatrixXd cost_matrix(const EmpiricalDistribution& source,
                            const EmpiricalDistribution& target,
                            GroundNorm ground,
                            int p) {
    if (source.dim() != target.dim())
        throw InvalidInput("cost_matrix: ambient dimension mismatch (" + std::to_string(source.dim()) +
                           " vs " + std::to_string(target.dim()) + ")");
    if (p < 1) throw InvalidInput("cost_matrix: exponent p must be >= 1");

    const int n = source.size(), m = target.size();
    Eigen::MatrixXd cost(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            Eigen::RowVectorXd diff = source.point(i) - target.point(j);
            double base = ground == GroundNorm::Euclidean ? diff.norm() : diff.lpNorm<1>();
            cost(i, j) = p == 1 ? base : std::pow(base, p);
        }
    }
    return cost;
}

namespace {

Coupling collect_plan(const BipartiteNetworkSimplex& solver, int n, int m, double tolerance) {
    Coupling plan;
    plan.source_size = n;
    plan.target_size = m;
    plan.marginal_tolerance = tolerance;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            double f = solver.flow(i, j);
            // Degenerate basis arcs can carry pivot dust; real mass on these
            // instances is never below 1e-13.
            if (f > 1e-13) plan.entries.push_back({i, j, f});
        }
    return plan;
}

void check_same_dim(const EmpiricalDistribution& a, const EmpiricalDistribution& b, const char* who) {
    if (a.dim() != b.dim())
        throw InvalidInput(std::string(who) + ": ambient dimension mismatch");
}

} // namespace

ExactSolution solve_exact(const EmpiricalDistribution& source,
                          const EmpiricalDistribution& target,
                          const Eigen::MatrixXd& cost) {
    if (cost.rows() != source.size() || cost.cols() != target.size())
        throw InvalidInput("solve_exact: cost matrix shape mismatch");
    if (!cost.allFinite())
        throw InvalidInput("solve_exact: non-finite cost entry");

    std::vector<double> supplies(source.weights().data(), source.weights().data() + source.size());
    std::vector<double> demands(target.weights().data(), target.weights().data() + target.size());
    std::vector<double> costs(static_cast<std::size_t>(source.size()) * static_cast<std::size_t>(target.size()));
    for (int i = 0; i < source.size(); ++i)
        for (int j = 0; j < target.size(); ++j)
            costs[static_cast<std::size_t>(i) * static_cast<std::size_t>(target.size()) + static_cast<std::size_t>(j)] =
                cost(i, j);

    BipartiteNetworkSimplex solver;
    BipartiteNetworkSimplex::Result run = solver.solve(supplies, demands, costs);

    ExactSolution solution;
    solution.coupling = collect_plan(solver, source.size(), target.size(), 1e-9);
    solution.value = run.total_cost;

    double residual = solution.coupling.max_marginal_residual(source, target);
    if (residual > 1e-9)
        throw SolverFailure("solve_exact: marginal residual " + std::to_string(residual) +
                            " exceeds 1e-9 (solver defect)");
    return solution;
}

double wasserstein(const EmpiricalDistribution& source,
                   const EmpiricalDistribution& target,
                   int p,
                   GroundNorm ground,
                   OtMethod method,
                   const SinkhornOptions& sinkhorn) {
    if (p != 1 && p != 2) throw InvalidInput("wasserstein: p must be 1 or 2");
    Eigen::MatrixXd cost = cost_matrix(source, target, ground, p);
    double value;
    if (method == OtMethod::Exact) {
        value = solve_exact(source, target, cost).value;
    } else {
        value = solve_sinkhorn(source, target, cost, sinkhorn).value;
    }
    value = std::max(value, 0.0);
    return p == 1 ? value : std::sqrt(value);
}

TransportMap extract_map(const Coupling& coupling,
                         const EmpiricalDistribution& source,
                         const EmpiricalDistribution& target) {
    check_same_dim(source, target, "extract_map");
    if (coupling.source_size != source.size() || coupling.target_size != target.size())
        throw InvalidInput("extract_map: coupling shape does not match marginals");

    Eigen::VectorXd rows = coupling.row_sums();
    for (int i = 0; i < source.size(); ++i)
        if (rows[i] <= 0.0)
            throw InvalidInput("extract_map: source atom " + std::to_string(i) + " carries no mass");

    TransportMap map;
    map.images = Eigen::MatrixXd::Zero(source.size(), source.dim());
    std::vector<int> per_row_entries(static_cast<std::size_t>(source.size()), 0);
    std::vector<int> per_col_entries(static_cast<std::size_t>(target.size()), 0);
    std::vector<int> last_target(static_cast<std::size_t>(source.size()), -1);
    for (const Coupling::Entry& e : coupling.entries) {
        map.images.row(e.source) += e.mass * target.point(e.target);
        ++per_row_entries[static_cast<std::size_t>(e.source)];
        ++per_col_entries[static_cast<std::size_t>(e.target)];
        last_target[static_cast<std::size_t>(e.source)] = e.target;
    }
    for (int i = 0; i < source.size(); ++i) map.images.row(i) /= rows[i];

    // A permutation needs one cell per row and per column: the images are
    // then a genuine reordering of the target points.
    map.is_permutation =
        source.size() == target.size() &&
        std::all_of(per_row_entries.begin(), per_row_entries.end(), [](int k) { return k == 1; }) &&
        std::all_of(per_col_entries.begin(), per_col_entries.end(), [](int k) { return k == 1; });
    if (map.is_permutation) {
        map.assignment.assign(last_target.begin(), last_target.end());
        // Snap barycentric rounding: each image is exactly its target point.
        for (int i = 0; i < source.size(); ++i) map.images.row(i) = target.point(map.assignment[static_cast<std::size_t>(i)]);
    }
    return map;
}

double brute_force_ot(const EmpiricalDistribution& source,
                      const EmpiricalDistribution& target,
                      const Eigen::MatrixXd& cost) {
    const int n = source.size();
    if (n != target.size())
        throw InvalidInput("brute_force_ot: marginals must have equal size");
    if (!source.is_uniform() || !target.is_uniform())
        throw InvalidInput("brute_force_ot: marginals must be uniform");
    if (n > 8)
        throw InvalidInput("brute_force_ot: N > 8 rejected (factorial blowup)");
    if (cost.rows() != n || cost.cols() != n)
        throw InvalidInput("brute_force_ot: cost matrix shape mismatch");

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += cost(i, perm[static_cast<std::size_t>(i)]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / static_cast<double>(n);
}

} // namespace distlab
