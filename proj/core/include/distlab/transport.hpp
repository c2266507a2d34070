#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "distlab/empirical.hpp"

namespace distlab {

enum class GroundNorm { Euclidean, L1 };
enum class OtMethod { Exact, Sinkhorn };

/// Discrete transport plan: sparse nonnegative masses whose row sums equal
/// the source weights and column sums the target weights, each within
/// marginal_tolerance (1e-9 for the exact solver, the declared tolerance
/// for entropic plans).
struct Coupling {
    struct Entry {
        int source;
        int target;
        double mass;
    };
    std::vector<Entry> entries;
    int source_size = 0;
    int target_size = 0;
    double marginal_tolerance = 1e-9;

    Eigen::VectorXd row_sums() const;
    Eigen::VectorXd col_sums() const;
    /// Largest |row-sum - weight| / |col-sum - weight| against the marginals.
    double max_marginal_residual(const EmpiricalDistribution& source,
                                 const EmpiricalDistribution& target) const;
};

/// Row i holds the image of source atom i. is_permutation is set when every
/// source atom ships to exactly one target atom; otherwise images are
/// barycentric averages inside the convex hull of the targets.
struct TransportMap {
    Eigen::MatrixXd images;
    bool is_permutation = false;
    /// For permutation maps, assignment[i] is the target index of source i.
    std::vector<int> assignment;
};

struct ExactSolution {
    Coupling coupling;
    double value = 0.0;
};

struct SinkhornOptions {
    double epsilon = 1e-2;
    int max_iter = 10000;
    double tol = 1e-9;
};

struct SinkhornSolution {
    Coupling coupling;
    double value = 0.0; // transport cost of the plan, entropy term excluded
    bool converged = false;
    double row_residual = 0.0;
    double col_residual = 0.0;
    int iterations = 0;
};

/// Pairwise ground costs ||x_i - y_j||^p under the chosen norm.
Eigen::MatrixXd cost_matrix(const EmpiricalDistribution& source,
                            const EmpiricalDistribution& target,
                            GroundNorm ground,
                            int p);

/// Exact optimal transport via network simplex. Deterministic for fixed
/// input (fixed first-eligible pivot rule).
ExactSolution solve_exact(const EmpiricalDistribution& source,
                          const EmpiricalDistribution& target,
                          const Eigen::MatrixXd& cost);

/// Entropic approximation (log-domain Sinkhorn). Non-convergence within
/// max_iter is reported through the flags, never silently accepted.
SinkhornSolution solve_sinkhorn(const EmpiricalDistribution& source,
                                const EmpiricalDistribution& target,
                                const Eigen::MatrixXd& cost,
                                const SinkhornOptions& options);

/// W_p distance, p in {1, 2}: (optimal transport cost under ||.||^p)^(1/p).
double wasserstein(const EmpiricalDistribution& source,
                   const EmpiricalDistribution& target,
                   int p,
                   GroundNorm ground = GroundNorm::Euclidean,
                   OtMethod method = OtMethod::Exact,
                   const SinkhornOptions& sinkhorn = {});

/// Barycentric projection of a plan: image of x_i is sum_j mass_ij y_j / w_i.
TransportMap extract_map(const Coupling& coupling,
                         const EmpiricalDistribution& source,
                         const EmpiricalDistribution& target);

/// Independent oracle: exact minimum over all N! assignments. Requires
/// equal-size uniform marginals and N <= 8.
double brute_force_ot(const EmpiricalDistribution& source,
                      const EmpiricalDistribution& target,
                      const Eigen::MatrixXd& cost);

} // namespace distlab
