#pragma once

#include <functional>

#include <Eigen/Dense>

#include "distlab/empirical.hpp"
#include "distlab/generator.hpp"
#include "distlab/grid.hpp"
#include "distlab/transport.hpp"

namespace distlab {

/// Side-by-side record of an analytic gradient and its finite-difference
/// oracle. max_rel_error uses max(||oracle||_inf, 1e-8) as denominator.
struct GradientAudit {
    Eigen::VectorXd formula_gradient;
    Eigen::VectorXd oracle_gradient;
    double max_rel_error = 0.0;
    double h = 0.0;
};

/// Central differences per coordinate with h_c = h_rel * max(|theta_c|, 1).
/// The loss must be finite at every probe point.
Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& loss,
                                  const Eigen::VectorXd& theta,
                                  double h_rel);

// ---- Transport losses on samples (affine pushforward families) ----------
//
// Both differentiate the matched objective at the fixed optimal assignment
// (envelope differentiation): with equal-size uniform marginals the exact
// plan is a permutation sigma and T_p(x_i) = G_theta(z_sigma(i)).

/// Squared-W2 generator loss: sum_i w_i ||x_i - G(z_sigma(i))||^2.
double w2sq_loss(const EmpiricalDistribution& target,
                 const GeneratorFamily& family,
                 const Eigen::VectorXd& theta,
                 const Eigen::MatrixXd& latents);

/// Gradient sum_i w_i 2 (G(z_sigma(i)) - x_i)^T dG/dtheta.
Eigen::VectorXd w2sq_gradient(const EmpiricalDistribution& target,
                              const GeneratorFamily& family,
                              const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& latents);

/// W1 generator loss under the chosen ground norm.
double w1_loss(const EmpiricalDistribution& target,
               const GeneratorFamily& family,
               const Eigen::VectorXd& theta,
               const Eigen::MatrixXd& latents,
               GroundNorm ground);

/// Per-pair weight is the coordinate sign vector of (G - x) for the l1
/// ground (the +-1 structure) and the unit displacement for euclidean.
/// Sign/direction ties are rejected, not resolved.
Eigen::VectorXd w1_gradient(const EmpiricalDistribution& target,
                            const GeneratorFamily& family,
                            const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& latents,
                            GroundNorm ground);

// ---- Density losses on grids (Gaussian-mixture families) ----------------

/// Midpoint gridding of q_theta onto the box/shape of a reference grid,
/// with the sum-to-one quadrature self-check (1e-6) before normalizing.
GridDensity mixture_on_grid(const GeneratorFamily& family,
                            const Eigen::VectorXd& theta,
                            const std::vector<std::pair<double, double>>& box,
                            const std::vector<int>& shape);

/// JSD(p_real, q_theta) on the reference grid.
double jsd_loss(const GeneratorFamily& family,
                const Eigen::VectorXd& theta,
                const GridDensity& p_real);

/// Quadrature of grad(q) log(q/q_m), q_m = (p_real + q)/2. Equals twice the
/// theta-gradient of the JSD.
Eigen::VectorXd jsd_gradient(const GeneratorFamily& family,
                             const Eigen::VectorXd& theta,
                             const GridDensity& p_real);

/// 2 KL(q_m || p_real): the effective objective behind the reversed
/// discriminator trick. p_real must be strictly positive on the grid.
double neg_log_d_loss(const GeneratorFamily& family,
                      const Eigen::VectorXd& theta,
                      const GridDensity& p_real);

/// Quadrature of grad(q) (1 + log(q_m / p_real)).
Eigen::VectorXd neg_log_d_gradient(const GeneratorFamily& family,
                                   const Eigen::VectorXd& theta,
                                   const GridDensity& p_real);

// ---- Audits --------------------------------------------------------------

GradientAudit grad_w2sq(const EmpiricalDistribution& target,
                        const GeneratorFamily& family,
                        const Eigen::VectorXd& theta,
                        const Eigen::MatrixXd& latents,
                        double h_rel = 1e-5);

GradientAudit grad_w1(const EmpiricalDistribution& target,
                      const GeneratorFamily& family,
                      const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& latents,
                      GroundNorm ground,
                      double h_rel = 1e-5);

GradientAudit grad_jsd(const GeneratorFamily& family,
                       const Eigen::VectorXd& theta,
                       const GridDensity& p_real,
                       double h_rel = 1e-5);

GradientAudit grad_neg_log_d(const GeneratorFamily& family,
                             const Eigen::VectorXd& theta,
                             const GridDensity& p_real,
                             double h_rel = 1e-5);

} // namespace distlab
