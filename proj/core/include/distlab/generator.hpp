#pragma once

#include <Eigen/Dense>

#include "distlab/empirical.hpp"

namespace distlab {

enum class FamilyId { AffinePushforward, GaussianMixtureDensity };

/// Parametric generator family. Two shapes:
///
/// AffinePushforward: G_theta(z) = A z + b, theta packs A row-major then b.
/// Feeds the sample-based transport losses.
///
/// GaussianMixtureDensity: isotropic Gaussian mixture density q_theta on R^d.
/// theta packs component locations row-major, then raw scale parameters
/// (sigma = softplus(raw), strictly positive) when free_scales, then weight
/// logits (weights = softmax(logits), simplex-constrained) when free_weights.
/// Frozen blocks use the fixed_* fields. Feeds the density-based losses.
struct GeneratorFamily {
    FamilyId id = FamilyId::AffinePushforward;

    // AffinePushforward
    int latent_dim = 0;
    int ambient_dim = 0;

    // GaussianMixtureDensity
    int components = 0;
    int space_dim = 0;
    bool free_scales = true;
    bool free_weights = true;
    double fixed_scale = 1.0;
    Eigen::VectorXd fixed_weights; // defaults to uniform when empty

    static GeneratorFamily affine(int latent_dim, int ambient_dim);
    static GeneratorFamily gaussian_mixture(int components, int space_dim,
                                            bool free_scales = true, bool free_weights = true);

    int param_count() const;
    void check_theta(const Eigen::VectorXd& theta) const;
};

/// Images A z_j + b of the latent rows. Affine family only.
Eigen::MatrixXd pushforward_points(const GeneratorFamily& family,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::MatrixXd& latents);

/// Same, wrapped as a uniform empirical distribution.
EmpiricalDistribution pushforward(const GeneratorFamily& family,
                                  const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& latents);

/// Mixture density q_theta(x). Gaussian-mixture family only.
double mixture_density(const GeneratorFamily& family,
                       const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& x);

/// Gradient of q_theta(x) with respect to theta (closed form).
Eigen::VectorXd mixture_density_grad(const GeneratorFamily& family,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& x);

double softplus(double x);

} // namespace distlab
