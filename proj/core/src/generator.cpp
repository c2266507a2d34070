#include "distlab/generator.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "distlab/errors.hpp"

namespace distlab {

double softplus(double x) {
    // Stable in both tails; exact identity softplus(x) = max(x,0) + log1p(exp(-|x|)).
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

namespace {

double softplus_prime(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct MixtureView {
    Eigen::MatrixXd locations; // components x space_dim
    Eigen::VectorXd sigmas;    // component scales
    Eigen::VectorXd weights;   // simplex weights
    Eigen::VectorXd raw_scales;
    Eigen::VectorXd logits;
};

MixtureView unpack_mixture(const GeneratorFamily& f, const Eigen::VectorXd& theta) {
    MixtureView view;
    const int m = f.components, d = f.space_dim;
    view.locations.resize(m, d);
    int at = 0;
    for (int j = 0; j < m; ++j)
        for (int c = 0; c < d; ++c) view.locations(j, c) = theta[at++];

    view.sigmas.resize(m);
    if (f.free_scales) {
        view.raw_scales = theta.segment(at, m);
        at += m;
        for (int j = 0; j < m; ++j) view.sigmas[j] = softplus(view.raw_scales[j]);
    } else {
        view.sigmas.setConstant(f.fixed_scale);
    }

    view.weights.resize(m);
    if (f.free_weights) {
        view.logits = theta.segment(at, m);
        at += m;
        double zmax = view.logits.maxCoeff();
        Eigen::VectorXd e = (view.logits.array() - zmax).exp();
        view.weights = e / e.sum();
    } else if (f.fixed_weights.size() == m) {
        view.weights = f.fixed_weights;
    } else {
        view.weights.setConstant(1.0 / m);
    }
    return view;
}

double gaussian(const Eigen::VectorXd& x, const Eigen::RowVectorXd& mu, double sigma, int d) {
    double z2 = (x.transpose() - mu).squaredNorm() / (sigma * sigma);
    double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * d);
    return norm * std::exp(-0.5 * z2);
}

} // namespace

GeneratorFamily GeneratorFamily::affine(int latent_dim, int ambient_dim) {
    if (latent_dim < 1 || ambient_dim < 1)
        throw InvalidInput("GeneratorFamily::affine: dimensions must be positive");
    GeneratorFamily f;
    f.id = FamilyId::AffinePushforward;
    f.latent_dim = latent_dim;
    f.ambient_dim = ambient_dim;
    return f;
}

GeneratorFamily GeneratorFamily::gaussian_mixture(int components, int space_dim,
                                                  bool free_scales, bool free_weights) {
    if (components < 1 || space_dim < 1)
        throw InvalidInput("GeneratorFamily::gaussian_mixture: need >= 1 component and dimension");
    GeneratorFamily f;
    f.id = FamilyId::GaussianMixtureDensity;
    f.components = components;
    f.space_dim = space_dim;
    f.free_scales = free_scales;
    f.free_weights = free_weights;
    return f;
}

int GeneratorFamily::param_count() const {
    if (id == FamilyId::AffinePushforward) return ambient_dim * latent_dim + ambient_dim;
    int count = components * space_dim;
    if (free_scales) count += components;
    if (free_weights) count += components;
    return count;
}

void GeneratorFamily::check_theta(const Eigen::VectorXd& theta) const {
    if (theta.size() != param_count())
        throw InvalidInput("theta has " + std::to_string(theta.size()) + " entries, family needs " +
                           std::to_string(param_count()));
    if (!theta.allFinite()) throw InvalidInput("theta contains non-finite entries");
}

Eigen::MatrixXd pushforward_points(const GeneratorFamily& family,
                                   const Eigen::VectorXd& theta,
                                   const Eigen::MatrixXd& latents) {
    if (family.id != FamilyId::AffinePushforward)
        throw InvalidInput("pushforward: family is not an affine pushforward");
    family.check_theta(theta);
    if (latents.cols() != family.latent_dim)
        throw InvalidInput("pushforward: latent dimension mismatch");

    const int n = family.ambient_dim, d = family.latent_dim;
    Eigen::MatrixXd a(n, d);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < d; ++c) a(r, c) = theta[r * d + c];
    Eigen::VectorXd b = theta.segment(static_cast<Eigen::Index>(n) * d, n);

    Eigen::MatrixXd out = latents * a.transpose();
    out.rowwise() += b.transpose();
    return out;
}

EmpiricalDistribution pushforward(const GeneratorFamily& family,
                                  const Eigen::VectorXd& theta,
                                  const Eigen::MatrixXd& latents) {
    return EmpiricalDistribution::uniform(pushforward_points(family, theta, latents));
}

double mixture_density(const GeneratorFamily& family,
                       const Eigen::VectorXd& theta,
                       const Eigen::VectorXd& x) {
    if (family.id != FamilyId::GaussianMixtureDensity)
        throw InvalidInput("mixture_density: family is not a Gaussian mixture");
    family.check_theta(theta);
    MixtureView v = unpack_mixture(family, theta);
    double q = 0.0;
    for (int j = 0; j < family.components; ++j)
        q += v.weights[j] * gaussian(x, v.locations.row(j), v.sigmas[j], family.space_dim);
    return q;
}

Eigen::VectorXd mixture_density_grad(const GeneratorFamily& family,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& x) {
    if (family.id != FamilyId::GaussianMixtureDensity)
        throw InvalidInput("mixture_density_grad: family is not a Gaussian mixture");
    family.check_theta(theta);
    MixtureView v = unpack_mixture(family, theta);
    const int m = family.components, d = family.space_dim;

    Eigen::VectorXd component(m);
    double q = 0.0;
    for (int j = 0; j < m; ++j) {
        component[j] = gaussian(x, v.locations.row(j), v.sigmas[j], d);
        q += v.weights[j] * component[j];
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    int at = 0;
    for (int j = 0; j < m; ++j) {
        double s2 = v.sigmas[j] * v.sigmas[j];
        for (int c = 0; c < d; ++c)
            grad[at++] = v.weights[j] * component[j] * (x[c] - v.locations(j, c)) / s2;
    }
    if (family.free_scales) {
        for (int j = 0; j < m; ++j) {
            double sigma = v.sigmas[j];
            double z2 = (x.transpose() - v.locations.row(j)).squaredNorm() / (sigma * sigma);
            // d/d sigma of the isotropic Gaussian: N * (z2 - d) / sigma.
            grad[at++] = v.weights[j] * component[j] * (z2 - d) / sigma * softplus_prime(v.raw_scales[j]);
        }
    }
    if (family.free_weights) {
        for (int j = 0; j < m; ++j)
            grad[at++] = v.weights[j] * (component[j] - q);
    }
    return grad;
}

} // namespace distlab
