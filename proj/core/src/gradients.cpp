#include "distlab/gradients.hpp"

#include <cmath>
#include <string>

#include "distlab/divergence.hpp"
#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

namespace {

constexpr double kTieTolerance = 1e-9;

void require_affine(const GeneratorFamily& family, const char* who) {
    if (family.id != FamilyId::AffinePushforward)
        throw InvalidInput(std::string(who) + ": needs an affine pushforward family");
}

void require_mixture(const GeneratorFamily& family, const char* who) {
    if (family.id != FamilyId::GaussianMixtureDensity)
        throw InvalidInput(std::string(who) + ": needs a Gaussian-mixture density family");
}

// Optimal assignment between target atoms and generated points; rejects
// inputs whose exact plan is not a permutation (unequal sizes or non-uniform
// weights make the Monge map ill-defined here).
std::vector<int> matched_assignment(const EmpiricalDistribution& target,
                                    const EmpiricalDistribution& generated,
                                    const Eigen::MatrixXd& cost,
                                    const char* who) {
    if (target.size() != generated.size() || !target.is_uniform() || !generated.is_uniform())
        throw InvalidInput(std::string(who) +
                           ": equal-size uniform marginals required so the optimal plan is a permutation");
    ExactSolution solution = solve_exact(target, generated, cost);
    TransportMap map = extract_map(solution.coupling, target, generated);
    if (!map.is_permutation)
        throw InvalidInput(std::string(who) + ": optimal plan is not a permutation "
                           "(degenerate tie between atoms); the fixed-coupling derivative is undefined");
    return map.assignment;
}

// dG/dtheta contracted with a per-pair row weight: for the affine family the
// contribution of pair (x_i, z_j) with weight vector u is
//   dA_rc += u_r z_c,  db_r += u_r.
void accumulate_affine_chain(Eigen::VectorXd& grad,
                             const Eigen::RowVectorXd& pair_weight,
                             const Eigen::RowVectorXd& latent,
                             int ambient_dim,
                             int latent_dim) {
    for (int r = 0; r < ambient_dim; ++r)
        for (int c = 0; c < latent_dim; ++c)
            grad[r * latent_dim + c] += pair_weight[r] * latent[c];
    for (int r = 0; r < ambient_dim; ++r)
        grad[ambient_dim * latent_dim + r] += pair_weight[r];
}

double audit_rel_error(const Eigen::VectorXd& formula, const Eigen::VectorXd& oracle) {
    double denom = std::max(oracle.cwiseAbs().maxCoeff(), 1e-8);
    return (formula - oracle).cwiseAbs().maxCoeff() / denom;
}

} // namespace

Eigen::VectorXd finite_difference(const std::function<double(const Eigen::VectorXd&)>& loss,
                                  const Eigen::VectorXd& theta,
                                  double h_rel) {
    if (h_rel <= 0.0) throw InvalidInput("finite_difference: h_rel must be > 0");
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd probe = theta;
    for (Eigen::Index c = 0; c < theta.size(); ++c) {
        double h = h_rel * std::max(std::abs(theta[c]), 1.0);
        probe[c] = theta[c] + h;
        double up = loss(probe);
        probe[c] = theta[c] - h;
        double down = loss(probe);
        probe[c] = theta[c];
        if (!std::isfinite(up) || !std::isfinite(down))
            throw InvalidInput("finite_difference: loss is non-finite near coordinate " + std::to_string(c));
        grad[c] = (up - down) / (2.0 * h);
    }
    return grad;
}

// ---- W2^2 ------------------------------------------------------------------

double w2sq_loss(const EmpiricalDistribution& target,
                 const GeneratorFamily& family,
                 const Eigen::VectorXd& theta,
                 const Eigen::MatrixXd& latents) {
    require_affine(family, "w2sq_loss");
    EmpiricalDistribution generated = pushforward(family, theta, latents);
    Eigen::MatrixXd cost = cost_matrix(target, generated, GroundNorm::Euclidean, 2);
    return solve_exact(target, generated, cost).value;
}

Eigen::VectorXd w2sq_gradient(const EmpiricalDistribution& target,
                              const GeneratorFamily& family,
                              const Eigen::VectorXd& theta,
                              const Eigen::MatrixXd& latents) {
    require_affine(family, "w2sq_gradient");
    EmpiricalDistribution generated = pushforward(family, theta, latents);
    Eigen::MatrixXd cost = cost_matrix(target, generated, GroundNorm::Euclidean, 2);
    std::vector<int> sigma = matched_assignment(target, generated, cost, "w2sq_gradient");

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    for (int i = 0; i < target.size(); ++i) {
        int j = sigma[static_cast<std::size_t>(i)];
        Eigen::RowVectorXd diff = generated.point(j) - target.point(i);
        Eigen::RowVectorXd pair_weight = target.weight(i) * 2.0 * diff;
        accumulate_affine_chain(grad, pair_weight, latents.row(j), family.ambient_dim, family.latent_dim);
    }
    return grad;
}

// ---- W1 --------------------------------------------------------------------

double w1_loss(const EmpiricalDistribution& target,
               const GeneratorFamily& family,
               const Eigen::VectorXd& theta,
               const Eigen::MatrixXd& latents,
               GroundNorm ground) {
    require_affine(family, "w1_loss");
    EmpiricalDistribution generated = pushforward(family, theta, latents);
    Eigen::MatrixXd cost = cost_matrix(target, generated, ground, 1);
    return solve_exact(target, generated, cost).value;
}

Eigen::VectorXd w1_gradient(const EmpiricalDistribution& target,
                            const GeneratorFamily& family,
                            const Eigen::VectorXd& theta,
                            const Eigen::MatrixXd& latents,
                            GroundNorm ground) {
    require_affine(family, "w1_gradient");
    EmpiricalDistribution generated = pushforward(family, theta, latents);
    Eigen::MatrixXd cost = cost_matrix(target, generated, ground, 1);
    std::vector<int> sigma = matched_assignment(target, generated, cost, "w1_gradient");

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    for (int i = 0; i < target.size(); ++i) {
        int j = sigma[static_cast<std::size_t>(i)];
        Eigen::RowVectorXd diff = generated.point(j) - target.point(i);
        Eigen::RowVectorXd pair_weight(diff.size());
        if (ground == GroundNorm::L1) {
            for (Eigen::Index c = 0; c < diff.size(); ++c) {
                if (std::abs(diff[c]) <= kTieTolerance)
                    throw InvalidInput("w1_gradient: coordinate tie on pair (" + std::to_string(i) + ", " +
                                       std::to_string(j) + ") axis " + std::to_string(c) +
                                       "; the subgradient is ambiguous");
                pair_weight[c] = diff[c] > 0.0 ? 1.0 : -1.0;
            }
        } else {
            double norm = diff.norm();
            if (norm <= kTieTolerance)
                throw InvalidInput("w1_gradient: coincident pair (" + std::to_string(i) + ", " +
                                   std::to_string(j) + "); the subgradient is ambiguous");
            pair_weight = diff / norm;
        }
        pair_weight *= target.weight(i);
        accumulate_affine_chain(grad, pair_weight, latents.row(j), family.ambient_dim, family.latent_dim);
    }
    return grad;
}

// ---- Grid quadrature of the density losses ---------------------------------

GridDensity mixture_on_grid(const GeneratorFamily& family,
                            const Eigen::VectorXd& theta,
                            const std::vector<std::pair<double, double>>& box,
                            const std::vector<int>& shape) {
    require_mixture(family, "mixture_on_grid");
    if (static_cast<int>(box.size()) != family.space_dim)
        throw InvalidInput("mixture_on_grid: box rank does not match the family dimension");

    std::size_t cells = 1;
    double volume = 1.0;
    for (std::size_t a = 0; a < box.size(); ++a) {
        cells *= static_cast<std::size_t>(shape[a]);
        volume *= (box[a].second - box[a].first) / shape[a];
    }

    GridDensity probe(box, shape, std::vector<double>(cells, 1.0 / static_cast<double>(cells)));
    std::vector<double> masses(cells);
    NeumaierSum total;
    Eigen::VectorXd x(family.space_dim);
    for (std::size_t c = 0; c < cells; ++c) {
        std::vector<double> center = probe.cell_center(c);
        for (int a = 0; a < family.space_dim; ++a) x[a] = center[static_cast<std::size_t>(a)];
        masses[c] = mixture_density(family, theta, x) * volume;
        total.add(masses[c]);
    }
    double sum = total.value();
    if (std::abs(sum - 1.0) > 1e-6)
        throw InvalidInput("mixture_on_grid: quadrature self-check failed, cell masses sum to " +
                           format_double(sum) + " (grid too coarse or box too small)");
    for (double& m : masses) m /= sum;
    return GridDensity(box, shape, std::move(masses));
}

double jsd_loss(const GeneratorFamily& family,
                const Eigen::VectorXd& theta,
                const GridDensity& p_real) {
    return jsd(p_real, mixture_on_grid(family, theta, p_real.box(), p_real.shape()));
}

Eigen::VectorXd jsd_gradient(const GeneratorFamily& family,
                             const Eigen::VectorXd& theta,
                             const GridDensity& p_real) {
    require_mixture(family, "jsd_gradient");
    if (p_real.dim() != family.space_dim)
        throw InvalidInput("jsd_gradient: grid rank does not match the family dimension");
    // Run the coarseness self-check up front.
    mixture_on_grid(family, theta, p_real.box(), p_real.shape());

    const double volume = p_real.cell_volume();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd x(family.space_dim);
    for (std::size_t c = 0; c < p_real.cell_count(); ++c) {
        std::vector<double> center = p_real.cell_center(c);
        for (int a = 0; a < family.space_dim; ++a) x[a] = center[static_cast<std::size_t>(a)];
        double q = mixture_density(family, theta, x);
        if (q <= 0.0) continue;
        double pr = p_real.mass(c) / volume;
        double qm = 0.5 * (pr + q);
        grad += volume * std::log(q / qm) * mixture_density_grad(family, theta, x);
    }
    return grad;
}

double neg_log_d_loss(const GeneratorFamily& family,
                      const Eigen::VectorXd& theta,
                      const GridDensity& p_real) {
    require_mixture(family, "neg_log_d_loss");
    GridDensity q = mixture_on_grid(family, theta, p_real.box(), p_real.shape());
    std::vector<double> mid(p_real.cell_count());
    for (std::size_t c = 0; c < mid.size(); ++c) mid[c] = 0.5 * (p_real.mass(c) + q.mass(c));
    GridDensity qm(p_real.box(), p_real.shape(), std::move(mid));
    return 2.0 * kl(qm, p_real);
}

Eigen::VectorXd neg_log_d_gradient(const GeneratorFamily& family,
                                   const Eigen::VectorXd& theta,
                                   const GridDensity& p_real) {
    require_mixture(family, "neg_log_d_gradient");
    if (p_real.dim() != family.space_dim)
        throw InvalidInput("neg_log_d_gradient: grid rank does not match the family dimension");
    for (std::size_t c = 0; c < p_real.cell_count(); ++c)
        if (p_real.mass(c) == 0.0)
            throw InvalidInput("neg_log_d_gradient: p_real vanishes on cell " + std::to_string(c) +
                               "; smooth it first so supports are equal");
    mixture_on_grid(family, theta, p_real.box(), p_real.shape());

    const double volume = p_real.cell_volume();
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(theta.size());
    Eigen::VectorXd x(family.space_dim);
    for (std::size_t c = 0; c < p_real.cell_count(); ++c) {
        std::vector<double> center = p_real.cell_center(c);
        for (int a = 0; a < family.space_dim; ++a) x[a] = center[static_cast<std::size_t>(a)];
        double q = mixture_density(family, theta, x);
        double pr = p_real.mass(c) / volume;
        double qm = 0.5 * (pr + q);
        grad += volume * (1.0 + std::log(qm / pr)) * mixture_density_grad(family, theta, x);
    }
    return grad;
}

// ---- Audits ----------------------------------------------------------------

GradientAudit grad_w2sq(const EmpiricalDistribution& target,
                        const GeneratorFamily& family,
                        const Eigen::VectorXd& theta,
                        const Eigen::MatrixXd& latents,
                        double h_rel) {
    GradientAudit audit;
    audit.h = h_rel;
    audit.formula_gradient = w2sq_gradient(target, family, theta, latents);
    audit.oracle_gradient = finite_difference(
        [&](const Eigen::VectorXd& t) { return w2sq_loss(target, family, t, latents); }, theta, h_rel);
    audit.max_rel_error = audit_rel_error(audit.formula_gradient, audit.oracle_gradient);
    return audit;
}

GradientAudit grad_w1(const EmpiricalDistribution& target,
                      const GeneratorFamily& family,
                      const Eigen::VectorXd& theta,
                      const Eigen::MatrixXd& latents,
                      GroundNorm ground,
                      double h_rel) {
    GradientAudit audit;
    audit.h = h_rel;
    audit.formula_gradient = w1_gradient(target, family, theta, latents, ground);
    audit.oracle_gradient = finite_difference(
        [&](const Eigen::VectorXd& t) { return w1_loss(target, family, t, latents, ground); }, theta, h_rel);
    audit.max_rel_error = audit_rel_error(audit.formula_gradient, audit.oracle_gradient);
    return audit;
}

GradientAudit grad_jsd(const GeneratorFamily& family,
                       const Eigen::VectorXd& theta,
                       const GridDensity& p_real,
                       double h_rel) {
    GradientAudit audit;
    audit.h = h_rel;
    audit.formula_gradient = jsd_gradient(family, theta, p_real);
    audit.oracle_gradient = finite_difference(
        [&](const Eigen::VectorXd& t) { return 2.0 * jsd_loss(family, t, p_real); }, theta, h_rel);
    audit.max_rel_error = audit_rel_error(audit.formula_gradient, audit.oracle_gradient);
    return audit;
}

GradientAudit grad_neg_log_d(const GeneratorFamily& family,
                             const Eigen::VectorXd& theta,
                             const GridDensity& p_real,
                             double h_rel) {
    GradientAudit audit;
    audit.h = h_rel;
    audit.formula_gradient = neg_log_d_gradient(family, theta, p_real);
    audit.oracle_gradient = finite_difference(
        [&](const Eigen::VectorXd& t) { return neg_log_d_loss(family, t, p_real); }, theta, h_rel);
    audit.max_rel_error = audit_rel_error(audit.formula_gradient, audit.oracle_gradient);
    return audit;
}

} // namespace distlab
