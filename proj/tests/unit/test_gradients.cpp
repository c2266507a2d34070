#include <doctest.h>

#include <cmath>

#include <distlab/errors.hpp>
#include <distlab/generator.hpp>
#include <distlab/gradients.hpp>
#include <distlab/rng.hpp>

using namespace distlab;

namespace {

struct OtFixture {
    GeneratorFamily family = GeneratorFamily::affine(2, 2);
    EmpiricalDistribution target;
    Eigen::MatrixXd latents;
    Eigen::VectorXd theta;

    explicit OtFixture(std::uint64_t seed, int n = 50) : target(make_target(seed, n)) {
        Rng rng(seed + 1);
        latents.resize(n, 2);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) latents(i, c) = rng.normal();
        theta.resize(6);
        theta << 1.0 + 0.3 * rng.normal(), 0.3 * rng.normal(), 0.3 * rng.normal(),
            1.0 + 0.3 * rng.normal(), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0);
    }

    static EmpiricalDistribution make_target(std::uint64_t seed, int n) {
        Rng rng(seed);
        Eigen::MatrixXd pts(n, 2);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) pts(i, c) = rng.normal();
        return EmpiricalDistribution::uniform(std::move(pts));
    }
};

GridDensity gaussian_target_grid() {
    GeneratorFamily f = GeneratorFamily::gaussian_mixture(1, 1, false, false);
    Eigen::VectorXd theta(1);
    theta << 0.0;
    return mixture_on_grid(f, theta, {{-8.0, 9.0}}, {4096});
}

} // namespace

TEST_CASE("pushforward basics") {
    GeneratorFamily f = GeneratorFamily::affine(2, 2);
    Eigen::MatrixXd z(3, 2);
    z << 1, 0, 0, 1, 2, -1;

    Eigen::VectorXd identity(6);
    identity << 1, 0, 0, 1, 0, 0;
    CHECK(pushforward_points(f, identity, z) == z);

    Eigen::VectorXd shift(6);
    shift << 1, 0, 0, 1, 0.5, -0.5;
    Eigen::MatrixXd moved = pushforward_points(f, shift, z);
    CHECK(moved(0, 0) == doctest::Approx(1.5));
    CHECK(moved(2, 1) == doctest::Approx(-1.5));

    GeneratorFamily scale_1d = GeneratorFamily::affine(1, 1);
    Eigen::MatrixXd z1(2, 1);
    z1 << -1, 1;
    Eigen::VectorXd two(2);
    two << 2.0, 0.0;
    Eigen::MatrixXd scaled = pushforward_points(scale_1d, two, z1);
    CHECK(scaled(0, 0) == -2.0);
    CHECK(scaled(1, 0) == 2.0);

    GeneratorFamily mixture = GeneratorFamily::gaussian_mixture(1, 1);
    CHECK_THROWS_AS(pushforward_points(mixture, identity, z), InvalidInput);
}

TEST_CASE("finite differences are exact on quadratics and constants") {
    Eigen::VectorXd theta(2);
    theta << 1.0, 2.0;
    Eigen::VectorXd grad = finite_difference(
        [](const Eigen::VectorXd& t) { return t.squaredNorm(); }, theta, 1e-5);
    CHECK(grad[0] == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(grad[1] == doctest::Approx(4.0).epsilon(1e-9));

    Eigen::VectorXd zero = finite_difference([](const Eigen::VectorXd&) { return 3.5; }, theta, 1e-5);
    CHECK(zero.norm() == 0.0);

    CHECK_THROWS_AS(finite_difference(
                        [](const Eigen::VectorXd& t) { return std::log(t[0] - 10.0); }, theta, 1e-5),
                    InvalidInput);
}

TEST_CASE("single-atom analytic gradients") {
    GeneratorFamily f = GeneratorFamily::affine(1, 1);
    Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(1, 1);
    EmpiricalDistribution target = EmpiricalDistribution::uniform(Eigen::MatrixXd::Zero(1, 1));

    Eigen::VectorXd theta(2);
    theta << 1.0, 1.0; // G(z) = z + 1 on z = 0
    Eigen::VectorXd g2 = w2sq_gradient(target, f, theta, latent);
    CHECK(g2[0] == 0.0);
    CHECK(g2[1] == doctest::Approx(2.0).epsilon(1e-12)); // d/dtheta theta^2 at 1

    // W2^2 finite differences on the same configuration.
    Eigen::VectorXd fd = finite_difference(
        [&](const Eigen::VectorXd& t) { return w2sq_loss(target, f, t, latent); }, theta, 1e-5);
    CHECK(std::abs(fd[1] - 2.0) <= 1e-7);

    // |theta| derivative: +1 for theta > 0, -1 for theta < 0, both grounds.
    for (GroundNorm ground : {GroundNorm::L1, GroundNorm::Euclidean}) {
        Eigen::VectorXd g1 = w1_gradient(target, f, theta, latent, ground);
        CHECK(g1[1] == doctest::Approx(1.0));
        Eigen::VectorXd neg = theta;
        neg[1] = -0.7;
        Eigen::VectorXd g1n = w1_gradient(target, f, neg, latent, ground);
        CHECK(g1n[1] == doctest::Approx(-1.0));
    }
}

TEST_CASE("matching configuration has zero gradient") {
    // Latents equal to targets and theta at the identity: the plan is the
    // identity permutation with zero displacement, so the W2^2 gradient
    // vanishes.
    Rng rng(2);
    Eigen::MatrixXd pts(10, 2);
    for (int i = 0; i < 10; ++i)
        for (int c = 0; c < 2; ++c) pts(i, c) = rng.normal();
    EmpiricalDistribution target = EmpiricalDistribution::uniform(pts);
    GeneratorFamily f = GeneratorFamily::affine(2, 2);
    Eigen::VectorXd identity(6);
    identity << 1, 0, 0, 1, 0, 0;
    Eigen::VectorXd grad = w2sq_gradient(target, f, identity, pts);
    CHECK(grad.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("transport gradients match finite differences on random instances") {
    for (std::uint64_t seed : {11u, 29u, 47u}) {
        OtFixture fx(seed);
        CHECK(grad_w2sq(fx.target, fx.family, fx.theta, fx.latents).max_rel_error <= 1e-3);
        CHECK(grad_w1(fx.target, fx.family, fx.theta, fx.latents, GroundNorm::L1).max_rel_error <= 1e-3);
        CHECK(grad_w1(fx.target, fx.family, fx.theta, fx.latents, GroundNorm::Euclidean).max_rel_error <=
              1e-3);
    }
}

TEST_CASE("w1 ties are rejected with the offending pair named") {
    GeneratorFamily f = GeneratorFamily::affine(1, 1);
    EmpiricalDistribution target = EmpiricalDistribution::uniform(Eigen::MatrixXd::Zero(1, 1));
    Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(1, 1);
    Eigen::VectorXd theta(2);
    theta << 1.0, 0.0; // generated point coincides with the target atom
    CHECK_THROWS_WITH_AS(w1_gradient(target, f, theta, latent, GroundNorm::L1),
                         doctest::Contains("pair (0, 0)"), InvalidInput);
    CHECK_THROWS_AS(w1_gradient(target, f, theta, latent, GroundNorm::Euclidean), InvalidInput);
}

TEST_CASE("non-uniform marginals are rejected for envelope gradients") {
    GeneratorFamily f = GeneratorFamily::affine(1, 1);
    Eigen::MatrixXd pts(2, 1);
    pts << 0.0, 1.0;
    Eigen::VectorXd w(2);
    w << 0.3, 0.7;
    EmpiricalDistribution skew(pts, w);
    Eigen::MatrixXd latents(2, 1);
    latents << 0.5, 1.5;
    Eigen::VectorXd theta(2);
    theta << 1.0, 0.0;
    CHECK_THROWS_AS(w2sq_gradient(skew, f, theta, latents), InvalidInput);
}

TEST_CASE("mixture density and gradient agree with finite differences") {
    GeneratorFamily f = GeneratorFamily::gaussian_mixture(2, 1);
    Eigen::VectorXd theta(6);
    theta << -0.5, 1.2, 0.3, 0.8, 0.4, -0.4;
    Eigen::VectorXd x(1);
    x << 0.7;
    Eigen::VectorXd analytic = mixture_density_grad(f, theta, x);
    Eigen::VectorXd fd = finite_difference(
        [&](const Eigen::VectorXd& t) { return mixture_density(f, t, x); }, theta, 1e-6);
    CHECK((analytic - fd).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("grid gradients: symmetry zeros and finite-difference match") {
    GridDensity target = gaussian_target_grid();
    GeneratorFamily location = GeneratorFamily::gaussian_mixture(1, 1, false, false);

    // q = p at theta = 0: both gradients vanish (JSD minimum; normalization).
    Eigen::VectorXd zero(1);
    zero << 0.0;
    CHECK(jsd_gradient(location, zero, target).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(neg_log_d_gradient(location, zero, target).cwiseAbs().maxCoeff() <= 1e-6);

    Eigen::VectorXd one(1);
    one << 1.0;
    GradientAudit jsd_audit = grad_jsd(location, one, target);
    CHECK(jsd_audit.max_rel_error <= 1e-4);
    GradientAudit logd_audit = grad_neg_log_d(location, one, target);
    CHECK(logd_audit.max_rel_error <= 1e-4);

    // Full mixture parametrization (locations, scales, weights).
    GeneratorFamily full = GeneratorFamily::gaussian_mixture(2, 1);
    Eigen::VectorXd theta(6);
    theta << -1.0, 1.5, 0.4, 0.9, 0.5, -0.5;
    CHECK(grad_jsd(full, theta, target).max_rel_error <= 1e-4);
    CHECK(grad_neg_log_d(full, theta, target).max_rel_error <= 1e-4);
}

TEST_CASE("assumption violations are rejected on grids") {
    GeneratorFamily f = GeneratorFamily::gaussian_mixture(1, 1, false, false);
    Eigen::VectorXd theta(1);
    theta << 0.0;

    // A grid with a zero cell violates the equal-support assumption.
    GridDensity holey({{-1.0, 1.0}}, {4}, {0.5, 0.0, 0.25, 0.25});
    CHECK_THROWS_AS(neg_log_d_gradient(f, theta, holey), InvalidInput);

    // A box that misses most of the density mass fails the quadrature check.
    CHECK_THROWS_AS(mixture_on_grid(f, theta, {{5.0, 6.0}}, {64}), InvalidInput);
}

TEST_CASE("weight factors: reversed trick decays in p_r, plain jsd grows") {
    // q fixed; p swept upward across cells. Factor |1 + log(q_m/p)| must be
    // non-increasing and |log(q/q_m)| non-decreasing (exactly).
    const double q = 0.01;
    double previous_logd = std::numeric_limits<double>::infinity();
    double previous_jsd = -1.0;
    for (double p : {0.01, 0.02, 0.04, 0.08, 0.16, 0.32, 0.64}) {
        double qm = 0.5 * (p + q);
        double logd_factor = std::abs(1.0 + std::log(qm / p));
        double jsd_factor = std::abs(std::log(q / qm));
        CHECK(logd_factor <= previous_logd);
        CHECK(jsd_factor >= previous_jsd);
        previous_logd = logd_factor;
        previous_jsd = jsd_factor;
    }
}

TEST_CASE("adaptive vs constant gradient magnitude in the separation") {
    GeneratorFamily f = GeneratorFamily::affine(1, 1);
    Eigen::MatrixXd latent = Eigen::MatrixXd::Zero(1, 1);
    EmpiricalDistribution target = EmpiricalDistribution::uniform(Eigen::MatrixXd::Zero(1, 1));
    for (double d : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        Eigen::VectorXd theta(2);
        theta << 1.0, d;
        CHECK(std::abs(w2sq_gradient(target, f, theta, latent).norm() - 2.0 * d) <= 1e-9);
        CHECK(std::abs(w1_gradient(target, f, theta, latent, GroundNorm::L1).norm() - 1.0) <= 1e-9);
    }
}
