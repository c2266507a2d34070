#include <doctest.h>

#include <cmath>

#include <distlab/empirical.hpp>
#include <distlab/errors.hpp>
#include <distlab/rng.hpp>
#include <distlab/transport.hpp>

using namespace distlab;

namespace {

EmpiricalDistribution cloud_1d(std::initializer_list<double> xs) {
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(xs.size()), 1);
    Eigen::Index i = 0;
    for (double x : xs) pts(i++, 0) = x;
    return EmpiricalDistribution::uniform(std::move(pts));
}

EmpiricalDistribution random_cloud(int n, int dim, Rng& rng) {
    Eigen::MatrixXd pts(n, dim);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < dim; ++c) pts(i, c) = rng.normal();
    return EmpiricalDistribution::uniform(std::move(pts));
}

} // namespace

TEST_CASE("cost matrix ground norms") {
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 0, 0;
    b << 3, 4;
    EmpiricalDistribution p = EmpiricalDistribution::uniform(a);
    EmpiricalDistribution q = EmpiricalDistribution::uniform(b);

    CHECK(cost_matrix(p, q, GroundNorm::Euclidean, 2)(0, 0) == doctest::Approx(25.0));
    CHECK(cost_matrix(p, q, GroundNorm::L1, 1)(0, 0) == doctest::Approx(7.0));
    CHECK(cost_matrix(p, p, GroundNorm::Euclidean, 2)(0, 0) == 0.0);

    Eigen::MatrixXd c(1, 3);
    c << 0, 0, 0;
    CHECK_THROWS_AS(cost_matrix(p, EmpiricalDistribution::uniform(c), GroundNorm::Euclidean, 2),
                    InvalidInput);
}

TEST_CASE("monotone pair on the line") {
    EmpiricalDistribution p = cloud_1d({0.0, 1.0});
    EmpiricalDistribution q = cloud_1d({1.0, 2.0});
    Eigen::MatrixXd cost = cost_matrix(p, q, GroundNorm::Euclidean, 2);

    // Frozen from the two-permutation enumeration: id -> 1, swap -> 2.
    CHECK(brute_force_ot(p, q, cost) == doctest::Approx(1.0).epsilon(1e-12));

    ExactSolution solution = solve_exact(p, q, cost);
    CHECK(solution.value == doctest::Approx(1.0).epsilon(1e-12));
    TransportMap map = extract_map(solution.coupling, p, q);
    CHECK(map.is_permutation);
    CHECK(map.images(0, 0) == doctest::Approx(1.0));
    CHECK(map.images(1, 0) == doctest::Approx(2.0));

    CHECK(wasserstein(p, q, 1) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identity and single-atom cases") {
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 0, 0;
    b << 3, 4;
    EmpiricalDistribution p = EmpiricalDistribution::uniform(a);
    EmpiricalDistribution q = EmpiricalDistribution::uniform(b);
    CHECK(wasserstein(p, q, 2) == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(wasserstein(p, p, 2) == 0.0);

    Rng rng(7);
    EmpiricalDistribution cloud = random_cloud(5, 2, rng);
    Eigen::MatrixXd cost = cost_matrix(cloud, cloud, GroundNorm::Euclidean, 2);
    ExactSolution self = solve_exact(cloud, cloud, cost);
    CHECK(self.value == doctest::Approx(0.0).epsilon(1e-12));
    TransportMap map = extract_map(self.coupling, cloud, cloud);
    CHECK(map.is_permutation);
    for (int i = 0; i < 5; ++i) CHECK(map.assignment[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("exact solver equals the brute-force oracle on random instances") {
    Rng rng(20250811);
    for (int trial = 0; trial < 60; ++trial) {
        int n = 2 + static_cast<int>(rng.index(6)); // 2..7
        int dim = 1 + static_cast<int>(rng.index(3));
        GroundNorm ground = trial % 2 ? GroundNorm::L1 : GroundNorm::Euclidean;
        int p = trial % 3 == 0 ? 1 : 2;
        EmpiricalDistribution a = random_cloud(n, dim, rng);
        EmpiricalDistribution b = random_cloud(n, dim, rng);
        Eigen::MatrixXd cost = cost_matrix(a, b, ground, p);
        double exact = solve_exact(a, b, cost).value;
        double oracle = brute_force_ot(a, b, cost);
        CHECK(std::abs(exact - oracle) <= 1e-9);
    }
}

TEST_CASE("heavily degenerate lattice instances still match the oracle") {
    // Integer lattice points under the l1 ground cost produce massive cost
    // ties; the pivot rule has to leave every degenerate basis.
    Rng rng(777);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 4 + static_cast<int>(rng.index(4)); // 4..7
        Eigen::MatrixXd a(n, 2), b(n, 2);
        for (int i = 0; i < n; ++i)
            for (int c = 0; c < 2; ++c) {
                a(i, c) = static_cast<double>(rng.index(3));
                b(i, c) = static_cast<double>(rng.index(3));
            }
        EmpiricalDistribution p = EmpiricalDistribution::uniform(a);
        EmpiricalDistribution q = EmpiricalDistribution::uniform(b);
        for (GroundNorm ground : {GroundNorm::L1, GroundNorm::Euclidean}) {
            Eigen::MatrixXd cost = cost_matrix(p, q, ground, 1);
            double gap = std::abs(solve_exact(p, q, cost).value - brute_force_ot(p, q, cost));
            CHECK(gap <= 1e-9);
        }
    }
}

TEST_CASE("brute force rejects oversize and non-uniform inputs") {
    Rng rng(3);
    EmpiricalDistribution a = random_cloud(9, 2, rng);
    EmpiricalDistribution b = random_cloud(9, 2, rng);
    Eigen::MatrixXd cost = cost_matrix(a, b, GroundNorm::Euclidean, 2);
    CHECK_THROWS_AS(brute_force_ot(a, b, cost), InvalidInput);

    Eigen::MatrixXd pts(2, 1);
    pts << 0, 1;
    Eigen::VectorXd w(2);
    w << 0.25, 0.75;
    EmpiricalDistribution skew(pts, w);
    EmpiricalDistribution uniform = cloud_1d({0.0, 1.0});
    Eigen::MatrixXd c2 = cost_matrix(skew, uniform, GroundNorm::Euclidean, 2);
    CHECK_THROWS_AS(brute_force_ot(skew, uniform, c2), InvalidInput);
}

TEST_CASE("unequal sizes and non-uniform weights still solve exactly") {
    Eigen::MatrixXd src(2, 1), dst(1, 1);
    src << 0.0, 1.0;
    dst << 0.5;
    EmpiricalDistribution p = EmpiricalDistribution::uniform(src);
    EmpiricalDistribution q = EmpiricalDistribution::uniform(dst);
    Eigen::MatrixXd cost = cost_matrix(p, q, GroundNorm::Euclidean, 2);
    ExactSolution solution = solve_exact(p, q, cost);
    CHECK(solution.value == doctest::Approx(0.25));
    TransportMap map = extract_map(solution.coupling, p, q);
    CHECK(!map.is_permutation);
    CHECK(map.images(0, 0) == doctest::Approx(0.5));
    CHECK(map.images(1, 0) == doctest::Approx(0.5));
}

TEST_CASE("metric axioms on random triples") {
    Rng rng(99);
    for (int trial = 0; trial < 12; ++trial) {
        int n = 4 + static_cast<int>(rng.index(5));
        EmpiricalDistribution a = random_cloud(n, 2, rng);
        EmpiricalDistribution b = random_cloud(n, 2, rng);
        EmpiricalDistribution c = random_cloud(n, 2, rng);
        for (int p : {1, 2}) {
            double ab = wasserstein(a, b, p);
            double ba = wasserstein(b, a, p);
            double ac = wasserstein(a, c, p);
            double cb = wasserstein(c, b, p);
            CHECK(std::abs(ab - ba) <= 1e-9);
            CHECK(ab <= ac + cb + 1e-9);
            CHECK(wasserstein(a, a, p) == 0.0);
        }
    }
}

TEST_CASE("translation bound") {
    Rng rng(123);
    EmpiricalDistribution a = random_cloud(16, 2, rng);
    EmpiricalDistribution b = random_cloud(16, 2, rng);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::VectorXd t = rng.normal_vector(2);
        double base = wasserstein(a, b, 2);
        double moved = wasserstein(a, b.translated(t), 2);
        CHECK(moved <= base + t.norm() + 1e-9);
        // Translating a cloud against itself costs exactly the shift length.
        CHECK(wasserstein(b, b.translated(t), 2) == doctest::Approx(t.norm()).epsilon(1e-9));
    }
}

TEST_CASE("coupling marginals meet the declared tolerance") {
    Rng rng(5);
    EmpiricalDistribution a = random_cloud(24, 3, rng);
    Eigen::MatrixXd pts(30, 3);
    Eigen::VectorXd w(30);
    for (int i = 0; i < 30; ++i) {
        for (int c = 0; c < 3; ++c) pts(i, c) = rng.normal();
        w[i] = rng.uniform(0.1, 1.0);
    }
    EmpiricalDistribution b(pts, w);
    Eigen::MatrixXd cost = cost_matrix(a, b, GroundNorm::Euclidean, 2);
    ExactSolution solution = solve_exact(a, b, cost);
    CHECK(solution.coupling.max_marginal_residual(a, b) <= 1e-9);
}

TEST_CASE("sinkhorn identity, bracketing and epsilon sweep") {
    Eigen::MatrixXd single_a(1, 2), single_b(1, 2);
    single_a << 0, 0;
    single_b << 3, 4;
    EmpiricalDistribution pa = EmpiricalDistribution::uniform(single_a);
    EmpiricalDistribution pb = EmpiricalDistribution::uniform(single_b);
    Eigen::MatrixXd c1 = cost_matrix(pa, pb, GroundNorm::Euclidean, 2);
    for (double eps : {1.0, 0.1, 0.01}) {
        SinkhornSolution s = solve_sinkhorn(pa, pb, c1, {eps, 2000, 1e-10});
        CHECK(s.value == doctest::Approx(25.0).epsilon(1e-9)); // unique coupling
    }

    Rng rng(11);
    Eigen::MatrixXd pts(40, 2);
    for (int i = 0; i < 40; ++i)
        for (int c = 0; c < 2; ++c) pts(i, c) = rng.normal();
    EmpiricalDistribution p = EmpiricalDistribution::uniform(pts.topRows(20));
    EmpiricalDistribution q = EmpiricalDistribution::uniform(pts.bottomRows(20));
    Eigen::MatrixXd cost = cost_matrix(p, q, GroundNorm::Euclidean, 2);
    double exact = solve_exact(p, q, cost).value;

    // Identity input: entropic bound value <= exact + eps log N, resolution
    // of the iteration honestly reported (tiny eps stalls near the double
    // precision residual floor instead of hitting 1e-10).
    Eigen::MatrixXd self_cost = cost_matrix(p, p, GroundNorm::Euclidean, 2);
    {
        SinkhornSolution s = solve_sinkhorn(p, p, self_cost, {0.5, 100000, 1e-10});
        CHECK(s.converged);
        CHECK(s.value <= 0.5 * std::log(20.0) + 1e-12);
    }
    {
        SinkhornSolution s = solve_sinkhorn(p, p, self_cost, {0.05, 20000, 1e-10});
        CHECK(s.value <= 0.05 * std::log(20.0) + 1e-12);
        CHECK(s.row_residual <= 1e-12);
        CHECK(s.col_residual <= 1e-6);
        CHECK(s.iterations == 20000); // cap reached and reported, not hidden
    }

    double median_scale = cost.mean();
    double previous_gap = std::numeric_limits<double>::infinity();
    for (double factor : {0.5, 0.1, 0.02}) {
        SinkhornSolution s = solve_sinkhorn(p, q, cost, {factor * median_scale, 200000, 1e-10});
        CHECK(s.converged);
        CHECK(s.value >= exact - 1e-9); // feasible plan cost brackets the optimum
        double gap = s.value - exact;
        CHECK(gap <= previous_gap + 1e-9);
        previous_gap = gap;
        CHECK(s.coupling.max_marginal_residual(p, q) <= 1e-8);
    }
}

TEST_CASE("sinkhorn non-convergence is flagged, not hidden") {
    Rng rng(17);
    EmpiricalDistribution a = random_cloud(12, 2, rng);
    EmpiricalDistribution b = random_cloud(12, 2, rng);
    Eigen::MatrixXd cost = cost_matrix(a, b, GroundNorm::Euclidean, 2);
    SinkhornSolution s = solve_sinkhorn(a, b, cost, {1e-4, 3, 1e-12});
    CHECK(!s.converged);
    CHECK(s.iterations == 3);
}

TEST_CASE("barycentric images stay inside the target bounding box") {
    // Non-uniform unequal-size marginals force mass splitting; every image
    // is a convex combination of target points.
    Rng rng(61);
    Eigen::MatrixXd src(6, 2), dst(9, 2);
    Eigen::VectorXd sw(6), dw(9);
    for (int i = 0; i < 6; ++i) {
        src.row(i) << rng.normal(), rng.normal();
        sw[i] = rng.uniform(0.2, 1.0);
    }
    for (int j = 0; j < 9; ++j) {
        dst.row(j) << rng.normal(), rng.normal();
        dw[j] = rng.uniform(0.2, 1.0);
    }
    EmpiricalDistribution p(src, sw);
    EmpiricalDistribution q(dst, dw);
    ExactSolution solution = solve_exact(p, q, cost_matrix(p, q, GroundNorm::Euclidean, 2));
    TransportMap map = extract_map(solution.coupling, p, q);
    CHECK(!map.is_permutation);
    for (int c = 0; c < 2; ++c) {
        double lo = q.points().col(c).minCoeff(), hi = q.points().col(c).maxCoeff();
        for (int i = 0; i < p.size(); ++i) {
            CHECK(map.images(i, c) >= lo - 1e-12);
            CHECK(map.images(i, c) <= hi + 1e-12);
        }
    }
}

TEST_CASE("wasserstein rejects unsupported orders") {
    EmpiricalDistribution p = cloud_1d({0.0});
    CHECK_THROWS_AS(wasserstein(p, p, 3), InvalidInput);
    CHECK_THROWS_AS(wasserstein(p, p, 0), InvalidInput);
}

TEST_CASE("extract_map rejects a coupling with an empty source row") {
    EmpiricalDistribution p = cloud_1d({0.0, 1.0});
    EmpiricalDistribution q = cloud_1d({0.0, 1.0});
    Coupling c;
    c.source_size = 2;
    c.target_size = 2;
    c.entries = {{0, 0, 1.0}}; // row 1 carries nothing
    CHECK_THROWS_AS(extract_map(c, p, q), InvalidInput);
}

TEST_CASE("deterministic resolution of non-unique optima") {
    // Unit square: both diagonal matchings cost the same; the fixed pivot
    // order must pick the same one every run.
    Eigen::MatrixXd a(2, 2), b(2, 2);
    a << 0, 0, 1, 1;
    b << 1, 0, 0, 1;
    EmpiricalDistribution p = EmpiricalDistribution::uniform(a);
    EmpiricalDistribution q = EmpiricalDistribution::uniform(b);
    Eigen::MatrixXd cost = cost_matrix(p, q, GroundNorm::Euclidean, 2);
    ExactSolution first = solve_exact(p, q, cost);
    for (int rep = 0; rep < 3; ++rep) {
        ExactSolution again = solve_exact(p, q, cost);
        REQUIRE(again.coupling.entries.size() == first.coupling.entries.size());
        for (std::size_t e = 0; e < first.coupling.entries.size(); ++e) {
            CHECK(again.coupling.entries[e].source == first.coupling.entries[e].source);
            CHECK(again.coupling.entries[e].target == first.coupling.entries[e].target);
            CHECK(again.coupling.entries[e].mass == first.coupling.entries[e].mass);
        }
    }
}
