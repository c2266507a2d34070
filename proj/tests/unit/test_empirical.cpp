#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include <distlab/empirical.hpp>
#include <distlab/errors.hpp>

using namespace distlab;

namespace {

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

} // namespace

TEST_CASE("weights normalize and near-zero atoms are dropped") {
    Eigen::MatrixXd pts(3, 2);
    pts << 0, 0, 1, 0, 2, 0;
    Eigen::VectorXd w(3);
    w << 2.0, 2.0, 1e-18;
    EmpiricalDistribution d(pts, w);
    CHECK(d.size() == 2);
    CHECK(d.weights().sum() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(d.weight(0) == doctest::Approx(0.5));
}

TEST_CASE("invalid inputs are rejected") {
    Eigen::MatrixXd pts(1, 1);
    pts << 0.5;
    Eigen::VectorXd w(1);
    w << -1.0;
    CHECK_THROWS_AS(EmpiricalDistribution(pts, w), InvalidInput);
    pts(0, 0) = std::numeric_limits<double>::quiet_NaN();
    w(0) = 1.0;
    CHECK_THROWS_AS(EmpiricalDistribution(pts, w), InvalidInput);
    CHECK_THROWS_AS(EmpiricalDistribution(Eigen::MatrixXd(0, 2), Eigen::VectorXd(0)), InvalidInput);
}

TEST_CASE("point-cloud csv round trip, weight column optional") {
    Eigen::MatrixXd pts(2, 2);
    pts << 0.1, -0.25, 3.0, 4.0;
    EmpiricalDistribution d = EmpiricalDistribution::uniform(pts);
    std::string path = temp_path("distlab_cloud.csv");
    save_point_cloud_csv(d, path);
    EmpiricalDistribution back = load_point_cloud_csv(path);
    CHECK(back.size() == 2);
    CHECK(back.points() == d.points());
    CHECK(back.weights() == d.weights());
    std::remove(path.c_str());

    std::string no_weight = temp_path("distlab_cloud_nw.csv");
    {
        FILE* f = std::fopen(no_weight.c_str(), "w");
        std::fputs("x1,x2\n1,2\n3,4\n", f);
        std::fclose(f);
    }
    EmpiricalDistribution uniform = load_point_cloud_csv(no_weight);
    CHECK(uniform.weight(0) == doctest::Approx(0.5));
    std::remove(no_weight.c_str());
}

TEST_CASE("malformed point-cloud files carry diagnostics") {
    std::string path = temp_path("distlab_bad_cloud.csv");
    {
        FILE* f = std::fopen(path.c_str(), "w");
        std::fputs("x1,weight\n1,0.5\noops,0.5\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_WITH_AS(load_point_cloud_csv(path),
                         doctest::Contains(":3"), InvalidInput);
    std::remove(path.c_str());
}
