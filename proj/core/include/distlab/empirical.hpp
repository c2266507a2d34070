#pragma once

#include <string>

#include <Eigen/Dense>

namespace distlab {

/// Weighted point cloud in R^n: the discrete stand-in for the real and
/// generated distributions. Weights are normalized to sum to one on
/// construction; atoms lighter than 1e-15 are dropped before normalizing
/// so downstream barycentric projections never divide by ~zero.
class EmpiricalDistribution {
public:
    EmpiricalDistribution(Eigen::MatrixXd points, Eigen::VectorXd weights);

    /// Uniform weights 1/N.
    static EmpiricalDistribution uniform(Eigen::MatrixXd points);

    int size() const { return static_cast<int>(points_.rows()); }
    int dim() const { return static_cast<int>(points_.cols()); }

    const Eigen::MatrixXd& points() const { return points_; }
    const Eigen::VectorXd& weights() const { return weights_; }

    Eigen::RowVectorXd point(int i) const { return points_.row(i); }
    double weight(int i) const { return weights_[i]; }

    bool is_uniform(double tol = 1e-12) const;

    EmpiricalDistribution translated(const Eigen::VectorXd& t) const;

private:
    Eigen::MatrixXd points_;
    Eigen::VectorXd weights_;
};

/// Point-cloud CSV: header `x1,...,xn,weight`; the weight column is
/// optional (uniform weights assumed when absent).
EmpiricalDistribution load_point_cloud_csv(const std::string& path);
void save_point_cloud_csv(const EmpiricalDistribution& dist, const std::string& path);

} // namespace distlab
