#pragma once

#include <string>
#include <utility>
#include <vector>

#include "distlab/empirical.hpp"

namespace distlab {

/// Axis-aligned histogram density on a box in R^d, d in {1,2,3}. Cell masses
/// are nonnegative and sum to one within 1e-12; densities are masses divided
/// by the (common) cell volume. Storage is row-major with the last axis
/// fastest.
class GridDensity {
public:
    GridDensity(std::vector<std::pair<double, double>> box,
                std::vector<int> shape,
                std::vector<double> masses);

    int dim() const { return static_cast<int>(shape_.size()); }
    const std::vector<std::pair<double, double>>& box() const { return box_; }
    const std::vector<int>& shape() const { return shape_; }
    const std::vector<double>& masses() const { return masses_; }
    double mass(std::size_t flat) const { return masses_[flat]; }
    std::size_t cell_count() const { return masses_.size(); }
    double cell_volume() const { return cell_volume_; }
    double cell_width(int axis) const;

    std::vector<double> cell_center(std::size_t flat) const;
    bool same_grid(const GridDensity& other) const;

    static GridDensity load_csv(const std::string& path);
    void save_csv(const std::string& path) const;

private:
    std::vector<std::pair<double, double>> box_;
    std::vector<int> shape_;
    std::vector<double> masses_;
    double cell_volume_ = 0.0;
};

/// Bin a weighted point cloud. Every sample must land inside the box
/// (closed on both ends; upper-edge points fall in the last cell).
GridDensity histogram(const EmpiricalDistribution& samples,
                      const std::vector<std::pair<double, double>>& box,
                      const std::vector<int>& shape);

/// Discrete Gaussian convolution (full-width separable kernel), renormalized
/// to total mass one. Output masses are strictly positive everywhere, which
/// equalizes supports for the density-based losses.
GridDensity smooth(const GridDensity& grid, double sigma);

} // namespace distlab
