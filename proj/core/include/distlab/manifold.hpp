#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "distlab/empirical.hpp"

namespace distlab {

enum class ChartId { Segment, Arc, Circle, TorusCurve, FlatPatch };

std::string chart_name(ChartId id);
ChartId chart_from_name(const std::string& name);

/// Parametric embedded k-submanifold of R^n with an injective chart over a
/// parameter box, plus an ambient translation offset. All charts except the
/// torus curve have closed-form point-to-manifold distance; the torus curve
/// falls back to a dense parameter scan with local refinement and its tests
/// carry the extra slack that implies.
class ManifoldSpec {
public:
    ManifoldSpec(ChartId chart, std::map<std::string, double> params);

    static ManifoldSpec segment(const Eigen::VectorXd& a, const Eigen::VectorXd& b);
    static ManifoldSpec circle(double cx, double cy, double r);
    static ManifoldSpec arc(double cx, double cy, double r, double theta0, double theta1);
    static ManifoldSpec flat_patch(const Eigen::VectorXd& origin,
                                   const Eigen::VectorXd& edge_u,
                                   const Eigen::VectorXd& edge_v);
    static ManifoldSpec torus_curve(double major_r, double minor_r, int windings);

    ChartId chart() const { return chart_; }
    const std::map<std::string, double>& params() const { return params_; }
    int k() const { return k_; }
    int n() const { return n_; }
    const Eigen::VectorXd& offset() const { return offset_; }
    bool periodic() const;

    /// Parameter box, one (lo, hi) per intrinsic dimension.
    std::vector<std::pair<double, double>> domain() const;

    /// Chart map (offset included).
    Eigen::VectorXd point_at(const Eigen::VectorXd& param) const;

    /// Local k-volume scaling |J| of the chart at the given parameter.
    double metric_factor(const Eigen::VectorXd& param) const;

    /// Ambient distance from x to the manifold.
    double distance_to(const Eigen::VectorXd& x) const;

    /// Total k-measure (length or area) of the chart image.
    double measure() const;

    ManifoldSpec translated(const Eigen::VectorXd& t) const;

    /// Flat key = value block used inside experiment config files.
    std::string serialize() const;
    static ManifoldSpec parse(const std::map<std::string, std::string>& fields);

private:
    void validate();
    Eigen::VectorXd chart_point(const Eigen::VectorXd& param) const;

    ChartId chart_;
    std::map<std::string, double> params_;
    Eigen::VectorXd offset_;
    int k_ = 0, n_ = 0;

    // Torus-curve scan table, filled eagerly at construction so distance
    // queries stay const and safely shareable across threads. Offsets are
    // subtracted before lookup, so translation leaves the table valid.
    std::vector<Eigen::VectorXd> dense_points_;
};

struct OverlapReport {
    double overlap_estimate = 0.0; // k-measure units
    double resolution = 0.0;       // parameter-space cell size
    long shared_cells = 0;
    double tau = 0.0;
};

struct MixtureMode {
    Eigen::VectorXd location; // parameter-space coordinates (k entries)
    double weight = 1.0;
    double spread = 0.1; // parameter-space standard deviation
};

struct SampleDensity {
    enum class Kind { Uniform, Mixture };
    Kind kind = Kind::Uniform;
    std::vector<MixtureMode> modes;

    static SampleDensity uniform() { return {}; }
    static SampleDensity mixture(std::vector<MixtureMode> modes);
};

/// N draws on the chart image; uniform weights. Uniform density is uniform
/// in the chart parameter (which coincides with arclength/area density for
/// the constant-speed charts).
EmpiricalDistribution sample_manifold(const ManifoldSpec& m,
                                      int count,
                                      const SampleDensity& density,
                                      std::uint64_t seed);

/// Cell-count estimate of the k-measure of the near-intersection: a's
/// parameter domain is tiled at `resolution`, and a cell is shared when its
/// image point lies within `tau` of b. Requires tau >= resolution / 10.
OverlapReport overlap_measure(const ManifoldSpec& a,
                              const ManifoldSpec& b,
                              double resolution,
                              double tau);

/// Default ambient proximity tolerance for a given discretization.
inline double default_overlap_tau(double resolution) { return 10.0 * resolution; }

/// Cells of a's discretized parameter domain that touch the domain boundary
/// (zero for periodic charts). Scales the positive-alignment threshold.
long boundary_cell_count(const ManifoldSpec& a, double resolution);

/// Stable numerical surrogate for a positive-measure support intersection:
/// the overlap estimate must exceed 10 * tau * (boundary cell count), so
/// incidental proximity at the rims cannot masquerade as alignment.
bool positively_aligned(const ManifoldSpec& a,
                        const ManifoldSpec& b,
                        double resolution,
                        double tau);

/// Uniform draw from the delta-ball in the pair's ambient space. Callers
/// verify transversality of the translated pair empirically (via
/// overlap_measure refinement) and redraw on the measure-zero failure set.
Eigen::VectorXd sample_transversal_offset(double delta,
                                          const ManifoldSpec& a,
                                          const ManifoldSpec& b,
                                          std::uint64_t seed);

enum class PerturbationClass { OnManifold, OffManifold };

/// Classify x + eps relative to the manifold: on-manifold iff its distance
/// is within tol. x itself must lie on the manifold (within 1e-9).
PerturbationClass classify_perturbation(const ManifoldSpec& m,
                                        const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& eps,
                                        double tol);

} // namespace distlab
