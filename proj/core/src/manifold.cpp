#include "distlab/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"
#include "distlab/rng.hpp"

namespace distlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kTorusScanPoints = 4096;

double get_param(const std::map<std::string, double>& params, const std::string& key) {
    auto it = params.find(key);
    if (it == params.end()) throw InvalidInput("ManifoldSpec: missing parameter '" + key + "'");
    return it->second;
}

double wrap_angle(double theta, double base) {
    double t = std::fmod(theta - base, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    return base + t;
}

} // namespace

std::string chart_name(ChartId id) {
    switch (id) {
        case ChartId::Segment: return "segment";
        case ChartId::Arc: return "arc";
        case ChartId::Circle: return "circle";
        case ChartId::TorusCurve: return "torus_knotless_curve";
        case ChartId::FlatPatch: return "flat_patch";
    }
    throw InvalidInput("chart_name: unknown chart");
}

ChartId chart_from_name(const std::string& name) {
    if (name == "segment") return ChartId::Segment;
    if (name == "arc") return ChartId::Arc;
    if (name == "circle") return ChartId::Circle;
    if (name == "torus_knotless_curve") return ChartId::TorusCurve;
    if (name == "flat_patch") return ChartId::FlatPatch;
    throw InvalidInput("unknown chart_id '" + name + "'");
}

ManifoldSpec::ManifoldSpec(ChartId chart, std::map<std::string, double> params)
    : chart_(chart), params_(std::move(params)) {
    validate();
}

void ManifoldSpec::validate() {
    switch (chart_) {
        case ChartId::Segment: {
            n_ = params_.count("a3") ? 3 : 2;
            k_ = 1;
            Eigen::VectorXd a(n_), b(n_);
            for (int c = 0; c < n_; ++c) {
                a[c] = get_param(params_, "a" + std::to_string(c + 1));
                b[c] = get_param(params_, "b" + std::to_string(c + 1));
            }
            if ((b - a).norm() <= 0.0) throw InvalidInput("segment: endpoints coincide");
            break;
        }
        case ChartId::Circle: {
            n_ = 2;
            k_ = 1;
            get_param(params_, "c1");
            get_param(params_, "c2");
            if (get_param(params_, "r") <= 0.0) throw InvalidInput("circle: radius must be > 0");
            break;
        }
        case ChartId::Arc: {
            n_ = 2;
            k_ = 1;
            get_param(params_, "c1");
            get_param(params_, "c2");
            if (get_param(params_, "r") <= 0.0) throw InvalidInput("arc: radius must be > 0");
            double t0 = get_param(params_, "theta0");
            double t1 = get_param(params_, "theta1");
            if (!(t1 > t0) || t1 - t0 > kTwoPi)
                throw InvalidInput("arc: need theta0 < theta1 <= theta0 + 2*pi");
            break;
        }
        case ChartId::FlatPatch: {
            n_ = params_.count("o3") ? 3 : 2;
            k_ = 2;
            Eigen::VectorXd u(n_), v(n_);
            for (int c = 0; c < n_; ++c) {
                get_param(params_, "o" + std::to_string(c + 1));
                u[c] = get_param(params_, "u" + std::to_string(c + 1));
                v[c] = get_param(params_, "v" + std::to_string(c + 1));
            }
            if (u.norm() <= 0.0 || v.norm() <= 0.0) throw InvalidInput("flat_patch: degenerate edge");
            if (std::abs(u.dot(v)) > 1e-9 * u.norm() * v.norm())
                throw InvalidInput("flat_patch: edges must be orthogonal");
            break;
        }
        case ChartId::TorusCurve: {
            n_ = 3;
            k_ = 1;
            double big = get_param(params_, "major_r");
            double small = get_param(params_, "minor_r");
            double w = get_param(params_, "windings");
            if (big <= 0.0 || small <= 0.0 || small >= big)
                throw InvalidInput("torus_knotless_curve: need 0 < minor_r < major_r");
            if (w < 0.0 || w != std::floor(w))
                throw InvalidInput("torus_knotless_curve: windings must be a nonnegative integer");
            break;
        }
    }
    if (offset_.size() == 0) offset_ = Eigen::VectorXd::Zero(n_);
    if (chart_ == ChartId::TorusCurve && dense_points_.empty()) {
        dense_points_.reserve(kTorusScanPoints);
        for (int i = 0; i < kTorusScanPoints; ++i) {
            Eigen::VectorXd t(1);
            t[0] = kTwoPi * i / kTorusScanPoints;
            dense_points_.push_back(chart_point(t));
        }
    }
}

ManifoldSpec ManifoldSpec::segment(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size() || (a.size() != 2 && a.size() != 3))
        throw InvalidInput("segment: endpoints must both be in R^2 or R^3");
    std::map<std::string, double> p;
    for (int c = 0; c < a.size(); ++c) {
        p["a" + std::to_string(c + 1)] = a[c];
        p["b" + std::to_string(c + 1)] = b[c];
    }
    return ManifoldSpec(ChartId::Segment, std::move(p));
}

ManifoldSpec ManifoldSpec::circle(double cx, double cy, double r) {
    return ManifoldSpec(ChartId::Circle, {{"c1", cx}, {"c2", cy}, {"r", r}});
}

ManifoldSpec ManifoldSpec::arc(double cx, double cy, double r, double theta0, double theta1) {
    return ManifoldSpec(ChartId::Arc,
                        {{"c1", cx}, {"c2", cy}, {"r", r}, {"theta0", theta0}, {"theta1", theta1}});
}

ManifoldSpec ManifoldSpec::flat_patch(const Eigen::VectorXd& origin,
                                      const Eigen::VectorXd& edge_u,
                                      const Eigen::VectorXd& edge_v) {
    if (origin.size() != edge_u.size() || origin.size() != edge_v.size())
        throw InvalidInput("flat_patch: dimension mismatch");
    std::map<std::string, double> p;
    for (int c = 0; c < origin.size(); ++c) {
        p["o" + std::to_string(c + 1)] = origin[c];
        p["u" + std::to_string(c + 1)] = edge_u[c];
        p["v" + std::to_string(c + 1)] = edge_v[c];
    }
    return ManifoldSpec(ChartId::FlatPatch, std::move(p));
}

ManifoldSpec ManifoldSpec::torus_curve(double major_r, double minor_r, int windings) {
    return ManifoldSpec(ChartId::TorusCurve, {{"major_r", major_r},
                                              {"minor_r", minor_r},
                                              {"windings", static_cast<double>(windings)}});
}

bool ManifoldSpec::periodic() const {
    return chart_ == ChartId::Circle || chart_ == ChartId::TorusCurve;
}

std::vector<std::pair<double, double>> ManifoldSpec::domain() const {
    switch (chart_) {
        case ChartId::Segment: return {{0.0, 1.0}};
        case ChartId::Circle: return {{0.0, kTwoPi}};
        case ChartId::Arc: return {{get_param(params_, "theta0"), get_param(params_, "theta1")}};
        case ChartId::FlatPatch: return {{0.0, 1.0}, {0.0, 1.0}};
        case ChartId::TorusCurve: return {{0.0, kTwoPi}};
    }
    throw InvalidInput("domain: unknown chart");
}

Eigen::VectorXd ManifoldSpec::chart_point(const Eigen::VectorXd& param) const {
    if (param.size() != k_) throw InvalidInput("point_at: parameter rank mismatch");
    Eigen::VectorXd x(n_);
    switch (chart_) {
        case ChartId::Segment: {
            for (int c = 0; c < n_; ++c) {
                double a = get_param(params_, "a" + std::to_string(c + 1));
                double b = get_param(params_, "b" + std::to_string(c + 1));
                x[c] = a + param[0] * (b - a);
            }
            break;
        }
        case ChartId::Circle:
        case ChartId::Arc: {
            double r = get_param(params_, "r");
            x[0] = get_param(params_, "c1") + r * std::cos(param[0]);
            x[1] = get_param(params_, "c2") + r * std::sin(param[0]);
            break;
        }
        case ChartId::FlatPatch: {
            for (int c = 0; c < n_; ++c) {
                double o = get_param(params_, "o" + std::to_string(c + 1));
                double u = get_param(params_, "u" + std::to_string(c + 1));
                double v = get_param(params_, "v" + std::to_string(c + 1));
                x[c] = o + param[0] * u + param[1] * v;
            }
            break;
        }
        case ChartId::TorusCurve: {
            double big = get_param(params_, "major_r");
            double small = get_param(params_, "minor_r");
            double w = get_param(params_, "windings");
            double t = param[0];
            double rho = big + small * std::cos(w * t);
            x[0] = rho * std::cos(t);
            x[1] = rho * std::sin(t);
            x[2] = small * std::sin(w * t);
            break;
        }
    }
    return x;
}

Eigen::VectorXd ManifoldSpec::point_at(const Eigen::VectorXd& param) const {
    return chart_point(param) + offset_;
}

double ManifoldSpec::metric_factor(const Eigen::VectorXd& param) const {
    switch (chart_) {
        case ChartId::Segment: {
            Eigen::VectorXd a(n_), b(n_);
            for (int c = 0; c < n_; ++c) {
                a[c] = get_param(params_, "a" + std::to_string(c + 1));
                b[c] = get_param(params_, "b" + std::to_string(c + 1));
            }
            return (b - a).norm();
        }
        case ChartId::Circle:
        case ChartId::Arc:
            return get_param(params_, "r");
        case ChartId::FlatPatch: {
            Eigen::VectorXd u(n_), v(n_);
            for (int c = 0; c < n_; ++c) {
                u[c] = get_param(params_, "u" + std::to_string(c + 1));
                v[c] = get_param(params_, "v" + std::to_string(c + 1));
            }
            return u.norm() * v.norm();
        }
        case ChartId::TorusCurve: {
            double big = get_param(params_, "major_r");
            double small = get_param(params_, "minor_r");
            double w = get_param(params_, "windings");
            double rho = big + small * std::cos(w * param[0]);
            return std::sqrt(rho * rho + small * small * w * w);
        }
    }
    throw InvalidInput("metric_factor: unknown chart");
}

double ManifoldSpec::distance_to(const Eigen::VectorXd& x) const {
    if (x.size() != n_) throw InvalidInput("distance_to: point dimension mismatch");
    Eigen::VectorXd y = x - offset_;
    switch (chart_) {
        case ChartId::Segment: {
            Eigen::VectorXd a(n_), b(n_);
            for (int c = 0; c < n_; ++c) {
                a[c] = get_param(params_, "a" + std::to_string(c + 1));
                b[c] = get_param(params_, "b" + std::to_string(c + 1));
            }
            Eigen::VectorXd d = b - a;
            double t = std::clamp((y - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
            return (y - (a + t * d)).norm();
        }
        case ChartId::Circle: {
            Eigen::Vector2d c(get_param(params_, "c1"), get_param(params_, "c2"));
            return std::abs((y.head<2>() - c).norm() - get_param(params_, "r"));
        }
        case ChartId::Arc: {
            Eigen::Vector2d c(get_param(params_, "c1"), get_param(params_, "c2"));
            double r = get_param(params_, "r");
            double t0 = get_param(params_, "theta0");
            double t1 = get_param(params_, "theta1");
            Eigen::Vector2d d = y.head<2>() - c;
            double radial = d.norm();
            double theta = wrap_angle(std::atan2(d[1], d[0]), t0);
            if (theta <= t1 && radial > 0.0) return std::abs(radial - r);
            Eigen::Vector2d e0 = c + r * Eigen::Vector2d(std::cos(t0), std::sin(t0));
            Eigen::Vector2d e1 = c + r * Eigen::Vector2d(std::cos(t1), std::sin(t1));
            return std::min((y.head<2>() - e0).norm(), (y.head<2>() - e1).norm());
        }
        case ChartId::FlatPatch: {
            Eigen::VectorXd o(n_), u(n_), v(n_);
            for (int c = 0; c < n_; ++c) {
                o[c] = get_param(params_, "o" + std::to_string(c + 1));
                u[c] = get_param(params_, "u" + std::to_string(c + 1));
                v[c] = get_param(params_, "v" + std::to_string(c + 1));
            }
            Eigen::VectorXd d = y - o;
            // Orthogonal edges: in-plane coordinates decouple and clamping
            // each one yields the exact nearest point of the rectangle.
            double pu = std::clamp(d.dot(u) / u.squaredNorm(), 0.0, 1.0);
            double pv = std::clamp(d.dot(v) / v.squaredNorm(), 0.0, 1.0);
            return (y - (o + pu * u + pv * v)).norm();
        }
        case ChartId::TorusCurve: {
            int best = 0;
            double best_d2 = (y - dense_points_[0]).squaredNorm();
            for (int i = 1; i < kTorusScanPoints; ++i) {
                double d2 = (y - dense_points_[static_cast<std::size_t>(i)]).squaredNorm();
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = i;
                }
            }
            // Ternary refinement on the bracketing interval.
            double step = kTwoPi / kTorusScanPoints;
            double lo = (best - 1) * step, hi = (best + 1) * step;
            auto d2_at = [&](double t) {
                Eigen::VectorXd p(1);
                p[0] = t;
                return (y - chart_point(p)).squaredNorm();
            };
            for (int it = 0; it < 90; ++it) {
                double m1 = lo + (hi - lo) / 3.0;
                double m2 = hi - (hi - lo) / 3.0;
                if (d2_at(m1) <= d2_at(m2))
                    hi = m2;
                else
                    lo = m1;
            }
            return std::sqrt(std::min(best_d2, d2_at(0.5 * (lo + hi))));
        }
    }
    throw InvalidInput("distance_to: unknown chart");
}

double ManifoldSpec::measure() const {
    switch (chart_) {
        case ChartId::Segment: {
            Eigen::VectorXd p(1);
            p[0] = 0.0;
            return metric_factor(p);
        }
        case ChartId::Circle: return kTwoPi * get_param(params_, "r");
        case ChartId::Arc:
            return (get_param(params_, "theta1") - get_param(params_, "theta0")) * get_param(params_, "r");
        case ChartId::FlatPatch: {
            Eigen::VectorXd p(2);
            p << 0.0, 0.0;
            return metric_factor(p);
        }
        case ChartId::TorusCurve: {
            // Composite Simpson over the period; the integrand is smooth so
            // this is exact to machine precision at this rule size.
            const int intervals = 4096;
            double h = kTwoPi / intervals;
            auto speed = [&](double t) {
                Eigen::VectorXd p(1);
                p[0] = t;
                return metric_factor(p);
            };
            double acc = speed(0.0) + speed(kTwoPi);
            for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * speed(i * h);
            return acc * h / 3.0;
        }
    }
    throw InvalidInput("measure: unknown chart");
}

ManifoldSpec ManifoldSpec::translated(const Eigen::VectorXd& t) const {
    if (t.size() != n_) throw InvalidInput("translated: vector dimension mismatch");
    if (!t.allFinite()) throw InvalidInput("translated: non-finite translation");
    ManifoldSpec moved = *this;
    moved.offset_ = offset_ + t;
    return moved;
}

std::string ManifoldSpec::serialize() const {
    std::ostringstream out;
    out << "chart_id = " << chart_name(chart_) << "\n";
    for (const auto& [key, value] : params_) out << key << " = " << format_double(value) << "\n";
    out << "k = " << k_ << "\n";
    out << "n = " << n_ << "\n";
    auto dom = domain();
    out << "domain = ";
    for (std::size_t a = 0; a < dom.size(); ++a) {
        if (a) out << ";";
        out << format_double(dom[a].first) << ":" << format_double(dom[a].second);
    }
    out << "\n";
    if (offset_.norm() > 0.0) {
        out << "offset = ";
        for (int c = 0; c < n_; ++c) {
            if (c) out << ",";
            out << format_double(offset_[c]);
        }
        out << "\n";
    }
    return out.str();
}

ManifoldSpec ManifoldSpec::parse(const std::map<std::string, std::string>& fields) {
    auto it = fields.find("chart_id");
    if (it == fields.end()) throw InvalidInput("ManifoldSpec::parse: missing chart_id");
    ChartId chart = chart_from_name(it->second);

    std::map<std::string, double> params;
    Eigen::VectorXd offset;
    for (const auto& [key, value] : fields) {
        if (key == "chart_id" || key == "k" || key == "n" || key == "domain") continue;
        if (key == "offset") {
            std::vector<double> parts;
            std::istringstream ss(value);
            std::string field;
            while (std::getline(ss, field, ',')) parts.push_back(std::strtod(field.c_str(), nullptr));
            offset = Eigen::Map<Eigen::VectorXd>(parts.data(), static_cast<Eigen::Index>(parts.size()));
            continue;
        }
        char* end = nullptr;
        double v = std::strtod(value.c_str(), &end);
        if (end == value.c_str()) throw InvalidInput("ManifoldSpec::parse: bad numeric value for '" + key + "'");
        params[key] = v;
    }
    ManifoldSpec spec(chart, std::move(params));
    if (offset.size() > 0) spec = spec.translated(offset);
    return spec;
}

SampleDensity SampleDensity::mixture(std::vector<MixtureMode> modes) {
    if (modes.empty()) throw InvalidInput("SampleDensity: mixture needs at least one mode");
    double total = 0.0;
    for (const MixtureMode& m : modes) {
        if (m.weight <= 0.0) throw InvalidInput("SampleDensity: mode weights must be positive");
        if (m.spread <= 0.0) throw InvalidInput("SampleDensity: mode spread must be positive");
        total += m.weight;
    }
    for (MixtureMode& m : modes) m.weight /= total;
    SampleDensity d;
    d.kind = Kind::Mixture;
    d.modes = std::move(modes);
    return d;
}

EmpiricalDistribution sample_manifold(const ManifoldSpec& m,
                                      int count,
                                      const SampleDensity& density,
                                      std::uint64_t seed) {
    if (count < 1) throw InvalidInput("sample_manifold: need at least one sample");
    auto dom = m.domain();
    Rng rng(seed);
    Eigen::MatrixXd points(count, m.n());
    Eigen::VectorXd param(m.k());

    for (int i = 0; i < count; ++i) {
        if (density.kind == SampleDensity::Kind::Uniform) {
            for (int a = 0; a < m.k(); ++a)
                param[a] = rng.uniform(dom[static_cast<std::size_t>(a)].first, dom[static_cast<std::size_t>(a)].second);
        } else {
            double pick = rng.uniform();
            std::size_t mode = 0;
            double cum = 0.0;
            for (std::size_t j = 0; j < density.modes.size(); ++j) {
                cum += density.modes[j].weight;
                if (pick < cum || j + 1 == density.modes.size()) {
                    mode = j;
                    break;
                }
            }
            const MixtureMode& mm = density.modes[mode];
            if (mm.location.size() != m.k())
                throw InvalidInput("sample_manifold: mode location rank mismatch");
            for (int a = 0; a < m.k(); ++a) {
                double lo = dom[static_cast<std::size_t>(a)].first;
                double hi = dom[static_cast<std::size_t>(a)].second;
                double v = mm.location[a] + mm.spread * rng.normal();
                if (m.periodic()) {
                    v = std::fmod(v - lo, hi - lo);
                    if (v < 0.0) v += hi - lo;
                    v += lo;
                } else {
                    v = std::clamp(v, lo, hi);
                }
                param[a] = v;
            }
        }
        points.row(i) = m.point_at(param).transpose();
    }
    return EmpiricalDistribution::uniform(std::move(points));
}

OverlapReport overlap_measure(const ManifoldSpec& a,
                              const ManifoldSpec& b,
                              double resolution,
                              double tau) {
    if (resolution <= 0.0) throw InvalidInput("overlap_measure: resolution must be > 0");
    if (tau < resolution / 10.0)
        throw InvalidInput("overlap_measure: tau " + format_double(tau) + " < resolution/10 (" +
                           format_double(resolution / 10.0) + "), intersection test undersampled");
    if (a.n() != b.n()) throw InvalidInput("overlap_measure: ambient dimension mismatch");

    auto dom = a.domain();
    std::vector<long> cells(dom.size());
    std::vector<double> widths(dom.size());
    long total_cells = 1;
    for (std::size_t axis = 0; axis < dom.size(); ++axis) {
        double span = dom[axis].second - dom[axis].first;
        cells[axis] = std::max<long>(1, static_cast<long>(std::ceil(span / resolution)));
        widths[axis] = span / static_cast<double>(cells[axis]);
        total_cells *= cells[axis];
    }

    OverlapReport report;
    report.resolution = resolution;
    report.tau = tau;

    Eigen::VectorXd param(a.k());
    NeumaierSum overlap;
    for (long flat = 0; flat < total_cells; ++flat) {
        long rem = flat;
        double cell_volume = 1.0;
        for (int axis = a.k() - 1; axis >= 0; --axis) {
            long idx = rem % cells[static_cast<std::size_t>(axis)];
            rem /= cells[static_cast<std::size_t>(axis)];
            param[axis] = dom[static_cast<std::size_t>(axis)].first +
                          (static_cast<double>(idx) + 0.5) * widths[static_cast<std::size_t>(axis)];
            cell_volume *= widths[static_cast<std::size_t>(axis)];
        }
        if (b.distance_to(a.point_at(param)) <= tau) {
            ++report.shared_cells;
            overlap.add(a.metric_factor(param) * cell_volume);
        }
    }
    report.overlap_estimate = overlap.value();
    return report;
}

long boundary_cell_count(const ManifoldSpec& a, double resolution) {
    if (a.periodic()) return 0;
    auto dom = a.domain();
    std::vector<long> cells(dom.size());
    for (std::size_t axis = 0; axis < dom.size(); ++axis) {
        double span = dom[axis].second - dom[axis].first;
        cells[axis] = std::max<long>(1, static_cast<long>(std::ceil(span / resolution)));
    }
    if (a.k() == 1) return std::min<long>(cells[0], 2);
    // Rectangular 2-D domain: the rim of the cell grid.
    long nx = cells[0], ny = cells[1];
    if (nx <= 2 || ny <= 2) return nx * ny;
    return 2 * (nx + ny) - 4;
}

bool positively_aligned(const ManifoldSpec& a,
                        const ManifoldSpec& b,
                        double resolution,
                        double tau) {
    OverlapReport report = overlap_measure(a, b, resolution, tau);
    // Curves: 10 tau per boundary cell. Surfaces: the rim artifact is a
    // tau-thick band along the boundary, so the count scales by the cell
    // width to keep the threshold a k-measure.
    double rim = static_cast<double>(boundary_cell_count(a, resolution));
    if (a.k() == 2) rim *= resolution;
    return report.overlap_estimate > 10.0 * tau * rim;
}

Eigen::VectorXd sample_transversal_offset(double delta,
                                          const ManifoldSpec& a,
                                          const ManifoldSpec& b,
                                          std::uint64_t seed) {
    if (delta <= 0.0) throw InvalidInput("sample_transversal_offset: delta must be > 0");
    if (a.n() != b.n()) throw InvalidInput("sample_transversal_offset: ambient dimension mismatch");
    Rng rng(seed);
    return rng.ball(a.n(), delta);
}

PerturbationClass classify_perturbation(const ManifoldSpec& m,
                                        const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& eps,
                                        double tol) {
    if (tol <= 0.0) throw InvalidInput("classify_perturbation: tol must be > 0");
    if (m.distance_to(x) > 1e-9)
        throw InvalidInput("classify_perturbation: base point is not on the manifold");
    if (eps.size() != x.size()) throw InvalidInput("classify_perturbation: perturbation dimension mismatch");
    return m.distance_to(x + eps) <= tol ? PerturbationClass::OnManifold : PerturbationClass::OffManifold;
}

} // namespace distlab
