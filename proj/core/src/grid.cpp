#include "distlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

GridDensity::GridDensity(std::vector<std::pair<double, double>> box,
                         std::vector<int> shape,
                         std::vector<double> masses)
    : box_(std::move(box)), shape_(std::move(shape)), masses_(std::move(masses)) {
    if (box_.size() != shape_.size())
        throw InvalidInput("GridDensity: box/shape rank mismatch");
    if (box_.empty() || box_.size() > 3)
        throw InvalidInput("GridDensity: dimension must be 1, 2 or 3");

    std::size_t cells = 1;
    cell_volume_ = 1.0;
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (shape_[a] < 1) throw InvalidInput("GridDensity: axis " + std::to_string(a) + " has no cells");
        if (!(box_[a].second > box_[a].first))
            throw InvalidInput("GridDensity: axis " + std::to_string(a) + " box is empty");
        cells *= static_cast<std::size_t>(shape_[a]);
        cell_volume_ *= (box_[a].second - box_[a].first) / shape_[a];
    }
    if (masses_.size() != cells)
        throw InvalidInput("GridDensity: expected " + std::to_string(cells) + " masses, got " +
                           std::to_string(masses_.size()));

    NeumaierSum total;
    for (double m : masses_) {
        if (!(m >= 0.0) || !std::isfinite(m))
            throw InvalidInput("GridDensity: negative or non-finite cell mass");
        total.add(m);
    }
    double sum = total.value();
    if (sum <= 0.0) throw InvalidInput("GridDensity: total mass is zero");
    if (std::abs(sum - 1.0) > 1e-9)
        throw InvalidInput("GridDensity: masses sum to " + format_double(sum) + ", expected 1");
    // Snap the residual so the sum-to-one invariant holds to 1e-12.
    if (sum != 1.0)
        for (double& m : masses_) m /= sum;
}

double GridDensity::cell_width(int axis) const {
    return (box_[static_cast<std::size_t>(axis)].second - box_[static_cast<std::size_t>(axis)].first) /
           shape_[static_cast<std::size_t>(axis)];
}

std::vector<double> GridDensity::cell_center(std::size_t flat) const {
    std::vector<double> center(shape_.size());
    for (int a = dim() - 1; a >= 0; --a) {
        std::size_t extent = static_cast<std::size_t>(shape_[static_cast<std::size_t>(a)]);
        std::size_t idx = flat % extent;
        flat /= extent;
        center[static_cast<std::size_t>(a)] =
            box_[static_cast<std::size_t>(a)].first + (static_cast<double>(idx) + 0.5) * cell_width(a);
    }
    return center;
}

bool GridDensity::same_grid(const GridDensity& other) const {
    return box_ == other.box_ && shape_ == other.shape_;
}

GridDensity histogram(const EmpiricalDistribution& samples,
                      const std::vector<std::pair<double, double>>& box,
                      const std::vector<int>& shape) {
    if (static_cast<std::size_t>(samples.dim()) != box.size())
        throw InvalidInput("histogram: sample dimension does not match box rank");
    if (box.size() != shape.size())
        throw InvalidInput("histogram: box/shape rank mismatch");

    std::size_t cells = 1;
    for (int s : shape) cells *= static_cast<std::size_t>(s);
    std::vector<double> masses(cells, 0.0);

    for (int i = 0; i < samples.size(); ++i) {
        std::size_t flat = 0;
        for (std::size_t a = 0; a < box.size(); ++a) {
            double x = samples.points()(i, static_cast<Eigen::Index>(a));
            double lo = box[a].first, hi = box[a].second;
            if (x < lo || x > hi)
                throw InvalidInput("histogram: sample " + std::to_string(i) + " is outside the box on axis " +
                                   std::to_string(a) + " (value " + format_double(x) + ")");
            double w = (hi - lo) / shape[a];
            int idx = std::min(static_cast<int>((x - lo) / w), shape[a] - 1);
            flat = flat * static_cast<std::size_t>(shape[a]) + static_cast<std::size_t>(idx);
        }
        masses[flat] += samples.weight(i);
    }
    return GridDensity(box, shape, std::move(masses));
}

GridDensity smooth(const GridDensity& grid, double sigma) {
    if (!(sigma > 0.0)) throw InvalidInput("smooth: sigma must be > 0");

    std::vector<double> masses = grid.masses();
    const std::vector<int>& shape = grid.shape();
    const int d = grid.dim();

    // Cell counts per axis and the stride layout of the row-major array.
    std::vector<std::size_t> strides(static_cast<std::size_t>(d), 1);
    for (int a = d - 2; a >= 0; --a)
        strides[static_cast<std::size_t>(a)] =
            strides[static_cast<std::size_t>(a + 1)] * static_cast<std::size_t>(shape[static_cast<std::size_t>(a + 1)]);

    for (int axis = 0; axis < d; ++axis) {
        const int n = shape[static_cast<std::size_t>(axis)];
        const double h = grid.cell_width(axis);

        // Full-width kernel; exp underflow is floored at the smallest normal
        // so smoothed supports are strictly positive.
        std::vector<double> kernel(static_cast<std::size_t>(n));
        double ksum = 0.0;
        for (int off = 0; off < n; ++off) {
            double z = off * h / sigma;
            double k = std::exp(-0.5 * z * z);
            if (k < std::numeric_limits<double>::min()) k = std::numeric_limits<double>::min();
            kernel[static_cast<std::size_t>(off)] = k;
            ksum += (off == 0 ? 1.0 : 2.0) * k;
        }
        for (double& k : kernel) k /= ksum;

        const std::size_t stride = strides[static_cast<std::size_t>(axis)];
        std::vector<double> line(static_cast<std::size_t>(n));
        std::vector<double> out_line(static_cast<std::size_t>(n));

        // Convolve every 1-D line along `axis`.
        for (std::size_t base = 0; base < masses.size(); ++base) {
            if ((base / stride) % static_cast<std::size_t>(n) != 0) continue;
            for (int i = 0; i < n; ++i) line[static_cast<std::size_t>(i)] = masses[base + static_cast<std::size_t>(i) * stride];
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    acc += line[static_cast<std::size_t>(j)] * kernel[static_cast<std::size_t>(std::abs(i - j))];
                out_line[static_cast<std::size_t>(i)] = acc;
            }
            for (int i = 0; i < n; ++i) masses[base + static_cast<std::size_t>(i) * stride] = out_line[static_cast<std::size_t>(i)];
        }
    }

    double total = neumaier_total(masses);
    for (double& m : masses) m /= total;
    return GridDensity(grid.box(), shape, std::move(masses));
}

GridDensity GridDensity::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open grid file: " + path);

    std::string header;
    if (!std::getline(in, header)) throw InvalidInput(path + ": empty file");
    if (header.rfind("# box=", 0) != 0)
        throw InvalidInput(path + ":1: expected header '# box=lo1:hi1,...;shape=s1,...'");

    std::string body = header.substr(6);
    auto semi = body.find(";shape=");
    if (semi == std::string::npos)
        throw InvalidInput(path + ":1: header missing ';shape=' section");

    std::vector<std::pair<double, double>> box;
    {
        std::istringstream ss(body.substr(0, semi));
        std::string axis;
        while (std::getline(ss, axis, ',')) {
            auto colon = axis.find(':');
            if (colon == std::string::npos)
                throw InvalidInput(path + ":1: bad box axis '" + axis + "'");
            box.emplace_back(std::strtod(axis.substr(0, colon).c_str(), nullptr),
                             std::strtod(axis.substr(colon + 1).c_str(), nullptr));
        }
    }
    std::vector<int> shape;
    {
        std::istringstream ss(body.substr(semi + 7));
        std::string field;
        while (std::getline(ss, field, ',')) shape.push_back(std::atoi(field.c_str()));
    }

    std::vector<double> masses;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        char* end = nullptr;
        double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str())
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad mass value '" + line + "'");
        masses.push_back(v);
    }
    return GridDensity(std::move(box), std::move(shape), std::move(masses));
}

void GridDensity::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write grid file: " + path);
    out << "# box=";
    for (std::size_t a = 0; a < box_.size(); ++a) {
        if (a) out << ",";
        out << format_double(box_[a].first) << ":" << format_double(box_[a].second);
    }
    out << ";shape=";
    for (std::size_t a = 0; a < shape_.size(); ++a) {
        if (a) out << ",";
        out << shape_[a];
    }
    out << "\n";
    for (double m : masses_) out << format_double(m) << "\n";
    if (!out) throw InvalidInput("write failed: " + path);
}

} // namespace distlab
