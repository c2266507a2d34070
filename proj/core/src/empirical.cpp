#include "distlab/empirical.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

namespace {
constexpr double kDropWeight = 1e-15;
}

EmpiricalDistribution::EmpiricalDistribution(Eigen::MatrixXd points, Eigen::VectorXd weights) {
    if (points.rows() == 0)
        throw InvalidInput("EmpiricalDistribution: need at least one atom");
    if (points.rows() != weights.size())
        throw InvalidInput("EmpiricalDistribution: points/weights size mismatch");
    if (!points.allFinite())
        throw InvalidInput("EmpiricalDistribution: non-finite coordinate");

    std::vector<int> keep;
    keep.reserve(static_cast<std::size_t>(weights.size()));
    for (int i = 0; i < weights.size(); ++i) {
        double w = weights[i];
        if (!std::isfinite(w) || w < 0.0)
            throw InvalidInput("EmpiricalDistribution: weight " + std::to_string(i) +
                               " is negative or non-finite");
        if (w >= kDropWeight) keep.push_back(i);
    }
    if (keep.empty())
        throw InvalidInput("EmpiricalDistribution: all weights are (near) zero");

    points_.resize(static_cast<Eigen::Index>(keep.size()), points.cols());
    weights_.resize(static_cast<Eigen::Index>(keep.size()));
    NeumaierSum total;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        points_.row(static_cast<Eigen::Index>(r)) = points.row(keep[r]);
        weights_[static_cast<Eigen::Index>(r)] = weights[keep[r]];
        total.add(weights[keep[r]]);
    }
    double sum = total.value();
    if (sum <= 0.0)
        throw InvalidInput("EmpiricalDistribution: total weight is zero");
    weights_ /= sum;
}

EmpiricalDistribution EmpiricalDistribution::uniform(Eigen::MatrixXd points) {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(points.rows(), 1.0 / static_cast<double>(points.rows()));
    return EmpiricalDistribution(std::move(points), std::move(w));
}

bool EmpiricalDistribution::is_uniform(double tol) const {
    double expect = 1.0 / static_cast<double>(size());
    return ((weights_.array() - expect).abs() <= tol).all();
}

EmpiricalDistribution EmpiricalDistribution::translated(const Eigen::VectorXd& t) const {
    if (t.size() != dim())
        throw InvalidInput("translated: vector dimension mismatch");
    Eigen::MatrixXd shifted = points_;
    shifted.rowwise() += t.transpose();
    return EmpiricalDistribution(std::move(shifted), weights_);
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    return out;
}

double parse_double_field(const std::string& s, const std::string& path, int lineno) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || (end && *end != '\0' && *end != '\r'))
        throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad numeric field '" + s + "'");
    return v;
}

} // namespace

EmpiricalDistribution load_point_cloud_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open point-cloud file: " + path);

    std::string header;
    if (!std::getline(in, header))
        throw InvalidInput(path + ": empty file");
    std::vector<std::string> cols = split_csv_line(header);
    if (!cols.empty() && !cols.back().empty() && cols.back().back() == '\r') cols.back().pop_back();

    bool has_weight = !cols.empty() && cols.back() == "weight";
    int dim = static_cast<int>(cols.size()) - (has_weight ? 1 : 0);
    if (dim < 1)
        throw InvalidInput(path + ": header must list coordinate columns x1,...,xn");
    for (int c = 0; c < dim; ++c) {
        if (cols[static_cast<std::size_t>(c)] != "x" + std::to_string(c + 1))
            throw InvalidInput(path + ": expected column 'x" + std::to_string(c + 1) +
                               "', found '" + cols[static_cast<std::size_t>(c)] + "'");
    }

    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::vector<std::string> fields = split_csv_line(line);
        if (static_cast<int>(fields.size()) != dim + (has_weight ? 1 : 0))
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(dim + (has_weight ? 1 : 0)) + " fields, found " +
                               std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) row.push_back(parse_double_field(f, path, lineno));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw InvalidInput(path + ": no data rows");

    Eigen::MatrixXd points(static_cast<Eigen::Index>(rows.size()), dim);
    Eigen::VectorXd weights(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int c = 0; c < dim; ++c) points(static_cast<Eigen::Index>(i), c) = rows[i][static_cast<std::size_t>(c)];
        weights[static_cast<Eigen::Index>(i)] =
            has_weight ? rows[i][static_cast<std::size_t>(dim)] : 1.0 / static_cast<double>(rows.size());
    }
    return EmpiricalDistribution(std::move(points), std::move(weights));
}

void save_point_cloud_csv(const EmpiricalDistribution& dist, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write point-cloud file: " + path);
    for (int c = 0; c < dist.dim(); ++c) out << "x" << (c + 1) << ",";
    out << "weight\n";
    for (int i = 0; i < dist.size(); ++i) {
        for (int c = 0; c < dist.dim(); ++c) out << format_double(dist.points()(i, c)) << ",";
        out << format_double(dist.weight(i)) << "\n";
    }
    if (!out) throw InvalidInput("write failed: " + path);
}

} // namespace distlab
