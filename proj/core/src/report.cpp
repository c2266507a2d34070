#include "distlab/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "distlab/errors.hpp"
#include "distlab/numeric.hpp"

namespace distlab {

void ResultTable::add_row(std::vector<double> row) {
    if (row.size() != columns.size())
        throw InvalidInput("ResultTable: row width " + std::to_string(row.size()) + " != " +
                           std::to_string(columns.size()) + " columns");
    rows.push_back(std::move(row));
}

int ResultTable::column_index(const std::string& name) const {
    auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw InvalidInput("ResultTable: no column named '" + name + "'");
    return static_cast<int>(it - columns.begin());
}

std::vector<double> ResultTable::column(const std::string& name) const {
    int idx = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(row[static_cast<std::size_t>(idx)]);
    return out;
}

bool ExperimentReport::all_pass() const {
    return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

namespace {

std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string provenance_line(const ExperimentReport& report) {
    std::ostringstream out;
    out << "# experiment=" << report.experiment_id << " config_hash=" << hash_hex(report.config_hash)
        << " seeds=";
    for (std::size_t i = 0; i < report.seeds.size(); ++i) {
        if (i) out << ";";
        out << report.seeds[i];
    }
    return out.str();
}

} // namespace

void write_report_csv(const ExperimentReport& report, const std::string& directory) {
    std::filesystem::create_directories(directory);
    const std::string table_path = directory + "/" + report.experiment_id + "_table.csv";
    const std::string verdict_path = directory + "/" + report.experiment_id + "_verdicts.csv";

    {
        std::ofstream out(table_path);
        if (!out) throw InvalidInput("cannot write report table: " + table_path);
        out << provenance_line(report) << "\n";
        for (std::size_t c = 0; c < report.table.columns.size(); ++c) {
            if (c) out << ",";
            out << report.table.columns[c];
        }
        out << "\n";
        for (const auto& row : report.table.rows) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out << ",";
                out << format_double(row[c]);
            }
            out << "\n";
        }
        if (!out) throw InvalidInput("write failed: " + table_path);
    }
    {
        std::ofstream out(verdict_path);
        if (!out) throw InvalidInput("cannot write report verdicts: " + verdict_path);
        out << provenance_line(report) << "\n";
        out << "verdict,pass,tolerance,details\n";
        for (const Verdict& v : report.verdicts) {
            std::string details = v.details;
            std::replace(details.begin(), details.end(), ',', ';');
            out << v.name << "," << (v.pass ? "1" : "0") << "," << format_double(v.tolerance) << ","
                << details << "\n";
        }
        if (!out) throw InvalidInput("write failed: " + verdict_path);
    }
}

ResultTable read_table_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open table: " + path);
    ResultTable table;
    std::string line;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (!header_seen) {
            table.columns = fields;
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (const std::string& f : fields) {
            char* end = nullptr;
            double v = std::strtod(f.c_str(), &end);
            if (end == f.c_str())
                throw InvalidInput(path + ":" + std::to_string(lineno) + ": bad value '" + f + "'");
            row.push_back(v);
        }
        table.add_row(std::move(row));
    }
    return table;
}

namespace {

struct AxisScale {
    double lo = 0.0, hi = 1.0;
    double to_pixel(double v, double pixel_lo, double pixel_hi) const {
        double t = hi > lo ? (v - lo) / (hi - lo) : 0.5;
        return pixel_lo + t * (pixel_hi - pixel_lo);
    }
};

AxisScale fit_axis(const std::vector<double>& values) {
    AxisScale s;
    bool any = false;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        if (!any) {
            s.lo = s.hi = v;
            any = true;
        } else {
            s.lo = std::min(s.lo, v);
            s.hi = std::max(s.hi, v);
        }
    }
    if (!any) return s;
    if (s.hi == s.lo) {
        s.lo -= 0.5;
        s.hi += 0.5;
    }
    double pad = 0.05 * (s.hi - s.lo);
    s.lo -= pad;
    s.hi += pad;
    return s;
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

} // namespace

void write_report_svg(const ExperimentReport& report,
                      const std::string& directory,
                      const std::string& x_column,
                      const std::vector<std::string>& y_columns) {
    std::filesystem::create_directories(directory);
    const std::string path = directory + "/" + report.experiment_id + ".svg";

    const double width = 720, height = 480;
    const double left = 70, right = width - 30, top = 40, bottom = height - 50;

    std::vector<double> xs = report.table.column(x_column);
    AxisScale x_scale = fit_axis(xs);
    std::vector<std::vector<double>> series;
    AxisScale y_scale;
    {
        std::vector<double> pool;
        for (const std::string& name : y_columns) {
            series.push_back(report.table.column(name));
            pool.insert(pool.end(), series.back().begin(), series.back().end());
        }
        y_scale = fit_axis(pool);
    }

    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write SVG: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
        << report.experiment_id << " (config " << hash_hex(report.config_hash) << ")</text>\n";

    // Axes with min/max tick labels.
    out << "<line x1=\"" << left << "\" y1=\"" << bottom << "\" x2=\"" << right << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << bottom
        << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << (left + right) / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"12\">" << x_column << "</text>\n";
    out << "<text x=\"18\" y=\"" << (top + bottom) / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
        << "transform=\"rotate(-90 18 " << (top + bottom) / 2 << ")\">value</text>\n";
    out << "<text x=\"" << left << "\" y=\"" << bottom + 16 << "\" font-size=\"10\">"
        << format_double(x_scale.lo) << "</text>\n";
    out << "<text x=\"" << right << "\" y=\"" << bottom + 16 << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_double(x_scale.hi) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << bottom << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_double(y_scale.lo) << "</text>\n";
    out << "<text x=\"" << left - 4 << "\" y=\"" << top + 4 << "\" text-anchor=\"end\" font-size=\"10\">"
        << format_double(y_scale.hi) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kSeriesColors[s % 6];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(series[s][i])) continue;
            out << x_scale.to_pixel(xs[i], left, right) << ","
                << y_scale.to_pixel(series[s][i], bottom, top) << " ";
        }
        out << "\"/>\n";
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!std::isfinite(xs[i]) || !std::isfinite(series[s][i])) continue;
            out << "<circle cx=\"" << x_scale.to_pixel(xs[i], left, right) << "\" cy=\""
                << y_scale.to_pixel(series[s][i], bottom, top) << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
        }
        out << "<text x=\"" << right - 8 << "\" y=\"" << top + 16 + 14 * static_cast<double>(s)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << y_columns[s]
            << "</text>\n";
    }
    out << "</svg>\n";
    if (!out) throw InvalidInput("write failed: " + path);
}

} // namespace distlab
