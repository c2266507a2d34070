#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace distlab {

/// Rectangular table of named real columns.
struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    void add_row(std::vector<double> row);
    int column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

/// One asserted property with its pinned tolerance. `details` explains the
/// margin or the first violating row; verdicts are recomputed from the table
/// alone.
struct Verdict {
    std::string name;
    bool pass = false;
    double tolerance = 0.0;
    std::string details;
};

struct ExperimentReport {
    std::string experiment_id;
    ResultTable table;
    std::vector<Verdict> verdicts;
    std::uint64_t config_hash = 0;
    std::vector<std::uint64_t> seeds;

    bool all_pass() const;
};

/// Writes `<dir>/<id>_table.csv` and `<dir>/<id>_verdicts.csv`. Values use
/// shortest-round-trip formatting, so reloading is bit-exact and re-running
/// with equal seeds reproduces the bytes.
void write_report_csv(const ExperimentReport& report, const std::string& directory);

/// Optional line/scatter plot of selected columns against one x column.
void write_report_svg(const ExperimentReport& report,
                      const std::string& directory,
                      const std::string& x_column,
                      const std::vector<std::string>& y_columns);

/// Reload a table written by write_report_csv (comment lines skipped).
ResultTable read_table_csv(const std::string& path);

} // namespace distlab
