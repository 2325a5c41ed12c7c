#ifndef FLR_CSV_HPP
#define FLR_CSV_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "flr/grid.hpp"
#include "flr/simlab.hpp"

namespace flr::csv {

/// Rectangular numeric CSV; throws CsvError (with the 1-based line number)
/// on non-numeric fields or ragged rows. Blank lines are skipped; an
/// optional non-numeric first line is treated as a header.
Eigen::MatrixXd read_matrix(const std::filesystem::path& path);

/// One curve per row; grid inferred from the column count.
std::vector<GridFunction> read_curves(const std::filesystem::path& path);

/// Single-column (or single-row) numeric CSV.
Eigen::VectorXd read_vector(const std::filesystem::path& path);

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::string& header = "");

void write_row(const std::filesystem::path& path, const Eigen::VectorXd& v);

void write_mc_table(const std::filesystem::path& path, const McTable& table);

McTable read_mc_table(const std::filesystem::path& path);

/// Plain-text key=value form of a single lower-bound report.
void write_lower_bound_report(const std::filesystem::path& path,
                              const LowerBoundReport& report);

/// Formats a double with enough digits to round-trip to 1e-12 relative.
std::string format(double value);

}  // namespace flr::csv

#endif  // FLR_CSV_HPP
