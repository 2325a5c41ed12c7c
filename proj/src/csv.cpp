#include "flr/csv.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "flr/errors.hpp"

namespace flr::csv {

namespace {

bool parse_double(const std::string& field, double& out) {
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
  while (end > begin && (*(end - 1) == ' ' || *(end - 1) == '\t' || *(end - 1) == '\r'))
    --end;
  if (begin == end) return false;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::vector<double> parse_line(const std::string& line, std::size_t line_number,
                               bool* numeric_ok = nullptr) {
  std::vector<double> row;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    double value;
    if (!parse_double(field, value)) {
      if (numeric_ok) {
        *numeric_ok = false;
        return {};
      }
      throw CsvError("non-numeric field '" + field + "' at line " +
                         std::to_string(line_number),
                     line_number);
    }
    row.push_back(value);
  }
  if (numeric_ok) *numeric_ok = true;
  return row;
}

bool is_blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path.string(), 0);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_number = 0;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_number;
    if (is_blank(line)) continue;
    if (first_content_line) {
      first_content_line = false;
      bool numeric_ok = true;
      auto row = parse_line(line, line_number, &numeric_ok);
      if (!numeric_ok) continue;  // header line
      rows.push_back(std::move(row));
      continue;
    }
    rows.push_back(parse_line(line, line_number));
    if (rows.back().size() != rows.front().size())
      throw CsvError("row with " + std::to_string(rows.back().size()) +
                         " fields at line " + std::to_string(line_number) +
                         ", expected " + std::to_string(rows.front().size()),
                     line_number);
  }
  if (rows.empty()) throw CsvError("no data rows in " + path.string(), line_number);

  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

std::vector<GridFunction> read_curves(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.cols() < 2)
    throw CsvError("curves need at least 2 grid points, got " +
                       std::to_string(m.cols()),
                   1);
  const GridPtr grid = make_uniform_grid(static_cast<int>(m.cols()));
  std::vector<GridFunction> curves;
  curves.reserve(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    curves.emplace_back(grid, m.row(i).transpose());
  return curves;
}

Eigen::VectorXd read_vector(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw CsvError("expected a single row or column in " + path.string(), 1);
}

std::string format(double value) {
  std::ostringstream out;
  out << std::setprecision(15) << value;
  return out.str();
}

void write_matrix(const std::filesystem::path& path, const Eigen::MatrixXd& m,
                  const std::string& header) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string(), 0);
  if (!header.empty()) out << header << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format(m(i, j));
    }
    out << '\n';
  }
}

void write_row(const std::filesystem::path& path, const Eigen::VectorXd& v) {
  write_matrix(path, v.transpose());
}

void write_mc_table(const std::filesystem::path& path, const McTable& table) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string(), 0);
  out << "threshold,ase,mc_se,mise\n";
  for (const auto& row : table.rows)
    out << format(row.threshold) << ',' << format(row.ase) << ','
        << format(row.mc_se) << ',' << format(row.mise) << '\n';
}

void write_lower_bound_report(const std::filesystem::path& path,
                              const LowerBoundReport& report) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path.string(), 0);
  out << "n=" << report.n << '\n'
      << "nu=" << report.nu << '\n'
      << "t_b0=" << format(report.T_B0) << '\n'
      << "t_b1=" << format(report.T_B1) << '\n'
      << "v_n=" << format(report.V_n) << '\n'
      << "n_v_n=" << format(report.n_V_n) << '\n'
      << "chi_sq_mean=" << format(report.chi_sq_mean) << '\n'
      << "scaling_check=" << format(report.scaling_check) << '\n';
}

McTable read_mc_table(const std::filesystem::path& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.cols() != 4) throw CsvError("expected 4 columns in " + path.string(), 1);
  McTable table;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    table.rows.push_back(McRow{m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
  return table;
}

}  // namespace flr::csv
