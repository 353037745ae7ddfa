#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace koopman {

struct CsvTable {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

// Numeric CSV with a mandatory header row (result tables).
CsvTable read_csv_table(const std::string& path);
void write_csv_table(const std::string& path,
                     const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values);

// Bare numeric matrix parser; rejects ragged rows and non-finite entries
// with the offending line number.
Eigen::MatrixXd read_numeric_csv(const std::string& path, bool skip_header);

void write_numeric_csv(const std::string& path, const Eigen::MatrixXd& values,
                       const std::vector<std::string>* header = nullptr);

std::string format_double(double v);  // shortest round-trip-exact form

}  // namespace koopman
