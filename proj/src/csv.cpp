#include "koopman/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "koopman/common.hpp"

namespace koopman {

std::string format_double(double v) {
  // %.17g always round-trips; prefer the shorter %.15g / %.16g when exact.
  char buf[40];
  for (int prec : {15, 16, 17}) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  return buf;
}

namespace {

// Split on commas; bare whitespace also separates fields. Empty fields
// between commas are kept so the parser can report them.
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c == '\t' || c == ' ') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      }
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

double parse_field(const std::string& field, std::size_t line_no,
                   const std::string& path) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    std::ostringstream msg;
    msg << path << ": line " << line_no << ": cannot parse '" << field
        << "' as a number";
    throw IoError(msg.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << path << ": line " << line_no << ": non-finite entry '" << field << "'";
    throw IoError(msg.str());
  }
  return v;
}

}  // namespace

Eigen::MatrixXd read_numeric_csv(const std::string& path, bool skip_header) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  Eigen::Index width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_header && line_no == 1) continue;
    auto fields = split_fields(line);
    if (fields.empty()) continue;  // blank line
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_field(f, line_no, path));
    if (width < 0) {
      width = static_cast<Eigen::Index>(row.size());
    } else if (static_cast<Eigen::Index>(row.size()) != width) {
      std::ostringstream msg;
      msg << path << ": line " << line_no << ": inconsistent width ("
          << row.size() << " fields, expected " << width << ")";
      throw IoError(msg.str());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": no numeric rows");

  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), width);
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < width; ++j) out(i, j) = rows[i][j];
  return out;
}

void write_numeric_csv(const std::string& path, const Eigen::MatrixXd& values,
                       const std::vector<std::string>* header) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  if (header) {
    for (std::size_t j = 0; j < header->size(); ++j) {
      if (j) out << ',';
      out << (*header)[j];
    }
    out << '\n';
  }
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      if (j) out << ',';
      out << format_double(values(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

CsvTable read_csv_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string first;
  if (!std::getline(in, first)) throw IoError(path + ": empty file");
  if (!first.empty() && first.back() == '\r') first.pop_back();
  CsvTable t;
  t.header = split_fields(first);
  in.close();
  t.values = read_numeric_csv(path, /*skip_header=*/true);
  return t;
}

void write_csv_table(const std::string& path,
                     const std::vector<std::string>& header,
                     const Eigen::MatrixXd& values) {
  write_numeric_csv(path, values, &header);
}

}  // namespace koopman
