#include "stabilab/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "stabilab/error.hpp"

namespace stabilab::csv {

std::string number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  // Fixed notation of DBL_MAX needs ~310 characters.
  std::array<char, 400> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
  if (res.ec != std::errc{}) throw Error(ErrorKind::IOError, "number formatting failed");
  return std::string(buf.data(), res.ptr);
}

std::string brief(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  std::snprintf(buf.data(), buf.size(), "%.4g", v);
  return buf.data();
}

void write_trajectory(std::ostream& out, const Trajectory& traj, const std::vector<Column>& extra) {
  const std::size_t n = traj.size();
  for (const auto& [name, values] : extra) {
    if (values.size() != n) {
      throw Error(ErrorKind::InvalidArgument, "column " + name + " does not match the trajectory");
    }
  }
  out << "t,pi,i,eps,eta";
  for (const auto& col : extra) out << ',' << col.first;
  out << '\n';
  for (std::size_t k = 0; k < n; ++k) {
    out << traj.t[k] << ',' << number(traj.pi[k]) << ',' << number(traj.i[k]) << ','
        << number(traj.eps[k]) << ',' << number(traj.eta[k]);
    for (const auto& col : extra) out << ',' << number(col.second[k]);
    out << '\n';
  }
}

void write_regression(std::ostream& out, const RegressionResult& reg) {
  out << "name,estimate,stderr\n";
  for (std::size_t j = 0; j < reg.names.size(); ++j) {
    out << reg.names[j] << ',' << number(reg.coefficients[j]) << ',' << number(reg.stderrs[j])
        << '\n';
  }
  out << "r2," << number(reg.r2) << '\n';
}

void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out << (k ? "," : "") << cells[k];
    out << '\n';
  };
  line(header);
  for (const auto& row : rows) line(row);
}

}  // namespace stabilab::csv
