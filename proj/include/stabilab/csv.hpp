#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "stabilab/estimation.hpp"
#include "stabilab/model_core.hpp"

namespace stabilab::csv {

/// Shortest decimal (fixed notation) that parses back to the same double;
/// "inf", "-inf" and "nan" for the non-finite values.
std::string number(double v);

/// Four significant digits, for human-facing summaries.
std::string brief(double v);

using Column = std::pair<std::string, std::vector<double>>;

/// `t,pi,i,eps,eta` followed by any extra columns, each as long as the trajectory.
void write_trajectory(std::ostream& out, const Trajectory& traj,
                      const std::vector<Column>& extra = {});

/// `name,estimate,stderr` rows then `r2,<value>`.
void write_regression(std::ostream& out, const RegressionResult& reg);

/// Plain table; cells are written verbatim.
void write_table(std::ostream& out, const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows);

}  // namespace stabilab::csv
