// Writes the synthetic Taylor-rule dataset used by scenarios/fit_rule.json.
//   generate_taylor_data [--n 120] [--noise 0.25] [--seed 1993] [--out PATH]

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "stabilab/csv.hpp"
#include "stabilab/estimation.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Synthetic date,i,pi,x data from i = 1.5 pi + 0.5 x + 1 + noise"};
  std::size_t n = 120;
  double noise = 0.25;
  std::uint64_t seed = 1993;
  std::string out = "taylor_synthetic.csv";
  app.add_option("--n", n, "Number of quarters");
  app.add_option("--noise", noise, "Std of the rule residual");
  app.add_option("--seed", seed, "RNG seed");
  app.add_option("--out", out, "Output path");
  CLI11_PARSE(app, argc, argv);

  std::ofstream file(out, std::ios::binary);
  if (!file) {
    std::cerr << "cannot write " << out << '\n';
    return 1;
  }
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : stabilab::generate_taylor_data(n, noise, seed)) {
    rows.push_back({r.date, stabilab::csv::number(r.i), stabilab::csv::number(r.pi),
                    stabilab::csv::number(r.x)});
  }
  stabilab::csv::write_table(file, {"date", "i", "pi", "x"}, rows);
  return 0;
}
