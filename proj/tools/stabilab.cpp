// stabilab <config.json> [--seed N] [--out PATH] [--set k=v ...] [--validate]
// stabilab --batch DIR [--out DIR] ...

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "stabilab/error.hpp"
#include "stabilab/scenario.hpp"

namespace fs = std::filesystem;
using stabilab::Error;
using stabilab::ErrorKind;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::vector<std::string> sets;
  bool validate_only = false;
  std::string batch;
};

int run_one(const fs::path& config, const Options& opt, std::optional<fs::path> out) {
  try {
    if (opt.validate_only) {
      auto cfg = stabilab::cli::load_config(config);
      for (const auto& s : opt.sets) stabilab::cli::apply_override(cfg, s);
      const auto diags = stabilab::cli::validate(cfg);
      for (const auto& d : diags) std::cout << config.string() << ": " << d << '\n';
      if (diags.empty()) std::cout << config.string() << ": ok\n";
      return diags.empty() ? 0 : 2;
    }
    auto cfg = stabilab::cli::load_config(config);
    for (const auto& s : opt.sets) stabilab::cli::apply_override(cfg, s);
    if (opt.seed) cfg.document["seed"] = *opt.seed;
    if (out) cfg.document["output_path"] = out->string();
    const auto result = stabilab::cli::run(cfg);
    std::cout << result.summary;
    return 0;
  } catch (const Error& e) {
    std::cerr << "stabilab: " << config.string() << ": " << e.what() << '\n';
    return stabilab::cli::exit_code_for(e.kind());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Macro stabilization policy as feedback control"};
  Options opt;
  app.add_option("config", opt.config, "Scenario config (JSON)");
  app.add_option("--seed", opt.seed, "Override the config seed");
  app.add_option("--out", opt.out, "Output CSV path (a directory in --batch mode)");
  app.add_option("--set", opt.sets, "Parameter override key=value (repeatable)");
  app.add_flag("--validate", opt.validate_only, "Check the config without running it");
  app.add_option("--batch", opt.batch, "Run every *.json config in a directory");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return e.get_exit_code() == 0 ? app.exit(e) : (app.exit(e), 2);
  }

  if (opt.batch.empty() == opt.config.empty()) {
    std::cerr << "stabilab: give exactly one of <config> or --batch DIR\n";
    return 2;
  }
  if (!opt.config.empty()) {
    return run_one(opt.config, opt, opt.out ? std::optional<fs::path>(*opt.out) : std::nullopt);
  }

  std::error_code ec;
  if (!fs::is_directory(opt.batch, ec)) {
    std::cerr << "stabilab: " << opt.batch << " is not a directory\n";
    return 2;
  }
  std::vector<fs::path> configs;
  for (const auto& entry : fs::directory_iterator(opt.batch)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") configs.push_back(entry.path());
  }
  std::sort(configs.begin(), configs.end());
  int worst = 0;
  for (const auto& config : configs) {
    std::optional<fs::path> out;
    if (opt.out) out = fs::path(*opt.out) / (config.stem().string() + ".csv");
    worst = std::max(worst, run_one(config, opt, out));
  }
  return worst;
}
