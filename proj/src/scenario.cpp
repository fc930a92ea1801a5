#include "stabilab/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "stabilab/classic_control.hpp"
#include "stabilab/csv.hpp"
#include "stabilab/error.hpp"
#include "stabilab/estimation.hpp"
#include "stabilab/policy_games.hpp"

namespace stabilab::cli {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Kind { Number, Count, Text, NumberList };

struct Param {
  std::string name;
  Kind kind = Kind::Number;
  json fallback;  // null: required
  std::vector<std::string> choices = {};
  bool optional = false;  // may be absent with no default
};

Param req(std::string name, Kind kind = Kind::Number) { return Param{std::move(name), kind, nullptr}; }
Param opt(std::string name, json fallback, Kind kind = Kind::Number) {
  return Param{std::move(name), kind, std::move(fallback)};
}
Param choice(std::string name, std::string fallback, std::vector<std::string> choices) {
  return Param{std::move(name), Kind::Text, std::move(fallback), std::move(choices)};
}

const std::map<std::string, std::vector<Param>>& schema() {
  static const std::map<std::string, std::vector<Param>> table = {
      {"classify", {req("a"), req("b"), req("f")}},
      {"simulate",
       {req("a"), req("b"), opt("sigma_eps", 0.0),
        choice("rule", "proportional", {"peg", "proportional", "pid", "inertial"}), opt("f", 0.0),
        opt("fp", 0.0), opt("fi", 0.0), opt("fd", 0.0), opt("rho_i", 0.0), opt("f_x", 0.0),
        opt("pi0", 1.0), opt("horizon", 100, Kind::Count), opt("sigma_eta", 0.0)}},
      {"cobweb",
       {req("f_demand"), req("b_supply"), opt("e0", 1.0), opt("p_star", 0.0),
        opt("horizon", 20, Kind::Count)}},
      {"lqr", {req("a"), req("b"), req("q"), req("r"), opt("beta", 1.0), opt("pi0", 1.0)}},
      {"robust",
       {req("a"), req("b_min"), req("b_max"), opt("q", 1.0), opt("r", 1.0), opt("beta", 1.0),
        opt("pi0", 1.0), opt("f_min", -5.0), opt("f_max", 5.0), opt("f_points", 2001, Kind::Count),
        opt("b_points", 101, Kind::Count)}},
      {"lqg",
       {req("a"), req("b"), req("q"), req("r"), opt("sigma_eps", 1.0), opt("beta", 1.0),
        opt("obs_noise", 0.0), opt("pi0", 1.0), opt("horizon", 200, Kind::Count)}},
      {"barro_gordon",
       {req("b"), req("pi_bias"), opt("q", 1.0), opt("r", 1.0), opt("beta", 1.0)}},
      {"misperception",
       {req("a"), req("b"), req("r"), opt("q", 1.0), opt("beta", 1.0),
        opt("n_iter", 10, Kind::Count)}},
      {"stackelberg",
       {opt("delta", 0.99), opt("kappa", 1.0), opt("b", -1.0), opt("rho", 0.8), opt("q", 1.0),
        opt("r", 1.0), opt("beta", 0.99), opt("z0", 1.0), opt("horizon", 200, Kind::Count),
        Param{"reoptimize_at", Kind::Count, nullptr, {}, true}}},
      {"identify",
       {req("a"), req("b"), req("f"), opt("sigma_eps", 1.0), opt("sigma_eta", 1.0),
        opt("n", 100000, Kind::Count), opt("pi0", 0.0), choice("method", "ols", {"ols", "iv"})}},
      {"price_puzzle",
       {req("a"), req("b"), req("f"), opt("sigma_eps", 1.0), opt("sigma_eta", 0.1),
        opt("n", 100000, Kind::Count)}},
      {"fit_rule", {req("data", Kind::Text), choice("spec", "taylor", {"taylor", "inertial"})}},
      {"welfare", {req("gamma"), req("sigma_x")}},
      {"compare",
       {req("a"), req("b"), req("gains", Kind::NumberList), opt("sigma_eps", 1.0), opt("q", 1.0),
        opt("r", 1.0), opt("beta", 1.0), opt("pi0", 1.0)}},
  };
  return table;
}

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Number: return "a finite number";
    case Kind::Count: return "a non-negative integer";
    case Kind::Text: return "a string";
    case Kind::NumberList: return "a non-empty list of finite numbers";
  }
  return "?";
}

bool finite_number(const json& v) { return v.is_number() && std::isfinite(v.get<double>()); }

bool matches(const json& v, Kind k) {
  switch (k) {
    case Kind::Number: return finite_number(v);
    case Kind::Count: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case Kind::Text: return v.is_string();
    case Kind::NumberList:
      return v.is_array() && !v.empty() && std::all_of(v.begin(), v.end(), finite_number);
  }
  return false;
}

std::string joined(const std::vector<std::string>& xs) {
  std::string out;
  for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x;
  return out;
}

std::filesystem::path data_path(const ScenarioConfig& cfg, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : cfg.base_dir / path;
}

// Typed access to a validated parameter block with schema defaults applied.
class Params {
 public:
  Params(const json& given, const std::vector<Param>& spec) : given_(given), spec_(spec) {}

  double num(const std::string& name) const { return value(name).get<double>(); }
  std::size_t count(const std::string& name) const { return value(name).get<std::size_t>(); }
  std::string text(const std::string& name) const { return value(name).get<std::string>(); }
  std::vector<double> list(const std::string& name) const {
    return value(name).get<std::vector<double>>();
  }
  bool has(const std::string& name) const { return given_.contains(name); }

 private:
  const json& value(const std::string& name) const {
    if (given_.contains(name)) return given_.at(name);
    for (const auto& p : spec_) {
      if (p.name == name) return p.fallback;
    }
    throw Error(ErrorKind::ConfigError, "parameter " + name + " is not in the schema");
  }

  const json& given_;
  const std::vector<Param>& spec_;
};

struct Output {
  std::string csv;
  std::vector<std::pair<std::string, std::string>> summary;
};

void kv_row(std::vector<std::vector<std::string>>& rows, Output& out, const std::string& name,
            double v) {
  rows.push_back({name, csv::number(v)});
  out.summary.emplace_back(name, csv::brief(v));
}

void summarize(Output& out, const std::string& name, double v) {
  out.summary.emplace_back(name, csv::brief(v));
}

void summarize_regression(Output& out, const RegressionResult& reg) {
  for (std::size_t j = 0; j < reg.names.size(); ++j) {
    out.summary.emplace_back(reg.names[j],
                             csv::brief(reg.coefficients[j]) + " (se " + csv::brief(reg.stderrs[j]) + ")");
  }
  summarize(out, "r2", reg.r2);
}

Rule make_rule(const Params& p) {
  const std::string kind = p.text("rule");
  if (kind == "peg") return rule::Peg{};
  if (kind == "pid") return rule::Pid{p.num("fp"), p.num("fi"), p.num("fd")};
  if (kind == "inertial") return rule::Inertial{p.num("rho_i"), p.num("f_x")};
  return rule::Proportional{p.num("f")};
}

LossSpec loss_spec(const Params& p) {
  return LossSpec{p.num("q"), p.num("r"), p.num("beta"), 0.0};
}

Output run_scenario(const std::string& name, const Params& p, const ScenarioConfig& cfg,
                    std::uint64_t seed) {
  Output out;
  std::ostringstream os;
  std::vector<std::vector<std::string>> rows;

  if (name == "classify") {
    const ClosedLoop cl = classify(Transmission{p.num("a"), p.num("b"), 0.0}, p.num("f"));
    rows = {{"lambda", csv::number(cl.lambda)},
            {"feedback", std::string(to_string(cl.feedback))},
            {"stability", std::string(to_string(cl.stability))}};
    csv::write_table(os, {"quantity", "value"}, rows);
    summarize(out, "lambda", cl.lambda);
    out.summary.emplace_back("feedback", to_string(cl.feedback));
    out.summary.emplace_back("stability", to_string(cl.stability));
  } else if (name == "simulate") {
    const Transmission tr{p.num("a"), p.num("b"), p.num("sigma_eps")};
    const Trajectory traj = simulate_trajectory(tr, make_rule(p), p.num("pi0"), p.count("horizon"),
                                                p.num("sigma_eta"), seed);
    csv::write_trajectory(os, traj);
    summarize(out, "rows", static_cast<double>(traj.size()));
    summarize(out, "pi[last]", traj.pi.back());
  } else if (name == "cobweb") {
    const CobwebPath path = cobweb_simulate(
        CobwebParams{p.num("f_demand"), p.num("b_supply"), p.num("e0"), p.num("p_star")},
        p.count("horizon"));
    for (std::size_t t = 0; t < path.price.size(); ++t) {
      rows.push_back({std::to_string(t), csv::number(path.excess_supply[t]),
                      csv::number(path.price[t])});
    }
    csv::write_table(os, {"t", "excess_supply", "price"}, rows);
    out.summary.emplace_back("regime", to_string(path.regime));
    summarize(out, "price[last]", path.price.back());
  } else if (name == "lqr") {
    const Transmission tr{p.num("a"), p.num("b"), 0.0};
    const LossSpec ls = loss_spec(p);
    const RiccatiSolution sol = riccati_solve(tr, ls);
    kv_row(rows, out, "p", sol.p);
    kv_row(rows, out, "f_star", sol.f_star);
    kv_row(rows, out, "lambda_star", sol.lambda_star);
    kv_row(rows, out, "iterations", static_cast<double>(sol.iterations));
    kv_row(rows, out, "loss", policy_loss(tr, ls, sol.f_star, p.num("pi0")));
    csv::write_table(os, {"quantity", "value"}, rows);
  } else if (name == "robust") {
    const std::vector<double> f_grid = linspace(p.num("f_min"), p.num("f_max"), p.count("f_points"));
    const std::vector<double> b_grid = linspace(p.num("b_min"), p.num("b_max"), p.count("b_points"));
    const RobustResult res = robust_minimax_gain(p.num("a"), p.num("b_min"), p.num("b_max"),
                                                 loss_spec(p), p.num("pi0"), f_grid, b_grid);
    kv_row(rows, out, "f_robust", res.f_robust);
    kv_row(rows, out, "worst_case_loss", res.worst_case_loss);
    kv_row(rows, out, "worst_case_b", res.worst_case_b);
    csv::write_table(os, {"quantity", "value"}, rows);
  } else if (name == "lqg") {
    const Transmission tr{p.num("a"), p.num("b"), p.num("sigma_eps")};
    const LqgResult res =
        lqg_simulate(tr, loss_spec(p), p.num("obs_noise"), p.num("pi0"), p.count("horizon"), seed);
    csv::write_trajectory(os, res.trajectory, {{"filtered", res.filtered}, {"gain", res.gains}});
    summarize(out, "f_star", res.f_star);
    summarize(out, "kalman_gain[last]", res.gains.back());
    summarize(out, "realized_loss", res.realized_loss);
  } else if (name == "barro_gordon") {
    LossSpec ls = loss_spec(p);
    ls.pi_bias = p.num("pi_bias");
    const BGEquilibrium eq = barro_gordon_equilibrium(p.num("b"), ls);
    kv_row(rows, out, "pi_star", eq.pi_star);
    kv_row(rows, out, "i_star", eq.i_star);
    kv_row(rows, out, "loss_discretion", eq.loss_discretion);
    kv_row(rows, out, "loss_rules", eq.loss_rules);
    csv::write_table(os, {"quantity", "value"}, rows);
  } else if (name == "misperception") {
    const MisperceptionRun run = kp_misperception_iterate(Transmission{p.num("a"), p.num("b"), 0.0},
                                                          loss_spec(p), p.count("n_iter"));
    for (std::size_t k = 0; k < run.f_path.size(); ++k) {
      rows.push_back({std::to_string(k), csv::number(run.perceived_a_path[k]),
                      csv::number(run.f_path[k]), csv::number(run.true_lambda_path[k]),
                      csv::number(run.loss_path[k])});
    }
    csv::write_table(os, {"k", "perceived_a", "f", "true_lambda", "loss"}, rows);
    out.summary.emplace_back("verdict", to_string(run.verdict));
    summarize(out, "rules_loss", run.rules_loss);
    summarize(out, "loss[last]", run.loss_path.back());
  } else if (name == "stackelberg") {
    const StackelbergModel model{p.num("delta"), p.num("kappa"), p.num("b"), p.num("rho")};
    const StackelbergPlan plan = stackelberg_commit(model, loss_spec(p), p.num("z0"), p.count("horizon"));
    Trajectory traj;
    const std::size_t n = plan.pi_path.size();
    traj.t.resize(n);
    for (std::size_t t = 0; t < n; ++t) traj.t[t] = t;
    traj.pi = plan.pi_path;
    traj.i = plan.i_path;
    traj.eps.assign(n, 0.0);
    traj.eta.assign(n, 0.0);
    csv::write_trajectory(os, traj, {{"gamma", plan.gamma_path}, {"z", plan.z_path}});
    summarize(out, "loss", plan.loss);
    summarize(out, "pi[0]", plan.pi_path.front());
    summarize(out, "gamma[1]", plan.gamma_path[1]);
    if (p.has("reoptimize_at")) {
      const Reoptimization re = stackelberg_reoptimize(plan, p.count("reoptimize_at"));
      summarize(out, "reoptimization_deviation", re.deviation);
      summarize(out, "reoptimized_loss", re.concatenated.loss);
    }
  } else if (name == "identify" || name == "price_puzzle") {
    const Transmission tr{p.num("a"), p.num("b"), p.num("sigma_eps")};
    const double f = p.num("f");
    const double pi0 = name == "identify" ? p.num("pi0") : 0.0;
    const Trajectory traj =
        simulate_trajectory(tr, rule::Proportional{f}, pi0, p.count("n"), p.num("sigma_eta"), seed);
    if (name == "identify") {
      const auto method = p.text("method") == "iv" ? TransmissionMethod::IV : TransmissionMethod::OLS;
      const RegressionResult reg = estimate_transmission(traj, method);
      csv::write_regression(os, reg);
      summarize_regression(out, reg);
    } else {
      const PricePuzzleReport rep = price_puzzle_demo(traj, tr, f);
      kv_row(rows, out, "naive_b", rep.naive_b);
      kv_row(rows, out, "naive_b_stderr", rep.naive_b_stderr);
      kv_row(rows, out, "population_slope", naive_population_slope(tr, f, p.num("sigma_eta")));
      kv_row(rows, out, "sign_flip", rep.sign_flip ? 1.0 : 0.0);
      if (rep.multivariate) {
        kv_row(rows, out, "multivariate_a", rep.multivariate->coef("a"));
        kv_row(rows, out, "multivariate_b", rep.multivariate->coef("b"));
      }
      kv_row(rows, out, "advised_gain", rep.advised_gain);
      kv_row(rows, out, "perceived_lambda", rep.perceived_lambda);
      kv_row(rows, out, "true_lambda", rep.true_lambda);
      kv_row(rows, out, "misadvice_ordering", rep.misadvice_ordering ? 1.0 : 0.0);
      csv::write_table(os, {"quantity", "value"}, rows);
    }
  } else if (name == "fit_rule") {
    const auto data = read_rate_csv(data_path(cfg, p.text("data")));
    const RuleSpec spec = p.text("spec") == "inertial" ? RuleSpec::Inertial : RuleSpec::Taylor;
    const RuleFit fit = fit_policy_rule(data, spec);
    csv::write_regression(os, fit.regression);
    summarize_regression(out, fit.regression);
    if (spec == RuleSpec::Inertial) summarize(out, "long_run_gap_sensitivity", fit.long_run_gap_sensitivity);
  } else if (name == "welfare") {
    const double cost = lucas_welfare_cost(WelfareSpec{p.num("gamma"), p.num("sigma_x")});
    kv_row(rows, out, "cost", cost);
    csv::write_table(os, {"quantity", "value"}, rows);
  } else if (name == "compare") {
    const Transmission tr{p.num("a"), p.num("b"), p.num("sigma_eps")};
    const ComparisonReport rep = compare_policies(tr, loss_spec(p), p.list("gains"), p.num("pi0"));
    for (const auto& row : rep.rows) {
      rows.push_back({row.label, csv::number(row.gain), csv::number(row.loop.lambda),
                      std::string(to_string(row.loop.feedback)),
                      std::string(to_string(row.loop.stability)), csv::number(row.loss),
                      csv::number(row.variance)});
      out.summary.emplace_back(row.label + " f=" + csv::brief(row.gain),
                               "lambda " + csv::brief(row.loop.lambda) + ", " +
                                   std::string(to_string(row.loop.stability)) + ", loss " +
                                   csv::brief(row.loss) + ", variance " + csv::brief(row.variance));
    }
    csv::write_table(os, {"policy", "gain", "lambda", "feedback", "stability", "loss", "variance"},
                     rows);
  } else {
    throw Error(ErrorKind::ConfigError, "unknown scenario " + name);
  }
  out.csv = os.str();
  return out;
}

}  // namespace

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& entry : schema()) v.push_back(entry.first);
    return v;
  }();
  return names;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOError, "cannot read " + path.string());
  ScenarioConfig cfg;
  try {
    cfg.document = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ConfigError, path.string() + " is not valid JSON: " + e.what());
  }
  if (!cfg.document.is_object()) {
    throw Error(ErrorKind::ConfigError, path.string() + " must hold a JSON object");
  }
  cfg.base_dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  return cfg;
}

void apply_override(ScenarioConfig& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error(ErrorKind::ConfigError, "override '" + std::string(assignment) + "' is not key=value");
  }
  std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  if (key == "seed" || key == "output_path" || key == "scenario") {
    cfg.document[key] = std::move(value);
    return;
  }
  constexpr std::string_view prefix = "parameters.";
  if (key.rfind(prefix, 0) == 0) key.erase(0, prefix.size());
  if (!cfg.document.contains("parameters") || !cfg.document["parameters"].is_object()) {
    cfg.document["parameters"] = json::object();
  }
  cfg.document["parameters"][key] = std::move(value);
}

std::vector<std::string> validate(const ScenarioConfig& cfg) {
  std::vector<std::string> diags;
  const json& doc = cfg.document;
  for (const auto& [key, _] : doc.items()) {
    if (key != "scenario" && key != "seed" && key != "output_path" && key != "parameters") {
      diags.push_back("unknown top-level key '" + key + "'");
    }
  }
  if (doc.contains("seed") && !matches(doc["seed"], Kind::Count)) {
    diags.push_back("seed must be a non-negative integer");
  }
  if (doc.contains("output_path") && !doc["output_path"].is_string()) {
    diags.push_back("output_path must be a string");
  }
  const json params = doc.contains("parameters") ? doc["parameters"] : json::object();
  if (!params.is_object()) diags.push_back("parameters must be an object");

  if (!doc.contains("scenario") || !doc["scenario"].is_string() ||
      !schema().contains(doc["scenario"].get<std::string>())) {
    diags.push_back("scenario must be one of: " + joined(scenario_names()));
    return diags;
  }
  if (!params.is_object()) return diags;

  const auto& spec = schema().at(doc["scenario"].get<std::string>());
  for (const auto& [key, _] : params.items()) {
    const bool known = std::any_of(spec.begin(), spec.end(), [&](const Param& p) { return p.name == key; });
    if (!known) diags.push_back("unknown parameter '" + key + "'");
  }
  for (const auto& p : spec) {
    if (!params.contains(p.name)) {
      if (p.fallback.is_null() && !p.optional) diags.push_back("missing parameter '" + p.name + "'");
      continue;
    }
    const json& v = params[p.name];
    if (!matches(v, p.kind)) {
      diags.push_back("parameter '" + p.name + "' must be " + std::string(kind_name(p.kind)));
      continue;
    }
    if (!p.choices.empty() &&
        std::find(p.choices.begin(), p.choices.end(), v.get<std::string>()) == p.choices.end()) {
      diags.push_back("parameter '" + p.name + "' must be one of: " + joined(p.choices));
    }
  }
  if (doc["scenario"] == "fit_rule" && params.contains("data") && params["data"].is_string()) {
    const auto path = data_path(cfg, params["data"].get<std::string>());
    if (!std::filesystem::is_regular_file(path)) {
      diags.push_back("data file '" + path.string() + "' does not exist");
    }
  }
  return diags;
}

std::vector<std::string> validate(const std::filesystem::path& config_path) {
  std::ifstream probe(config_path);
  if (!probe) throw Error(ErrorKind::IOError, "cannot read " + config_path.string());
  try {
    return validate(load_config(config_path));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::ConfigError) throw;
    return {e.what()};
  }
}

RunResult run(const ScenarioConfig& cfg) {
  const auto diags = validate(cfg);
  if (!diags.empty()) throw Error(ErrorKind::ConfigError, joined(diags));

  const json& doc = cfg.document;
  const std::string name = doc["scenario"].get<std::string>();
  const std::uint64_t seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;
  const json params = doc.contains("parameters") ? doc["parameters"] : json::object();
  const Params p(params, schema().at(name));

  const Output result = run_scenario(name, p, cfg, seed);

  RunResult rr;
  rr.output = doc.contains("output_path") ? std::filesystem::path(doc["output_path"].get<std::string>())
                                          : std::filesystem::path(name + ".csv");
  if (rr.output.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(rr.output.parent_path(), ec);
  }
  std::ofstream file(rr.output, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorKind::IOError, "cannot write " + rr.output.string());
  file << result.csv;
  file.close();
  if (!file) throw Error(ErrorKind::IOError, "write to " + rr.output.string() + " failed");

  std::ostringstream summary;
  summary << "scenario: " << name << " (seed " << seed << ")\n";
  for (const auto& [key, value] : result.summary) summary << "  " << key << " = " << value << '\n';
  summary << "wrote " << rr.output.string() << '\n';
  rr.summary = summary.str();
  return rr;
}

int exit_code_for(ErrorKind kind) { return kind == ErrorKind::ConfigError ? 2 : 3; }

ComparisonReport compare_policies(const Transmission& tr, const LossSpec& ls,
                                  const std::vector<double>& gains, double pi0) {
  ComparisonReport rep;
  for (double f : gains) {
    ComparisonRow row;
    row.label = f == 0.0 ? "Rule/Peg" : "Discretion/Feedback";
    row.gain = f;
    row.loop = classify(tr, f);
    row.loss = policy_loss(tr, ls, f, pi0);
    row.variance = std::abs(row.loop.lambda) < 1.0 ? ar1_variance(row.loop.lambda, tr.sigma_eps) : kInf;
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace stabilab::cli
