// Acceptance run: one PASS/FAIL line per criterion. Tolerances and runtime
// budgets are fixed here; the exit status is nonzero if any line fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "stabilab/classic_control.hpp"
#include "stabilab/error.hpp"
#include "stabilab/estimation.hpp"
#include "stabilab/model_core.hpp"
#include "stabilab/optimal_control.hpp"
#include "stabilab/policy_games.hpp"

namespace fs = std::filesystem;
using namespace stabilab;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void criterion(const std::string& name, double budget_s, const std::function<Verdict()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v.pass = false;
    v.detail = std::string("unexpected exception: ") + e.what();
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (elapsed > budget_s) {
    v.require(false, "runtime " + std::to_string(elapsed) + " s over budget");
  }
  if (!v.pass) ++failures;
  std::printf("%s  %-28s %6.2fs  %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), elapsed,
              v.detail.c_str());
  std::fflush(stdout);
}

template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

std::string fmt(double x) {
  std::ostringstream ss;
  ss.precision(6);
  ss << x;
  return ss.str();
}

// Value iteration written out as minimization of q + r f^2 + beta (a + b f)^2 p.
double value_iteration(const Transmission& tr, const LossSpec& ls, std::size_t steps) {
  double p = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double f = -ls.beta * tr.a * tr.b * p / (ls.r + ls.beta * tr.b * tr.b * p);
    const double lam = tr.a + tr.b * f;
    p = ls.q + ls.r * f * f + ls.beta * lam * lam * p;
  }
  return p;
}

// P = a^2 P s^2/(P + s^2) + se^2 by plain iteration.
double filter_fixed_point(double a, double se, double so) {
  double p = se * se;
  for (int k = 0; k < 1'000'000; ++k) {
    const double post = so == 0.0 ? 0.0 : p * so * so / (p + so * so);
    const double next = a * a * post + se * se;
    if (std::abs(next - p) <= 1e-15 * next) return next;
    p = next;
  }
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  std::mt19937_64 rng(20260415);
  auto uniform = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };

  criterion("peg optimality", 5.0, [&] {
    Verdict v;
    double worst = 0.0;
    for (int k = 0; k < 500; ++k) {
      const double beta = uniform(0.5, 1.0);
      const double bound = 1.0 / std::sqrt(beta);
      const Transmission tr{uniform(-bound, bound) * 0.999, uniform(0.1, 3.0) * (k % 2 ? 1 : -1), 0.0};
      const double f = riccati_solve(tr, {0.0, uniform(0.1, 5.0), beta, 0.0}).f_star;
      worst = std::max(worst, std::abs(f));
    }
    v.require(worst <= 1e-8, "Q = 0: max |f*| = " + fmt(worst));
    int nonzero = 0;
    for (int k = 0; k < 500; ++k) {
      const Transmission tr{0.0, uniform(-3.0, 3.0), 0.0};
      const LossSpec ls{uniform(0.1, 5.0), uniform(0.1, 5.0), uniform(0.5, 1.0), 0.0};
      if (riccati_solve(tr, ls).f_star != 0.0) ++nonzero;
    }
    v.require(nonzero == 0, "A = 0: " + std::to_string(nonzero) + " nonzero gains");
    v.detail = v.pass ? "max |f*| (Q=0) " + fmt(worst) + ", static cases exact" : v.detail;
    return v;
  });

  criterion("riccati vs value iteration", 30.0, [&] {
    Verdict v;
    double worst_rel = 0.0;
    int beaten = 0;
    const auto grid = linspace(-10.0, 10.0, 2001);
    for (int k = 0; k < 100; ++k) {
      const Transmission tr{uniform(-1.5, 1.5), uniform(0.2, 2.0) * (k % 2 ? 1 : -1), 0.0};
      const LossSpec ls{uniform(0.1, 2.0), uniform(0.1, 2.0), uniform(0.8, 1.0), 0.0};
      const auto sol = riccati_solve(tr, ls);
      const double loss = policy_loss(tr, ls, sol.f_star, 1.0);
      const double oracle = 0.5 * value_iteration(tr, ls, 10'000);
      worst_rel = std::max(worst_rel, std::abs(loss - oracle) / oracle);
      for (double f : grid) {
        if (policy_loss(tr, ls, f, 1.0) < loss * (1.0 - 1e-12)) ++beaten;
      }
    }
    v.require(worst_rel <= 1e-6, "relative error " + fmt(worst_rel));
    v.require(beaten == 0, std::to_string(beaten) + " grid gains beat f*");
    if (v.pass) v.detail = "max relative error " + fmt(worst_rel);
    return v;
  });

  criterion("taylor principle", 5.0, [&] {
    Verdict v;
    int bad_inside = 0, bad_outside = 0, instances = 0;
    for (int ia = 1; ia <= 20; ++ia) {
      for (int ib = 1; ib <= 20; ++ib) {
        const ISPhillips isp{ia / 10.0, ib / 10.0};
        const Transmission tr = taylor_transmission(isp);
        const double lo = 1.0;
        const double hi = -tr.a / tr.b;
        ++instances;
        for (int k = 0; k < 1000; ++k) {
          double f = uniform(lo, hi);
          while (f == lo) f = uniform(lo, hi);
          const auto cl = classify(tr, f);
          if (!(cl.stability == StabilityClass::Stationary &&
                cl.feedback == FeedbackClass::NegativeFeedback)) {
            ++bad_inside;
          }
          const double g = k % 2 ? uniform(lo - 5.0, lo) : uniform(hi, hi + 5.0);
          const auto out = classify(tr, g == hi ? hi + 1.0 : g);
          if (out.stability == StabilityClass::Stationary &&
              out.feedback == FeedbackClass::NegativeFeedback) {
            ++bad_outside;
          }
        }
      }
    }
    v.require(bad_inside == 0, std::to_string(bad_inside) + " inside gains misclassified");
    v.require(bad_outside == 0, std::to_string(bad_outside) + " outside gains misclassified");
    if (v.pass) v.detail = std::to_string(instances) + " instances x 1000 gains each side";
    return v;
  });

  criterion("taylor rule point value", 1.0, [&] {
    Verdict v;
    const double x = taylor_rule_eval(2.0, 0.0);
    v.require(x == 4.0, "got " + fmt(x));
    if (v.pass) v.detail = "i(2,0) = 4";
    return v;
  });

  criterion("barro-gordon", 1.0, [&] {
    Verdict v;
    const auto eq = barro_gordon_equilibrium(-1.0, {1.0, 1.0, 1.0, 2.0});
    v.require(eq.pi_star == 1.0, "pi* = " + fmt(eq.pi_star));
    v.require(eq.i_star == -1.0, "i* = " + fmt(eq.i_star));
    v.require(eq.loss_discretion > eq.loss_rules, "discretion not worse than rules");
    const auto none = barro_gordon_equilibrium(-1.0, {1.0, 1.0, 1.0, 0.0});
    v.require(none.pi_star == 0.0 && none.i_star == 0.0 && none.loss_discretion == none.loss_rules,
              "pi_D = 0 does not reduce to rules");
    if (v.pass) {
      v.detail = "pi* = 1, i* = -1, losses " + fmt(eq.loss_discretion) + " > " + fmt(eq.loss_rules);
    }
    return v;
  });

  criterion("cobweb regimes", 1.0, [&] {
    Verdict v;
    const std::pair<double, CobwebRegime> cases[] = {
        {-0.5, CobwebRegime::DampedOscillation},
        {-1.0, CobwebRegime::PerpetualCycle},
        {-1.5, CobwebRegime::Divergent},
    };
    for (const auto& [bf, want] : cases) {
      const auto got = cobweb_regime(bf);
      const auto sim = cobweb_simulate({bf, 1.0, 1.0, 0.0}, 20).regime;
      v.require(got == want && sim == want,
                "BF = " + fmt(bf) + " gave " + std::string(to_string(got)));
    }
    if (v.pass) v.detail = "Damped / Cycle / Divergent";
    return v;
  });

  criterion("identification dichotomy", 60.0, [&] {
    Verdict v;
    const Transmission tr{0.9, -0.5, 1.0};
    const double f = 0.4;
    const auto exact = simulate_trajectory(tr, rule::Proportional{f}, 1.0, 1000, 0.0, 11);
    for (auto method : {TransmissionMethod::OLS, TransmissionMethod::IV}) {
      v.require(error_kind([&] { estimate_transmission(exact, method); }) ==
                    ErrorKind::IdentificationFailure,
                "exact rule did not raise IdentificationFailure");
    }
    int passes = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const auto traj = simulate_trajectory(tr, rule::Proportional{f}, 0.0, 100'000, 1.0, seed);
      const auto fit = estimate_transmission(traj, TransmissionMethod::OLS);
      const bool ok = std::abs(fit.coef("a") - tr.a) <= 3.0 * fit.stderr_of("a") &&
                      std::abs(fit.coef("b") - tr.b) <= 3.0 * fit.stderr_of("b") &&
                      std::signbit(fit.coef("b")) == std::signbit(tr.b);
      passes += ok;
    }
    v.require(passes >= 19, std::to_string(passes) + "/20 seeds recovered the truth");
    if (v.pass) v.detail = "sigma_eta = 0 unidentified; " + std::to_string(passes) + "/20 seeds within 3 se";
    return v;
  });

  criterion("price puzzle", 30.0, [&] {
    Verdict v;
    const Transmission tr{0.9, -0.5, 1.0};
    const double f = 0.5, se = 0.1;
    const auto traj = simulate_trajectory(tr, rule::Proportional{f}, 0.0, 100'000, se, 5);
    const auto rep = price_puzzle_demo(traj, tr, f);
    // Population moments under i = f pi + eta, pi' = lambda pi + b eta + eps.
    const double lam = tr.a + tr.b * f;
    const double var_pi = (tr.sigma_eps * tr.sigma_eps + tr.b * tr.b * se * se) / (1.0 - lam * lam);
    const double slope = (f * lam * var_pi + tr.b * se * se) / (f * f * var_pi + se * se);
    v.require(rep.naive_b > 0.0, "naive slope " + fmt(rep.naive_b) + " not positive");
    v.require(std::abs(rep.naive_b - slope) <= 0.02 * std::abs(slope),
              "naive " + fmt(rep.naive_b) + " vs population " + fmt(slope));
    v.require(rep.multivariate.has_value() && rep.multivariate->coef("b") < 0.0,
              "correct specification did not restore b < 0");
    if (v.pass) {
      v.detail = "naive " + fmt(rep.naive_b) + " vs population " + fmt(slope) + ", multivariate b " +
                 fmt(rep.multivariate->coef("b"));
    }
    return v;
  });

  criterion("time inconsistency", 60.0, [&] {
    Verdict v;
    const StackelbergModel m;
    const LossSpec ls{1.0, 1.0, 0.99, 0.0};
    const auto plan = stackelberg_commit(m, ls, 1.0, 200);
    v.require(plan.gamma_path[0] == 0.0, "gamma_0 = " + fmt(plan.gamma_path[0]));
    v.require(std::any_of(plan.gamma_path.begin() + 1, plan.gamma_path.end(),
                          [](double g) { return g != 0.0; }),
              "no later multiplier is nonzero");
    const double dev = stackelberg_reoptimize(plan, 2).deviation;
    v.require(dev > 0.0, "re-optimization deviation is zero");
    double prev = std::numeric_limits<double>::infinity();
    for (double z0 : {1.0, 0.1, 0.01}) {
      const double d = stackelberg_reoptimize(stackelberg_commit(m, ls, z0, 200), 2).deviation;
      v.require(d < prev, "deviation not decreasing at z0 = " + fmt(z0));
      prev = d;
    }
    double best_rule = std::numeric_limits<double>::infinity();
    for (double f : linspace(-10.0, 10.0, 401)) {
      best_rule = std::min(best_rule, stackelberg_rule_loss(m, ls, f, 1.0));
    }
    v.require(plan.loss < best_rule, "a proportional rule matches commitment");
    if (v.pass) {
      v.detail = "deviation " + fmt(dev) + ", commitment " + fmt(plan.loss) + " < best rule " +
                 fmt(best_rule);
    }
    return v;
  });

  criterion("misperception regimes", 60.0, [&] {
    Verdict v;
    int counts[3] = {0, 0, 0};
    int first_mismatch = 0;
    for (double a : {-1.2, -0.6, 0.3, 0.6, 0.9, 0.99, 1.05, 1.2, 1.5, 2.0}) {
      for (double b : {-1.0, -0.5, 0.5}) {
        for (double beta : {0.9, 0.95, 0.99, 1.0}) {
          for (double log_ratio = -3.0; log_ratio <= 3.0 + 1e-9; log_ratio += 0.1) {
            const Transmission tr{a, b, 0.0};
            const LossSpec ls{1.0, std::pow(10.0, log_ratio), beta, 0.0};
            const auto run = kp_misperception_iterate(tr, ls, 20);
            ++counts[static_cast<int>(run.verdict)];
            if (run.f_path[0] != riccati_solve(tr, ls).f_star) ++first_mismatch;
          }
        }
      }
    }
    const int det = counts[static_cast<int>(MisperceptionVerdict::Deteriorated)];
    const int div = counts[static_cast<int>(MisperceptionVerdict::Diverged)];
    v.require(det >= 1, "no Deteriorated run");
    v.require(div >= 1, "no Diverged run");
    v.require(first_mismatch == 0, std::to_string(first_mismatch) + " first iterations off the optimum");
    v.detail = "Converged " + std::to_string(counts[0]) + ", Deteriorated " + std::to_string(det) +
               ", Diverged " + std::to_string(div) + (v.pass ? "" : " -- " + v.detail);
    return v;
  });

  criterion("welfare cost", 1.0, [&] {
    Verdict v;
    const double base = lucas_welfare_cost({1.0, 0.013});
    const double tripled = lucas_welfare_cost({1.0, 3.0 * 0.013});
    v.require(std::abs(base - 8.45e-5) <= 1e-15, "cost " + fmt(base));
    v.require(tripled / base == 9.0, "ratio " + fmt(tripled / base));
    if (v.pass) v.detail = "8.45e-05, tripled sigma x9";
    return v;
  });

  criterion("lqg separation", 10.0, [&] {
    Verdict v;
    const Transmission tr{0.95, -0.4, 1.0};
    const LossSpec ls{1.0, 0.5, 0.98, 0.0};
    const double f0 = lqg_simulate(tr, ls, 0.0, 1.0, 50, 9).f_star;
    for (double noise : {0.1, 0.5, 1.0, 3.0}) {
      v.require(lqg_simulate(tr, ls, noise, 1.0, 50, 9).f_star == f0,
                "gain moves at noise " + fmt(noise));
    }
    const auto lqg = lqg_simulate(tr, ls, 0.0, 1.0, 500, 9);
    const auto lqr = simulate_trajectory(tr, rule::Proportional{f0}, 1.0, 500, 0.0, 9);
    v.require(lqg.trajectory.pi == lqr.pi && lqg.trajectory.i == lqr.i,
              "zero-noise path differs from the LQR path");
    double worst = 0.0;
    for (double noise : {0.1, 0.5, 1.0, 3.0}) {
      const double oracle = filter_fixed_point(tr.a, tr.sigma_eps, noise);
      const double p = kalman_steady_prior_variance(tr.a, tr.sigma_eps, noise);
      worst = std::max(worst, std::abs(p - oracle) / oracle);
      const auto run = lqg_simulate(tr, ls, noise, 1.0, 400, 9);
      const double k_inf = oracle / (oracle + noise * noise);
      worst = std::max(worst, std::abs(run.gains.back() - k_inf));
    }
    v.require(worst <= 1e-6, "steady state off by " + fmt(worst));
    if (v.pass) v.detail = "f* fixed, paths bit-identical, steady state within " + fmt(worst);
    return v;
  });

  criterion("cli determinism", 120.0, [&] {
    Verdict v;
    const fs::path dir = fs::temp_directory_path() / "stabilab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::vector<fs::path> configs;
    for (const auto& e : fs::directory_iterator(STABILAB_SCENARIOS)) {
      if (e.path().extension() == ".json") configs.push_back(e.path());
    }
    std::sort(configs.begin(), configs.end());
    int identical = 0;
    for (const auto& cfg : configs) {
      std::string outputs[2];
      for (int k = 0; k < 2; ++k) {
        const fs::path out = dir / (cfg.stem().string() + std::to_string(k) + ".csv");
        const std::string cmd = std::string("\"") + STABILAB_EXE + "\" \"" + cfg.string() +
                                "\" --out \"" + out.string() + "\" > /dev/null 2>&1";
        const int status = std::system(cmd.c_str());
        v.require(WIFEXITED(status) && WEXITSTATUS(status) == 0, cfg.stem().string() + " failed");
        outputs[k] = slurp(out);
      }
      v.require(!outputs[0].empty() && outputs[0] == outputs[1], cfg.stem().string() + " differs");
      identical += !outputs[0].empty() && outputs[0] == outputs[1];
    }
    v.require(configs.size() >= 14, "only " + std::to_string(configs.size()) + " scenarios found");
    if (v.pass) v.detail = std::to_string(identical) + " scenarios byte-identical";
    return v;
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
