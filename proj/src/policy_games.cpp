#include "stabilab/policy_games.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stabilab/error.hpp"

namespace stabilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

BGEquilibrium barro_gordon_equilibrium(double b, const LossSpec& ls) {
  if (b == 0.0) throw Error(ErrorKind::Uncontrollable, "b = 0: the instrument cannot move pi");
  if (!(ls.r > 0.0) || !(ls.q >= 0.0) || !(ls.beta > 0.0 && ls.beta <= 1.0) ||
      !(ls.pi_bias >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "need r > 0, q >= 0, beta in (0,1], pi_bias >= 0");
  }
  // First-order condition 2 beta q (pi - pi_D) + 2 (r/b^2) pi = 0.
  const double weight = ls.beta * ls.q;
  const double cost = ls.r / (b * b);
  BGEquilibrium eq;
  eq.pi_star = weight == 0.0 ? 0.0 : weight / (weight + cost) * ls.pi_bias;
  eq.i_star = eq.pi_star / b;
  eq.loss_discretion = weight * eq.pi_star * eq.pi_star + ls.r * eq.i_star * eq.i_star;
  eq.loss_rules = 0.0;
  return eq;
}

// ---------------------------------------------------------------------------

std::string_view to_string(MisperceptionVerdict v) {
  switch (v) {
    case MisperceptionVerdict::Converged: return "Converged";
    case MisperceptionVerdict::Deteriorated: return "Deteriorated";
    case MisperceptionVerdict::Diverged: return "Diverged";
  }
  return "Unknown";
}

MisperceptionRun kp_misperception_iterate(const Transmission& tr, const LossSpec& ls,
                                          std::size_t n_iter) {
  if (n_iter == 0) throw Error(ErrorKind::InvalidArgument, "need at least one iteration");
  if (tr.b == 0.0) throw Error(ErrorKind::Uncontrollable, "b = 0");

  MisperceptionRun run;
  run.rules_loss = policy_loss(tr, ls, 0.0, 1.0);
  const double bound = 1.0 / std::sqrt(ls.beta);
  bool diverged = false;
  bool deteriorated = false;

  double perceived = tr.a;
  for (std::size_t k = 0; k < n_iter; ++k) {
    const double f = riccati_solve(Transmission{perceived, tr.b, tr.sigma_eps}, ls).f_star;
    const double lambda = tr.a + tr.b * f;
    const double loss = policy_loss(tr, ls, f, 1.0);
    run.perceived_a_path.push_back(perceived);
    run.f_path.push_back(f);
    run.true_lambda_path.push_back(lambda);
    run.loss_path.push_back(loss);
    diverged = diverged || std::abs(lambda) >= bound;
    deteriorated = deteriorated || loss > run.rules_loss;
    perceived = lambda;
  }
  run.verdict = diverged       ? MisperceptionVerdict::Diverged
                : deteriorated ? MisperceptionVerdict::Deteriorated
                               : MisperceptionVerdict::Converged;
  return run;
}

// ---------------------------------------------------------------------------
// Stackelberg

namespace {

void validate(const StackelbergModel& m, const LossSpec& ls) {
  const bool ok = m.delta > 0.0 && m.delta < 1.0 && m.kappa != 0.0 && std::isfinite(m.kappa) &&
                  m.b != 0.0 && std::isfinite(m.b) && m.rho >= 0.0 && m.rho < 1.0 &&
                  ls.q > 0.0 && ls.r > 0.0 && ls.beta > 0.0 && ls.beta <= 1.0;
  if (!ok) {
    throw Error(ErrorKind::NoStablePlan,
                "need delta in (0,1), kappa != 0, b != 0, rho in [0,1), q > 0, r > 0, "
                "beta in (0,1]");
  }
}

double plan_loss(const LossSpec& ls, const std::vector<double>& pi, const std::vector<double>& i) {
  double loss = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t < pi.size(); ++t) {
    loss += 0.5 * discount * (ls.q * pi[t] * pi[t] + ls.r * i[t] * i[t]);
    discount *= ls.beta;
  }
  return loss;
}

StackelbergPlan solve_plan(const StackelbergModel& m, const LossSpec& ls, double z0,
                           std::size_t horizon) {
  const std::size_t n = horizon;  // multipliers mu[0..H-1]; mu[-1] = mu[H] = 0
  std::vector<double> z(horizon + 1);
  z[0] = z0;
  for (std::size_t t = 1; t <= horizon; ++t) z[t] = m.rho * z[t - 1];

  // (delta/beta) mu[t-1] - d mu[t] + delta mu[t+1] = q kappa z[t]
  const double lower = m.delta / ls.beta;
  const double diag = -(1.0 + m.delta * m.delta / ls.beta + ls.q * m.b * m.b / ls.r);
  const double upper = m.delta;

  // Thomas algorithm.
  std::vector<double> c_prime(n), d_prime(n), mu(n);
  double pivot = diag;
  for (std::size_t t = 0; t < n; ++t) {
    if (t > 0) pivot = diag - lower * c_prime[t - 1];
    if (pivot == 0.0 || !std::isfinite(pivot)) {
      throw Error(ErrorKind::NoStablePlan, "singular first-order system");
    }
    const double rhs = ls.q * m.kappa * z[t];
    c_prime[t] = upper / pivot;
    d_prime[t] = (rhs - (t > 0 ? lower * d_prime[t - 1] : 0.0)) / pivot;
  }
  mu[n - 1] = d_prime[n - 1];
  for (std::size_t t = n - 1; t-- > 0;) mu[t] = d_prime[t] - c_prime[t] * mu[t + 1];

  StackelbergPlan plan;
  plan.model = m;
  plan.loss_spec = ls;
  plan.z_path = std::move(z);
  plan.pi_path.resize(horizon + 1);
  plan.i_path.resize(horizon + 1);
  plan.gamma_path.resize(horizon + 1);
  for (std::size_t t = 0; t <= horizon; ++t) {
    const double prev = t > 0 ? mu[t - 1] : 0.0;
    const double cur = t < n ? mu[t] : 0.0;
    plan.pi_path[t] = (lower * prev - cur) / ls.q;
    plan.i_path[t] = m.b / ls.r * cur;
    plan.gamma_path[t] = prev;
  }
  plan.loss = plan_loss(ls, plan.pi_path, plan.i_path);
  return plan;
}

}  // namespace

StackelbergPlan stackelberg_commit(const StackelbergModel& m, const LossSpec& ls, double z0,
                                   std::size_t horizon) {
  validate(m, ls);
  if (horizon < 2) throw Error(ErrorKind::InvalidArgument, "horizon must be >= 2");
  if (!std::isfinite(z0)) throw Error(ErrorKind::InvalidArgument, "z0 must be finite");
  return solve_plan(m, ls, z0, horizon);
}

StackelbergPlan stackelberg_commit_converged(const StackelbergModel& model, const LossSpec& ls,
                                             double z0, std::size_t horizon, double tol) {
  constexpr std::size_t kMaxHorizon = std::size_t{1} << 20;
  StackelbergPlan plan = stackelberg_commit(model, ls, z0, std::max<std::size_t>(horizon, 2));
  while (plan.horizon() < kMaxHorizon) {
    StackelbergPlan longer = stackelberg_commit(model, ls, z0, 2 * plan.horizon());
    const bool done = std::abs(longer.loss - plan.loss) < tol * std::max(1.0, plan.loss);
    plan = std::move(longer);
    if (done) return plan;
  }
  throw Error(ErrorKind::NoConvergence, "plan loss did not settle as the horizon grew");
}

Reoptimization stackelberg_reoptimize(const StackelbergPlan& plan, std::size_t s) {
  const std::size_t h = plan.horizon();
  if (s < plan.start || s >= h) {
    throw Error(ErrorKind::InvalidArgument, "re-optimization date must lie in [start, horizon)");
  }
  const std::size_t off = s - plan.start;
  const StackelbergModel& m = plan.model;
  const LossSpec& ls = plan.loss_spec;

  Reoptimization out;
  if (off == 0) {
    out.continuation = plan;
  } else {
    out.continuation = solve_plan(m, ls, plan.z_path[off], h - s);
  }
  out.continuation.start = s;
  out.continuation.reoptimized_at = s;

  for (std::size_t k = 0; k < out.continuation.pi_path.size(); ++k) {
    out.deviation =
        std::max(out.deviation, std::abs(plan.pi_path[off + k] - out.continuation.pi_path[k]));
  }

  StackelbergPlan cat = plan;
  cat.reoptimized_at = s;
  for (std::size_t k = 0; k < out.continuation.pi_path.size(); ++k) {
    cat.pi_path[off + k] = out.continuation.pi_path[k];
    cat.i_path[off + k] = out.continuation.i_path[k];
    cat.gamma_path[off + k] = out.continuation.gamma_path[k];
  }
  // The follower's condition ties earlier pi to the re-optimized future.
  for (std::size_t k = off; k-- > 0;) {
    cat.pi_path[k] = m.delta * cat.pi_path[k + 1] + m.kappa * cat.z_path[k] + m.b * cat.i_path[k];
  }
  cat.loss = plan_loss(ls, cat.pi_path, cat.i_path);
  out.concatenated = std::move(cat);
  return out;
}

double stackelberg_rule_loss(const StackelbergModel& m, const LossSpec& ls, double f, double z0) {
  validate(m, ls);
  if (z0 == 0.0) return 0.0;
  // pi = c z with c = kappa/(1 - delta rho - b f)
  const double den = 1.0 - m.delta * m.rho - m.b * f;
  if (den == 0.0) return kInf;
  const double c = m.kappa / den;
  const double disc = 1.0 - ls.beta * m.rho * m.rho;
  return 0.5 * (ls.q + ls.r * f * f) * c * c * z0 * z0 / disc;
}

}  // namespace stabilab
