#include "stabilab/optimal_control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stabilab/error.hpp"
#include "stabilab/estimation.hpp"
#include "stabilab/random.hpp"

namespace stabilab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const LossSpec& ls) {
  if (!(ls.r > 0.0) || !std::isfinite(ls.r)) throw Error(ErrorKind::InvalidArgument, "r must be > 0");
  if (!(ls.q >= 0.0) || !std::isfinite(ls.q)) throw Error(ErrorKind::InvalidArgument, "q must be >= 0");
  if (!(ls.beta > 0.0 && ls.beta <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "beta must lie in (0, 1]");
  }
}

void validate(const Transmission& tr) {
  if (!std::isfinite(tr.a) || !std::isfinite(tr.b)) {
    throw Error(ErrorKind::InvalidArgument, "transmission parameters must be finite");
  }
}

}  // namespace

double riccati_map(const Transmission& tr, const LossSpec& ls, double p) {
  // beta a^2 p - (beta a b p)^2/(r + beta b^2 p) == beta a^2 p r/(r + beta b^2 p)
  return ls.q + ls.beta * tr.a * tr.a * p * ls.r / (ls.r + ls.beta * tr.b * tr.b * p);
}

double riccati_gain(const Transmission& tr, const LossSpec& ls, double p) {
  return -ls.beta * tr.a * tr.b * p / (ls.r + ls.beta * tr.b * tr.b * p);
}

double riccati_closed_form(const Transmission& tr, const LossSpec& ls) {
  validate(tr);
  validate(ls);
  const double ba2 = ls.beta * tr.a * tr.a;
  if (tr.b == 0.0) {
    if (ba2 >= 1.0) throw Error(ErrorKind::UnboundedLoss, "b = 0 and beta a^2 >= 1");
    return ls.q / (1.0 - ba2);
  }
  // beta b^2 p^2 + (r(1 - beta a^2) - q beta b^2) p - q r = 0
  const double qa = ls.beta * tr.b * tr.b;
  const double qb = ls.r * (1.0 - ba2) - ls.q * qa;
  const double qc = -ls.q * ls.r;
  const double disc = std::sqrt(qb * qb - 4.0 * qa * qc);
  if (qb >= 0.0) {
    const double den = qb + disc;
    return den > 0.0 ? -2.0 * qc / den : 0.0;
  }
  return (-qb + disc) / (2.0 * qa);
}

RiccatiSolution riccati_solve(const Transmission& tr, const LossSpec& ls,
                              const RiccatiOptions& opts) {
  validate(tr);
  validate(ls);
  const double ba2 = ls.beta * tr.a * tr.a;
  if (tr.b == 0.0 && ba2 >= 1.0) {
    throw Error(ErrorKind::UnboundedLoss, "uncontrollable transmission with beta a^2 >= 1");
  }
  if (tr.b != 0.0 && ls.q == 0.0 && std::abs(ba2 - 1.0) <= kKnifeEdgeTolerance) {
    throw Error(ErrorKind::UnboundedLoss, "q = 0 with beta a^2 = 1 has no bounded optimum");
  }

  // p = 0 is a fixed point when q = 0; above the beta a^2 = 1 threshold it is
  // the destabilizing root, so start from a positive value instead.
  double p = ls.q;
  if (ls.q == 0.0 && tr.b != 0.0 && ba2 > 1.0) p = ls.r / (ls.beta * tr.b * tr.b);

  RiccatiSolution sol;
  double prev_step = kInf;
  for (std::size_t k = 1; k <= opts.max_iter; ++k) {
    const double next = riccati_map(tr, ls, p);
    const double step = std::abs(next - p);
    p = next;
    sol.iterations = k;
    // Geometric tail bound: remaining error ~ step * rate / (1 - rate).
    const double rate = std::isfinite(prev_step) && prev_step > 0.0
                            ? std::min(step / prev_step, 1.0 - 1e-12)
                            : 0.0;
    if (step / (1.0 - rate) <= opts.tol * std::max(1.0, p)) {
      sol.converged = true;
      break;
    }
    prev_step = step;
  }
  if (!sol.converged) {
    throw Error(ErrorKind::NoConvergence,
                "Riccati value iteration did not converge in " + std::to_string(opts.max_iter) +
                    " iterations");
  }

  const double p_cf = riccati_closed_form(tr, ls);
  if (std::abs(p - p_cf) > 1e-6 * std::max(1.0, p_cf)) {
    throw Error(ErrorKind::NoConvergence, "value iteration and closed-form root disagree");
  }

  sol.p = p;
  sol.f_star = tr.b == 0.0 ? 0.0 : riccati_gain(tr, ls, p);
  sol.lambda_star = tr.a + tr.b * sol.f_star;
  return sol;
}

std::vector<double> optimal_persistence_curve(const Transmission& tr, double beta,
                                              std::span<const double> ratio_grid) {
  std::vector<double> out;
  out.reserve(ratio_grid.size());
  for (double ratio : ratio_grid) {
    if (!(ratio > 0.0)) throw Error(ErrorKind::InvalidArgument, "R/Q grid values must be > 0");
    out.push_back(riccati_solve(tr, LossSpec{1.0, ratio, beta, 0.0}).lambda_star);
  }
  return out;
}

double rationalizing_cost_ratio(const Transmission& tr, double beta, double lambda_target,
                                double tol) {
  if (tr.b == 0.0) throw Error(ErrorKind::Uncontrollable, "b = 0");
  const double upper = std::min(tr.a, 1.0 / (beta * tr.a));
  if (!(lambda_target > 0.0 && lambda_target < upper)) {
    throw Error(ErrorKind::InvalidArgument,
                "target persistence outside (0, min(a, 1/(beta a)))");
  }
  auto persistence = [&](double log_ratio) {
    return riccati_solve(tr, LossSpec{1.0, std::exp(log_ratio), beta, 0.0}).lambda_star;
  };
  double lo = -30.0;
  double hi = 30.0;
  if (persistence(lo) > lambda_target || persistence(hi) < lambda_target) {
    throw Error(ErrorKind::NoConvergence, "target persistence not bracketed by R/Q in [e^-30, e^30]");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double lam = persistence(mid);
    if (std::abs(lam - lambda_target) <= tol) return std::exp(mid);
    (lam < lambda_target ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double policy_loss(const Transmission& tr, const LossSpec& ls, double f, double pi0) {
  validate(tr);
  validate(ls);
  if (pi0 == 0.0) return 0.0;
  const double weight = ls.q + ls.r * f * f;
  if (weight == 0.0) return 0.0;
  const double lambda = tr.a + tr.b * f;
  const double denom = 1.0 - ls.beta * lambda * lambda;
  if (!(denom > 0.0)) return kInf;
  return 0.5 * weight * pi0 * pi0 / denom;
}

bool peg_optimality_check(const Transmission& tr, const LossSpec& ls) {
  try {
    return std::abs(riccati_solve(tr, ls).f_star) <= 1e-10;
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::UnboundedLoss) return false;
    throw;
  }
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  if (n == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
  if (n > 0) out.back() = hi;
  return out;
}

RobustResult robust_minimax_gain(double a, double b_min, double b_max, const LossSpec& ls,
                                 double pi0, std::span<const double> f_grid,
                                 std::span<const double> b_grid) {
  validate(ls);
  if (!(b_min <= b_max && b_max < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "need b_min <= b_max < 0");
  }
  if (f_grid.empty() || b_grid.empty()) {
    throw Error(ErrorKind::InvalidArgument, "gain and impact grids must be non-empty");
  }
  for (double b : b_grid) {
    if (b < b_min || b > b_max) {
      throw Error(ErrorKind::InvalidArgument, "impact grid leaves [b_min, b_max]");
    }
  }

  // Worst case per gain, then a left-to-right argmin so ties resolve to the
  // earliest grid point regardless of evaluation order.
  std::vector<double> worst(f_grid.size(), -kInf);
  std::vector<double> worst_b(f_grid.size(), b_grid.front());
  for (std::size_t k = 0; k < f_grid.size(); ++k) {
    for (double b : b_grid) {
      const double loss = policy_loss(Transmission{a, b, 0.0}, ls, f_grid[k], pi0);
      if (loss > worst[k]) {
        worst[k] = loss;
        worst_b[k] = b;
      }
    }
  }
  std::size_t best = 0;
  for (std::size_t k = 1; k < worst.size(); ++k) {
    if (worst[k] < worst[best]) best = k;
  }
  if (!std::isfinite(worst[best])) {
    throw Error(ErrorKind::NoRobustStabilizer,
                "no gain on the grid stabilizes every impact in the interval");
  }
  return RobustResult{f_grid[best], worst[best], worst_b[best]};
}

LqgResult lqg_simulate(const Transmission& tr, const LossSpec& ls, double obs_noise_std,
                       double pi0, std::size_t horizon, std::uint64_t seed) {
  if (!(obs_noise_std >= 0.0) || !std::isfinite(obs_noise_std)) {
    throw Error(ErrorKind::InvalidArgument, "observation noise std must be >= 0");
  }
  if (horizon == 0) throw Error(ErrorKind::EmptyHorizon, "horizon must be >= 1");
  if (!(tr.sigma_eps >= 0.0)) throw Error(ErrorKind::InvalidArgument, "sigma_eps must be >= 0");

  LqgResult out;
  out.f_star = riccati_solve(tr, ls).f_star;

  const std::size_t rows = horizon + 1;
  Trajectory& traj = out.trajectory;
  traj.t.resize(rows);
  traj.pi.resize(rows);
  traj.i.resize(rows);
  traj.eps.resize(rows);
  traj.eta.resize(rows);
  out.filtered.resize(rows);
  out.gains.resize(rows);

  ShockStream shocks(seed, tr.sigma_eps, 0.0);
  GaussianStream measurement(derived_seed(seed, 1));

  double pi = pi0;
  double prior_mean = pi0;  // initial state known exactly
  double prior_var = 0.0;
  double discount = 1.0;
  for (std::size_t t = 0; t < rows; ++t) {
    const auto draw = shocks.next();
    const double y = pi + measurement.draw(obs_noise_std);
    const KalmanState post = kalman_update(prior_mean, prior_var, obs_noise_std, y);
    const double i = out.f_star * post.estimate + draw.eta;

    traj.t[t] = t;
    traj.pi[t] = pi;
    traj.i[t] = i;
    traj.eps[t] = draw.eps;
    traj.eta[t] = draw.eta;
    out.filtered[t] = post.estimate;
    out.gains[t] = post.gain;
    out.realized_loss += 0.5 * discount * (ls.q * pi * pi + ls.r * i * i);
    discount *= ls.beta;

    pi = tr.a * pi + tr.b * i + draw.eps;
    prior_mean = tr.a * post.estimate + tr.b * i;
    prior_var = tr.a * tr.a * post.variance + tr.sigma_eps * tr.sigma_eps;
  }
  return out;
}

}  // namespace stabilab
