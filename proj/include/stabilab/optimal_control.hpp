#pragma once

// Discounted scalar linear-quadratic regulator
//
//   minimize  1/2 * sum_t beta^t (q*pi[t]^2 + r*i[t]^2)
//   s.t.      pi[t+1] = a*pi[t] + b*i[t] + eps[t]
//
// with value function 1/2 * p * pi^2 and optimal rule i = f_star * pi.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stabilab/model_core.hpp"

namespace stabilab {

struct LossSpec {
  double q = 1.0;        ///< target weight, >= 0
  double r = 1.0;        ///< instrument weight, > 0
  double beta = 1.0;     ///< discount factor in (0, 1]
  double pi_bias = 0.0;  ///< policy maker's distorted steady state, >= 0
};

struct RiccatiSolution {
  double p = 0.0;
  double f_star = 0.0;
  double lambda_star = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

struct RiccatiOptions {
  double tol = 1e-10;
  std::size_t max_iter = 1'000'000;
};

/// One step of the Riccati map p -> q + beta a^2 p - (beta a b p)^2/(r + beta b^2 p).
double riccati_map(const Transmission& tr, const LossSpec& ls, double p);

/// Positive (stabilizing) root of the scalar algebraic Riccati equation.
double riccati_closed_form(const Transmission& tr, const LossSpec& ls);

/// Value iteration from p = q, cross-checked against the closed-form root.
/// Throws UnboundedLoss when no bounded stabilizing solution exists and
/// NoConvergence when iteration stalls or disagrees with the closed form.
RiccatiSolution riccati_solve(const Transmission& tr, const LossSpec& ls,
                              const RiccatiOptions& opts = {});

/// f = -beta a b p / (r + beta b^2 p)
double riccati_gain(const Transmission& tr, const LossSpec& ls, double p);

/// lambda*(R/Q) for each grid value, with q = 1 and r = ratio.
std::vector<double> optimal_persistence_curve(const Transmission& tr, double beta,
                                              std::span<const double> ratio_grid);

/// Cost ratio R/Q whose optimal persistence equals lambda_target, found by
/// bisection on log(R/Q). lambda_target must lie in (0, min(a, 1/(beta a))).
double rationalizing_cost_ratio(const Transmission& tr, double beta, double lambda_target,
                                double tol = 1e-12);

/// Loss of the proportional rule i = f*pi from pi0 with no shocks; +infinity
/// when the discounted loss diverges.
double policy_loss(const Transmission& tr, const LossSpec& ls, double f, double pi0);

/// True iff the optimal gain is zero (the peg is optimal).
bool peg_optimality_check(const Transmission& tr, const LossSpec& ls);

struct RobustResult {
  double f_robust = 0.0;
  double worst_case_loss = 0.0;
  double worst_case_b = 0.0;
};

/// argmin over f_grid of max over b_grid of policy_loss(a, b, f). Requires
/// b_min <= b_max < 0 and every b_grid value inside [b_min, b_max].
RobustResult robust_minimax_gain(double a, double b_min, double b_max, const LossSpec& ls,
                                 double pi0, std::span<const double> f_grid,
                                 std::span<const double> b_grid);

/// `n` evenly spaced points from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

struct LqgResult {
  Trajectory trajectory;
  std::vector<double> filtered;  ///< pi_hat[t] used to set i[t]
  std::vector<double> gains;     ///< Kalman gain at each update
  double f_star = 0.0;
  double realized_loss = 0.0;    ///< 1/2 sum beta^t (q pi^2 + r i^2) over the path
};

/// Certainty-equivalent control i[t] = f_star * pi_hat[t] with pi_hat from a
/// Kalman filter on y[t] = pi[t] + nu[t], nu ~ N(0, obs_noise_std^2).
/// Structural shocks come from the same stream simulate_trajectory uses, so a
/// noiseless observer reproduces the full-information path exactly.
LqgResult lqg_simulate(const Transmission& tr, const LossSpec& ls, double obs_noise_std,
                       double pi0, std::size_t horizon, std::uint64_t seed);

}  // namespace stabilab
