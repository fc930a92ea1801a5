#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "stabilab/model_core.hpp"
#include "stabilab/optimal_control.hpp"

namespace stabilab {

// ---------------------------------------------------------------------------
// Barro-Gordon: static transmission pi = b*i, policy maker targets pi_bias.

struct BGEquilibrium {
  double pi_star = 0.0;
  double i_star = 0.0;
  /// Per-period social loss beta*q*pi^2 + r*i^2 at the discretionary outcome.
  double loss_discretion = 0.0;
  /// Same loss under the peg (pi = i = 0).
  double loss_rules = 0.0;
};

/// pi* = beta q/(beta q + r/b^2) * pi_bias, i* = pi*/b.
BGEquilibrium barro_gordon_equilibrium(double b, const LossSpec& ls);

// ---------------------------------------------------------------------------
// Misperception: the planner treats last round's closed-loop persistence as
// the structural one and re-optimizes against it.

enum class MisperceptionVerdict { Converged, Deteriorated, Diverged };

std::string_view to_string(MisperceptionVerdict v);

struct MisperceptionRun {
  std::vector<double> f_path;
  std::vector<double> perceived_a_path;
  std::vector<double> true_lambda_path;
  std::vector<double> loss_path;  ///< policy_loss under the true (a, b), pi0 = 1
  double rules_loss = 0.0;        ///< the same loss at f = 0
  MisperceptionVerdict verdict = MisperceptionVerdict::Converged;
};

/// Iteration k solves the regulator for (perceived_a[k], b) with
/// perceived_a[0] = a and perceived_a[k] = a + b*f[k-1].
/// Diverged if some |a + b f[k]| >= 1/sqrt(beta); otherwise Deteriorated if
/// some loss exceeds the rules loss; otherwise Converged.
MisperceptionRun kp_misperception_iterate(const Transmission& tr, const LossSpec& ls,
                                          std::size_t n_iter);

// ---------------------------------------------------------------------------
// Stackelberg leader with a forward-looking follower:
//
//   z[t+1]  = rho * z[t]
//   pi[t]   = delta * pi[t+1] + kappa * z[t] + b * i[t]
//   loss    = 1/2 sum_{t=0}^{H} beta^t (q pi[t]^2 + r i[t]^2),   i[H] = 0
//
// solved exactly on the finite horizon from the Lagrangian first-order
// conditions. gamma[t] is the multiplier on the follower's condition dated
// t-1, which the plan inherits at t; gamma[0] = 0.

struct StackelbergModel {
  double delta = 0.99;
  double kappa = 1.0;
  double b = -1.0;
  double rho = 0.8;
};

struct StackelbergPlan {
  StackelbergModel model;
  LossSpec loss_spec;
  std::size_t start = 0;  ///< calendar date of row 0
  std::vector<double> pi_path;
  std::vector<double> i_path;
  std::vector<double> gamma_path;
  std::vector<double> z_path;
  double loss = 0.0;  ///< discounted from row 0
  std::optional<std::size_t> reoptimized_at;

  std::size_t horizon() const { return start + pi_path.size() - 1; }
};

/// Rows 0..horizon. Throws NoStablePlan for parameters outside
/// delta in (0,1), kappa != 0, b != 0, rho in [0,1), q > 0, r > 0.
StackelbergPlan stackelberg_commit(const StackelbergModel& model, const LossSpec& ls, double z0,
                                   std::size_t horizon);

/// Doubles the horizon from `horizon` until the plan loss moves by less than
/// tol (relative to max(1, loss)); returns the longer plan.
StackelbergPlan stackelberg_commit_converged(const StackelbergModel& model, const LossSpec& ls,
                                             double z0, std::size_t horizon = 100,
                                             double tol = 1e-8);

struct Reoptimization {
  StackelbergPlan continuation;  ///< fresh plan from date s with gamma reset
  /// Whole-horizon plan: the original instruments before s, the continuation
  /// from s, and the follower's pi implied by both. Its loss is evaluated
  /// under the date-0 objective.
  StackelbergPlan concatenated;
  double deviation = 0.0;  ///< max |pi_old - pi_new| over dates s..H
};

/// Re-solves from date s (0 <= s < horizon) given z[s].
Reoptimization stackelberg_reoptimize(const StackelbergPlan& plan, std::size_t s);

/// Infinite-horizon loss of the time-invariant rule i = f*pi from z0; +inf when
/// the rule admits no bounded solution or the discounted sum diverges.
double stackelberg_rule_loss(const StackelbergModel& model, const LossSpec& ls, double f,
                             double z0);

}  // namespace stabilab
