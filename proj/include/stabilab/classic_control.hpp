#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "stabilab/model_core.hpp"

namespace stabilab {

/// Accelerationist Phillips curve pi[t+1] = pi[t] + a*x[t] with IS curve
/// x[t] = -b*(i[t] - pi[t]).
struct ISPhillips {
  double a_slope = 0.0;
  double b_is = 0.0;
};

/// Taylor (1993): i = 1.5*pi + 0.5*x + 1, annual percent.
struct TaylorRule93 {
  static constexpr double pi_coef = 1.5;
  static constexpr double gap_coef = 0.5;
  static constexpr double intercept = 1.0;
};

/// Static closed loop pi_cl = pi_ol + i.
struct StaticFriedman {
  double sigma_ol = 0.0;
  double sigma_i = 0.0;
  double rho = 0.0;  ///< corr(i, pi_ol)
};

struct GainInterval {
  double low = 0.0;   ///< exclusive
  double high = 0.0;  ///< exclusive
  bool contains(double f) const { return f > low && f < high; }
};

struct PidResult {
  Trajectory trajectory;
  /// Rows/columns: (pi[t], sum_{s<t} pi[s], pi[t-1]).
  std::array<std::array<double, 3>, 3> companion{};
  double spectral_radius = 0.0;
  bool stable() const { return spectral_radius < 1.0; }
};

struct FriedmanCheck {
  double closed_loop_variance = 0.0;
  bool stabilizing = false;
};

/// F* = (lambda_target - a)/b
double pole_placement_gain(const Transmission& tr, double lambda_target);

/// a = 1 + a_slope*b_is, b = -a_slope*b_is
Transmission taylor_transmission(const ISPhillips& isp);

/// Gains giving 0 < lambda < 1 under the IS-Phillips transmission:
/// (1, -A/B). The upper end is the zero-persistence gain.
GainInterval taylor_principle_bounds(const ISPhillips& isp);

PidResult pid_simulate(const Transmission& tr, const rule::Pid& pid, double pi0,
                       std::size_t horizon, std::uint64_t seed, double sigma_eta = 0.0);

/// Companion matrix of the PID loop and its spectral radius. When fi == 0 the
/// running-sum state never feeds back and its unit eigenvalue is excluded.
std::array<std::array<double, 3>, 3> pid_companion(const Transmission& tr, const rule::Pid& pid);
double pid_spectral_radius(const Transmission& tr, const rule::Pid& pid);

double taylor_rule_eval(double pi, double gap);

FriedmanCheck friedman_static_check(const StaticFriedman& sf);

}  // namespace stabilab
