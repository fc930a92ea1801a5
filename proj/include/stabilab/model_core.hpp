#pragma once

// First-order single-input single-output transmission
//
//   pi[t+1] = a * pi[t] + b * i[t] + eps[t]
//
// together with the policy feedback laws that close the loop, the
// classification of the resulting persistence, stochastic simulation and the
// cobweb market recursion.

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

namespace stabilab {

/// Open-loop law of motion faced by the policy maker.
struct Transmission {
  double a = 0.0;          ///< open-loop persistence
  double b = 0.0;          ///< instrument impact
  double sigma_eps = 0.0;  ///< structural shock standard deviation
};

/// Private sector block whose own feedback produces the open-loop persistence.
struct PrivateSector {
  double a_prime = 0.0;
  double b_prime = 0.0;
  double f_prime = 0.0;
};

namespace rule {
struct Peg {};
struct Proportional {
  double f = 0.0;
};
/// i[t] = fp*pi[t] + fi*sum_{s<=t} pi[s] + fd*(pi[t] - pi[t-1])
struct Pid {
  double fp = 0.0;
  double fi = 0.0;
  double fd = 0.0;
};
/// i[t] = rho_i*i[t-1] + f_x*pi[t]
struct Inertial {
  double rho_i = 0.0;
  double f_x = 0.0;
};
}  // namespace rule

using Rule = std::variant<rule::Peg, rule::Proportional, rule::Pid, rule::Inertial>;

enum class FeedbackClass {
  NoFeedback,
  NegativeFeedback,
  PositiveFeedback,
  /// b*f < 0 but the rule pushes persistence below zero.
  Overshooting,
};

enum class StabilityClass { ZeroPersistence, Stationary, UnitRoot, Explosive };

std::string_view to_string(FeedbackClass c);
std::string_view to_string(StabilityClass c);

struct ClosedLoop {
  double lambda = 0.0;
  FeedbackClass feedback = FeedbackClass::NoFeedback;
  StabilityClass stability = StabilityClass::Stationary;

  /// Negative feedback that is also locally stable: 0 <= lambda < min(a, 1).
  bool stabilizing_negative_feedback() const {
    return feedback == FeedbackClass::NegativeFeedback &&
           (stability == StabilityClass::Stationary ||
            stability == StabilityClass::ZeroPersistence);
  }
};

/// Simulated or ingested series. Every vector has the same length; row t
/// holds pi[t], the instrument set at t, and the shocks drawn at t.
struct Trajectory {
  std::vector<std::size_t> t;
  std::vector<double> pi;
  std::vector<double> i;
  std::vector<double> eps;
  std::vector<double> eta;

  std::size_t size() const { return t.size(); }
};

struct CobwebParams {
  double f_demand = 0.0;  ///< price response to excess supply, <= 0
  double b_supply = 0.0;  ///< supply response to price, >= 0
  double e0 = 0.0;        ///< initial excess supply
  double p_star = 0.0;    ///< equilibrium price
};

enum class CobwebRegime { OneStepAdjustment, DampedOscillation, PerpetualCycle, Divergent };

std::string_view to_string(CobwebRegime r);

struct CobwebPath {
  std::vector<double> excess_supply;
  std::vector<double> price;
  CobwebRegime regime = CobwebRegime::OneStepAdjustment;
};

/// |lambda| within this distance of 1 is a unit root; |lambda| below it is zero
/// persistence.
inline constexpr double kKnifeEdgeTolerance = 1e-12;

/// A = A' + B'F'
double compose_private(const PrivateSector& ps);

StabilityClass classify_stability(double lambda);

/// Closed-loop persistence and its classification. Only Peg and Proportional
/// rules have a scalar closed loop; dynamic rules are rejected.
ClosedLoop classify(const Transmission& tr, const Rule& rule);
ClosedLoop classify(const Transmission& tr, double gain);

/// Rows 0..horizon. pi[0] = pi0, i[t] follows `rule` plus an N(0, sigma_eta^2)
/// policy shock, eps[t] ~ N(0, tr.sigma_eps^2).
Trajectory simulate_trajectory(const Transmission& tr, const Rule& rule, double pi0,
                               std::size_t horizon, double sigma_eta, std::uint64_t seed);

/// Stationary variance of x[t+1] = lambda*x[t] + eps[t].
double ar1_variance(double lambda, double sigma_eps);

/// Excess supply e[t+1] = b*f*e[t], price p[t] = p* + f*e[t]; rows 0..horizon.
CobwebPath cobweb_simulate(const CobwebParams& cw, std::size_t horizon);
CobwebRegime cobweb_regime(double bf);

}  // namespace stabilab
