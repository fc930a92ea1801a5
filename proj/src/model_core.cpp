#include "stabilab/model_core.hpp"

#include <cmath>
#include <string>

#include "stabilab/error.hpp"
#include "stabilab/random.hpp"

namespace stabilab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw Error(ErrorKind::InvalidArgument, std::string(name) + " must be finite");
  }
}

void validate(const Transmission& tr) {
  require_finite(tr.a, "a");
  require_finite(tr.b, "b");
  require_finite(tr.sigma_eps, "sigma_eps");
  if (tr.sigma_eps < 0.0) throw Error(ErrorKind::InvalidArgument, "sigma_eps must be >= 0");
}

// Stateful evaluation of a feedback law along a path.
class RuleState {
 public:
  explicit RuleState(const Rule& rule) : rule_(rule) {}

  double instrument(double pi) {
    const double out = std::visit(
        overloaded{
            [](const rule::Peg&) { return 0.0; },
            [&](const rule::Proportional& r) { return r.f * pi; },
            [&](const rule::Pid& r) {
              if (first_) prev_pi_ = pi;
              running_sum_ += pi;
              double v = r.fp * pi;
              if (r.fi != 0.0) v += r.fi * running_sum_;
              if (r.fd != 0.0) v += r.fd * (pi - prev_pi_);
              prev_pi_ = pi;
              return v;
            },
            [&](const rule::Inertial& r) { return r.rho_i * prev_i_ + r.f_x * pi; },
        },
        rule_);
    first_ = false;
    return out;
  }

  // The realized instrument (including any policy shock) feeds inertial rules.
  void record(double i) { prev_i_ = i; }

 private:
  const Rule& rule_;
  bool first_ = true;
  double running_sum_ = 0.0;
  double prev_pi_ = 0.0;
  double prev_i_ = 0.0;
};

}  // namespace

std::string_view to_string(FeedbackClass c) {
  switch (c) {
    case FeedbackClass::NoFeedback: return "NoFeedback";
    case FeedbackClass::NegativeFeedback: return "NegativeFeedback";
    case FeedbackClass::PositiveFeedback: return "PositiveFeedback";
    case FeedbackClass::Overshooting: return "Overshooting";
  }
  return "?";
}

std::string_view to_string(StabilityClass c) {
  switch (c) {
    case StabilityClass::ZeroPersistence: return "ZeroPersistence";
    case StabilityClass::Stationary: return "Stationary";
    case StabilityClass::UnitRoot: return "UnitRoot";
    case StabilityClass::Explosive: return "Explosive";
  }
  return "?";
}

std::string_view to_string(CobwebRegime r) {
  switch (r) {
    case CobwebRegime::OneStepAdjustment: return "OneStepAdjustment";
    case CobwebRegime::DampedOscillation: return "DampedOscillation";
    case CobwebRegime::PerpetualCycle: return "PerpetualCycle";
    case CobwebRegime::Divergent: return "Divergent";
  }
  return "?";
}

double compose_private(const PrivateSector& ps) {
  return ps.a_prime + ps.b_prime * ps.f_prime;
}

StabilityClass classify_stability(double lambda) {
  const double m = std::abs(lambda);
  if (m <= kKnifeEdgeTolerance) return StabilityClass::ZeroPersistence;
  if (std::abs(m - 1.0) <= kKnifeEdgeTolerance) return StabilityClass::UnitRoot;
  if (m < 1.0) return StabilityClass::Stationary;
  return StabilityClass::Explosive;
}

ClosedLoop classify(const Transmission& tr, double gain) {
  validate(tr);
  require_finite(gain, "gain");
  ClosedLoop cl;
  cl.lambda = tr.a + tr.b * gain;
  cl.stability = classify_stability(cl.lambda);

  const double bf = tr.b * gain;
  if (gain == 0.0 || bf == 0.0) {
    // b == 0 leaves the loop open whatever the gain.
    cl.feedback = FeedbackClass::NoFeedback;
  } else if (bf > 0.0) {
    cl.feedback = FeedbackClass::PositiveFeedback;
  } else if (cl.lambda >= -kKnifeEdgeTolerance) {
    cl.feedback = FeedbackClass::NegativeFeedback;
  } else {
    cl.feedback = FeedbackClass::Overshooting;
  }
  return cl;
}

ClosedLoop classify(const Transmission& tr, const Rule& rule) {
  const double gain = std::visit(
      overloaded{
          [](const rule::Peg&) { return 0.0; },
          [](const rule::Proportional& r) { return r.f; },
          [](const rule::Pid&) -> double {
            throw Error(ErrorKind::InvalidArgument,
                        "PID rules have no scalar closed loop; use pid_simulate");
          },
          [](const rule::Inertial&) -> double {
            throw Error(ErrorKind::InvalidArgument,
                        "inertial rules have no scalar closed loop");
          },
      },
      rule);
  return classify(tr, gain);
}

Trajectory simulate_trajectory(const Transmission& tr, const Rule& rule, double pi0,
                               std::size_t horizon, double sigma_eta, std::uint64_t seed) {
  validate(tr);
  require_finite(pi0, "pi0");
  if (horizon == 0) throw Error(ErrorKind::EmptyHorizon, "horizon must be >= 1");
  if (!(sigma_eta >= 0.0) || !std::isfinite(sigma_eta)) {
    throw Error(ErrorKind::InvalidArgument, "sigma_eta must be finite and >= 0");
  }

  const std::size_t rows = horizon + 1;
  Trajectory traj;
  traj.t.resize(rows);
  traj.pi.resize(rows);
  traj.i.resize(rows);
  traj.eps.resize(rows);
  traj.eta.resize(rows);

  ShockStream shocks(seed, tr.sigma_eps, sigma_eta);
  RuleState state(rule);
  double pi = pi0;
  for (std::size_t t = 0; t < rows; ++t) {
    const auto draw = shocks.next();
    const double i = state.instrument(pi) + draw.eta;
    state.record(i);
    traj.t[t] = t;
    traj.pi[t] = pi;
    traj.i[t] = i;
    traj.eps[t] = draw.eps;
    traj.eta[t] = draw.eta;
    pi = tr.a * pi + tr.b * i + draw.eps;
  }
  return traj;
}

double ar1_variance(double lambda, double sigma_eps) {
  if (!(std::abs(lambda) < 1.0)) {
    throw Error(ErrorKind::NonStationary, "|lambda| >= 1 has no stationary variance");
  }
  return sigma_eps * sigma_eps / (1.0 - lambda * lambda);
}

CobwebRegime cobweb_regime(double bf) {
  if (bf == 0.0) return CobwebRegime::OneStepAdjustment;
  if (bf == -1.0) return CobwebRegime::PerpetualCycle;
  if (bf > -1.0) return CobwebRegime::DampedOscillation;
  return CobwebRegime::Divergent;
}

CobwebPath cobweb_simulate(const CobwebParams& cw, std::size_t horizon) {
  if (horizon == 0) throw Error(ErrorKind::EmptyHorizon, "horizon must be >= 1");
  if (!(cw.f_demand <= 0.0) || !(cw.b_supply >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "cobweb needs f_demand <= 0 and b_supply >= 0");
  }
  const double bf = cw.b_supply * cw.f_demand;
  CobwebPath path;
  path.regime = cobweb_regime(bf);
  path.excess_supply.resize(horizon + 1);
  path.price.resize(horizon + 1);
  double e = cw.e0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    path.excess_supply[t] = e;
    path.price[t] = cw.p_star + cw.f_demand * e;
    e *= bf;
  }
  return path;
}

}  // namespace stabilab
