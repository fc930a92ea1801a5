#include "stabilab/classic_control.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "stabilab/error.hpp"

namespace stabilab {

double pole_placement_gain(const Transmission& tr, double lambda_target) {
  if (tr.b == 0.0) throw Error(ErrorKind::Uncontrollable, "b = 0: the instrument has no effect");
  return (lambda_target - tr.a) / tr.b;
}

Transmission taylor_transmission(const ISPhillips& isp) {
  if (isp.a_slope == 0.0 || isp.b_is == 0.0) {
    throw Error(ErrorKind::Uncontrollable, "zero Phillips slope or IS sensitivity gives b = 0");
  }
  if (!(isp.a_slope > 0.0) || !(isp.b_is > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "Phillips slope and IS sensitivity must be > 0");
  }
  const double ab = isp.a_slope * isp.b_is;
  const double a = 1.0 + ab;
  // b = 1 - a keeps a - 1 == -b exact in floating point; when ab is lost in
  // the rounding of 1 + ab that would give b = 0, so keep -ab instead.
  const double b = a == 1.0 ? -ab : 1.0 - a;
  return Transmission{a, b, 0.0};
}

GainInterval taylor_principle_bounds(const ISPhillips& isp) {
  const Transmission tr = taylor_transmission(isp);
  return GainInterval{1.0, -tr.a / tr.b};
}

std::array<std::array<double, 3>, 3> pid_companion(const Transmission& tr, const rule::Pid& pid) {
  // pi[t+1] = (a + b(fp+fi+fd)) pi[t] + b fi S[t-1] - b fd pi[t-1]
  // S[t]    = S[t-1] + pi[t]
  const double a11 = tr.a + tr.b * (pid.fp + pid.fi + pid.fd);
  return {{
      {a11, tr.b * pid.fi, -tr.b * pid.fd},
      {1.0, 1.0, 0.0},
      {1.0, 0.0, 0.0},
  }};
}

double pid_spectral_radius(const Transmission& tr, const rule::Pid& pid) {
  const auto m = pid_companion(tr, pid);
  Eigen::MatrixXd mat;
  if (pid.fi == 0.0) {
    mat.resize(2, 2);
    mat << m[0][0], m[0][2], m[2][0], m[2][2];
  } else {
    mat.resize(3, 3);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) mat(r, c) = m[r][c];
  }
  const Eigen::VectorXcd ev = mat.eigenvalues();
  double radius = 0.0;
  for (Eigen::Index k = 0; k < ev.size(); ++k) radius = std::max(radius, std::abs(ev[k]));
  return radius;
}

PidResult pid_simulate(const Transmission& tr, const rule::Pid& pid, double pi0,
                       std::size_t horizon, std::uint64_t seed, double sigma_eta) {
  PidResult out;
  out.trajectory = simulate_trajectory(tr, Rule{pid}, pi0, horizon, sigma_eta, seed);
  out.companion = pid_companion(tr, pid);
  out.spectral_radius = pid_spectral_radius(tr, pid);
  return out;
}

double taylor_rule_eval(double pi, double gap) {
  return TaylorRule93::pi_coef * pi + TaylorRule93::gap_coef * gap + TaylorRule93::intercept;
}

FriedmanCheck friedman_static_check(const StaticFriedman& sf) {
  if (sf.sigma_ol == 0.0) {
    throw Error(ErrorKind::DegenerateOpenLoop, "open-loop target has zero variance");
  }
  if (!(sf.sigma_ol > 0.0) || !(sf.sigma_i >= 0.0) || !(std::abs(sf.rho) <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "need sigma_ol > 0, sigma_i >= 0, |rho| <= 1");
  }
  // sigma_cl^2 = sigma_ol^2 + sigma_i (sigma_i + 2 rho sigma_ol)
  const double excess = sf.sigma_i * (sf.sigma_i + 2.0 * sf.rho * sf.sigma_ol);
  return FriedmanCheck{sf.sigma_ol * sf.sigma_ol + excess, excess < 0.0};
}

}  // namespace stabilab
