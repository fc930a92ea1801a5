#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stabilab/model_core.hpp"

namespace stabilab {

// ---------------------------------------------------------------------------
// Scalar Kalman filter for x[t+1] = lambda*x[t] + u[t] + eps[t],
// y[t] = x[t] + nu[t].

struct KalmanState {
  double estimate = 0.0;
  double variance = 0.0;
  double gain = 0.0;
};

/// Measurement update of a prior (mean, variance). sigma_obs == 0 returns the
/// observation itself with gain 1.
KalmanState kalman_update(double prior_mean, double prior_variance, double sigma_obs, double y);

/// Predict with lambda (plus a known input), then update on y.
KalmanState kalman_step(const KalmanState& ks, double lambda, double sigma_eps, double sigma_obs,
                        double y, double known_input = 0.0);

/// Steady-state predicted variance of the filter: positive root of
/// P = lambda^2 P s^2/(P + s^2) + sigma_eps^2, with s = sigma_obs.
double kalman_steady_prior_variance(double lambda, double sigma_eps, double sigma_obs);

// ---------------------------------------------------------------------------
// Regression

struct RegressionResult {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> stderrs;
  double r2 = 0.0;
  std::size_t n = 0;

  double coef(const std::string& name) const;
  double stderr_of(const std::string& name) const;
};

struct Regressor {
  std::string name;
  std::vector<double> values;
};

/// Gram matrices whose column-normalized condition number exceeds this are
/// treated as singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// Least squares of y on the given columns (no implicit intercept; pass a
/// column of ones for one). Homoskedastic standard errors. R^2 is centered when
/// a constant column is present and uncentered otherwise.
RegressionResult ols(std::span<const double> y, const std::vector<Regressor>& x);

/// Just-identified instrumental variables: one instrument column per regressor.
RegressionResult iv(std::span<const double> y, const std::vector<Regressor>& x,
                    const std::vector<Regressor>& z);

enum class TransmissionMethod { OLS, IV };

/// Regress pi[t+1] on (pi[t], i[t]). The IV route instruments i[t] with the
/// recorded policy shock eta[t]. Coefficients are named "a" and "b".
RegressionResult estimate_transmission(const Trajectory& traj, TransmissionMethod method);

struct PricePuzzleReport {
  double naive_b = 0.0;           ///< slope of pi[t+1] on i[t] alone
  double naive_b_stderr = 0.0;
  bool sign_flip = false;         ///< naive_b > 0 > true b
  /// pi[t+1] on (pi[t], i[t]); empty when the design is collinear.
  std::optional<RegressionResult> multivariate;
  double advised_gain = 0.0;      ///< gain of opposite sign to naive_b
  double perceived_lambda = 0.0;  ///< a + naive_b * advised_gain
  double true_lambda = 0.0;       ///< a + b * advised_gain
  bool misadvice_ordering = false;  ///< 0 < perceived < a < true
};

/// `truth` and `gain` describe the data-generating rule i = gain*pi + eta; they
/// are used only for the sign-flip flag and the advice report.
PricePuzzleReport price_puzzle_demo(const Trajectory& traj, const Transmission& truth, double gain);

/// Population slope cov(i[t], pi[t+1]) / var(i[t]) under i = f*pi + eta.
double naive_population_slope(const Transmission& tr, double f, double sigma_eta);

// ---------------------------------------------------------------------------
// Policy-rule fitting on date,i,pi,x data

struct RateObservation {
  std::string date;
  double i = 0.0;
  double pi = 0.0;
  double x = 0.0;
};

enum class RuleSpec { Taylor, Inertial };

struct RuleFit {
  RegressionResult regression;
  /// f_x/(1 - rho_i) for the inertial spec, NaN for Taylor.
  double long_run_gap_sensitivity = 0.0;
};

/// Reads `date,i,pi,x` (column order free, header required).
std::vector<RateObservation> read_rate_csv(const std::filesystem::path& path);

/// Taylor: i on (pi, x, const). Inertial: i[t] on (i[t-1], x[t]).
RuleFit fit_policy_rule(std::span<const RateObservation> data, RuleSpec spec);

/// Synthetic data from i = 1.5 pi + 0.5 x + 1 + noise with AR(1) pi and x.
std::vector<RateObservation> generate_taylor_data(std::size_t n, double noise_std,
                                                  std::uint64_t seed);

// ---------------------------------------------------------------------------

struct WelfareSpec {
  double gamma = 1.0;    ///< relative risk aversion
  double sigma_x = 0.0;  ///< std of log detrended consumption
};

/// Consumption-equivalent cost of fluctuations: gamma * sigma_x^2 / 2.
double lucas_welfare_cost(const WelfareSpec& ws);

}  // namespace stabilab
