#include "stabilab/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stabilab/error.hpp"
#include "stabilab/random.hpp"

namespace stabilab {

// ---------------------------------------------------------------------------
// Kalman filter

KalmanState kalman_update(double prior_mean, double prior_variance, double sigma_obs, double y) {
  if (!(sigma_obs >= 0.0) || !(prior_variance >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "variances must be >= 0");
  }
  if (sigma_obs == 0.0) return KalmanState{y, 0.0, 1.0};
  const double s2 = sigma_obs * sigma_obs;
  const double k = prior_variance / (prior_variance + s2);
  return KalmanState{prior_mean + k * (y - prior_mean), (1.0 - k) * prior_variance, k};
}

KalmanState kalman_step(const KalmanState& ks, double lambda, double sigma_eps, double sigma_obs,
                        double y, double known_input) {
  const double prior_mean = lambda * ks.estimate + known_input;
  const double prior_var = lambda * lambda * ks.variance + sigma_eps * sigma_eps;
  return kalman_update(prior_mean, prior_var, sigma_obs, y);
}

double kalman_steady_prior_variance(double lambda, double sigma_eps, double sigma_obs) {
  if (!(sigma_eps >= 0.0) || !(sigma_obs >= 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "noise scales must be >= 0");
  }
  const double q = sigma_eps * sigma_eps;
  const double s2 = sigma_obs * sigma_obs;
  if (s2 == 0.0) return q;
  // P^2 + (s^2 (1 - lambda^2) - q) P - q s^2 = 0
  const double c1 = s2 * (1.0 - lambda * lambda) - q;
  const double c0 = -q * s2;
  const double disc = std::sqrt(c1 * c1 - 4.0 * c0);
  if (c1 <= 0.0) return 0.5 * (-c1 + disc);
  return -2.0 * c0 / (c1 + disc);
}

// ---------------------------------------------------------------------------
// Regression

namespace {

std::size_t index_of(const RegressionResult& r, const std::string& name) {
  const auto it = std::find(r.names.begin(), r.names.end(), name);
  if (it == r.names.end()) throw Error(ErrorKind::InvalidArgument, "no coefficient named " + name);
  return static_cast<std::size_t>(it - r.names.begin());
}

Eigen::MatrixXd design(const std::vector<Regressor>& cols, std::size_t n) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) {
    if (cols[j].values.size() != n) {
      throw Error(ErrorKind::InvalidArgument, "column " + cols[j].name + " has the wrong length");
    }
    for (std::size_t k = 0; k < n; ++k) m(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) = cols[j].values[k];
  }
  return m;
}

Eigen::VectorXd inverse_norms(const Eigen::MatrixXd& m) {
  Eigen::VectorXd d(m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = m.col(j).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw Error(ErrorKind::IdentificationFailure, "a regressor column is identically zero");
    }
    d(j) = 1.0 / norm;
  }
  return d;
}

// Condition number of a symmetric positive semidefinite matrix.
double spd_condition(const Eigen::MatrixXd& g) {
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// Condition number of a general square matrix via singular values.
double general_condition(const Eigen::MatrixXd& m) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double lo = sv.minCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return sv.maxCoeff() / lo;
}

bool has_constant(const std::vector<Regressor>& cols) {
  for (const auto& c : cols) {
    if (c.values.empty() || c.values.front() == 0.0) continue;
    if (std::all_of(c.values.begin(), c.values.end(),
                    [&](double v) { return v == c.values.front(); })) {
      return true;
    }
  }
  return false;
}

double r_squared(const Eigen::VectorXd& y, const Eigen::VectorXd& resid, bool centered) {
  const double ssr = resid.squaredNorm();
  const double sst = centered ? (y.array() - y.mean()).matrix().squaredNorm() : y.squaredNorm();
  if (sst == 0.0) return ssr == 0.0 ? 1.0 : 0.0;
  // IV residuals can exceed the total variation; report within [0, 1].
  return std::clamp(1.0 - ssr / sst, 0.0, 1.0);
}

void check_sizes(std::size_t n, std::size_t k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "no regressors");
  if (n <= k) {
    throw Error(ErrorKind::InsufficientData,
                std::to_string(n) + " observations for " + std::to_string(k) + " coefficients");
  }
}

RegressionResult package(const std::vector<Regressor>& x, const Eigen::VectorXd& beta,
                         const Eigen::MatrixXd& cov, double r2, std::size_t n) {
  RegressionResult out;
  out.n = n;
  out.r2 = r2;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out.names.push_back(x[j].name);
    out.coefficients.push_back(beta(jj));
    out.stderrs.push_back(std::sqrt(std::max(cov(jj, jj), 0.0)));
  }
  return out;
}

}  // namespace

double RegressionResult::coef(const std::string& name) const {
  return coefficients[index_of(*this, name)];
}

double RegressionResult::stderr_of(const std::string& name) const {
  return stderrs[index_of(*this, name)];
}

RegressionResult ols(std::span<const double> y, const std::vector<Regressor>& x) {
  const std::size_t n = y.size();
  const std::size_t k = x.size();
  check_sizes(n, k);
  const Eigen::MatrixXd xm = design(x, n);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::VectorXd d = inverse_norms(xm);
  const Eigen::MatrixXd gram = xm.transpose() * xm;
  const double cond = spd_condition(d.asDiagonal() * gram * d.asDiagonal());
  if (!(cond <= kMaxConditionNumber)) {
    throw Error(ErrorKind::IdentificationFailure, "regressors are collinear (condition number " +
                                                      std::to_string(cond) + ")");
  }

  const Eigen::VectorXd beta = xm.colPivHouseholderQr().solve(yv);
  const Eigen::VectorXd resid = yv - xm * beta;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(n - k);
  const Eigen::MatrixXd cov = sigma2 * gram.inverse();
  return package(x, beta, cov, r_squared(yv, resid, has_constant(x)), n);
}

RegressionResult iv(std::span<const double> y, const std::vector<Regressor>& x,
                    const std::vector<Regressor>& z) {
  const std::size_t n = y.size();
  const std::size_t k = x.size();
  check_sizes(n, k);
  if (z.size() != k) {
    throw Error(ErrorKind::InvalidArgument, "just-identified IV needs one instrument per regressor");
  }
  const Eigen::MatrixXd xm = design(x, n);
  const Eigen::MatrixXd zm = design(z, n);
  const Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));

  const Eigen::VectorXd dx = inverse_norms(xm);
  const Eigen::VectorXd dz = inverse_norms(zm);
  const Eigen::MatrixXd zx = zm.transpose() * xm;
  const double cond = general_condition(dz.asDiagonal() * zx * dx.asDiagonal());
  if (!(cond <= kMaxConditionNumber)) {
    throw Error(ErrorKind::IdentificationFailure, "instruments do not identify the regressors");
  }

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(zx);
  const Eigen::VectorXd beta = lu.solve(zm.transpose() * yv);
  const Eigen::VectorXd resid = yv - xm * beta;
  const double sigma2 = resid.squaredNorm() / static_cast<double>(n - k);
  const Eigen::MatrixXd zx_inv = lu.inverse();
  const Eigen::MatrixXd cov = sigma2 * zx_inv * (zm.transpose() * zm) * zx_inv.transpose();
  return package(x, beta, cov, r_squared(yv, resid, has_constant(x)), n);
}

RegressionResult estimate_transmission(const Trajectory& traj, TransmissionMethod method) {
  if (traj.size() < 4) throw Error(ErrorKind::InsufficientData, "trajectory too short to regress");
  const std::size_t n = traj.size() - 1;
  const std::span<const double> y(traj.pi.data() + 1, n);
  const std::vector<Regressor> x{
      {"a", std::vector<double>(traj.pi.begin(), traj.pi.begin() + static_cast<std::ptrdiff_t>(n))},
      {"b", std::vector<double>(traj.i.begin(), traj.i.begin() + static_cast<std::ptrdiff_t>(n))},
  };
  if (method == TransmissionMethod::OLS) return ols(y, x);
  const std::vector<Regressor> z{
      {"pi", x[0].values},
      {"eta", std::vector<double>(traj.eta.begin(), traj.eta.begin() + static_cast<std::ptrdiff_t>(n))},
  };
  return iv(y, x, z);
}

PricePuzzleReport price_puzzle_demo(const Trajectory& traj, const Transmission& truth, double gain) {
  if (traj.size() < 4) throw Error(ErrorKind::InsufficientData, "trajectory too short to regress");
  const std::size_t n = traj.size() - 1;
  const std::span<const double> y(traj.pi.data() + 1, n);

  PricePuzzleReport rep;
  const RegressionResult naive = ols(
      y, {{"b", std::vector<double>(traj.i.begin(), traj.i.begin() + static_cast<std::ptrdiff_t>(n))}});
  rep.naive_b = naive.coefficients[0];
  rep.naive_b_stderr = naive.stderrs[0];
  rep.sign_flip = rep.naive_b > 0.0 && truth.b < 0.0;
  try {
    rep.multivariate = estimate_transmission(traj, TransmissionMethod::OLS);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::IdentificationFailure) throw;
  }

  // Advice built on the naive slope: a gain the naive model reads as negative
  // feedback, with the magnitude of the rule that generated the data.
  const double magnitude = gain != 0.0 ? std::abs(gain) : 1.0;
  rep.advised_gain = rep.naive_b > 0.0 ? -magnitude : magnitude;
  rep.perceived_lambda = truth.a + rep.naive_b * rep.advised_gain;
  rep.true_lambda = truth.a + truth.b * rep.advised_gain;
  rep.misadvice_ordering =
      0.0 < rep.perceived_lambda && rep.perceived_lambda < truth.a && truth.a < rep.true_lambda;
  return rep;
}

double naive_population_slope(const Transmission& tr, double f, double sigma_eta) {
  const double lambda = tr.a + tr.b * f;
  if (!(std::abs(lambda) < 1.0)) {
    throw Error(ErrorKind::NonStationary, "closed loop has no stationary distribution");
  }
  const double s_eta2 = sigma_eta * sigma_eta;
  const double v = (tr.sigma_eps * tr.sigma_eps + tr.b * tr.b * s_eta2) / (1.0 - lambda * lambda);
  const double var_i = f * f * v + s_eta2;
  if (!(var_i > 0.0)) throw Error(ErrorKind::IdentificationFailure, "instrument has zero variance");
  return (f * lambda * v + tr.b * s_eta2) / var_i;
}

// ---------------------------------------------------------------------------
// Policy-rule fitting

namespace {

std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorKind::SchemaError,
                "line " + std::to_string(line_no) + ": '" + s + "' is not a finite number");
  }
  return v;
}

}  // namespace

std::vector<RateObservation> read_rate_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IOError, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split(trim(line));
  }
  if (header.empty()) throw Error(ErrorKind::SchemaError, path.string() + " has no header");

  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorKind::SchemaError, path.string() + " is missing column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_date = column("date");
  const std::size_t c_i = column("i");
  const std::size_t c_pi = column("pi");
  const std::size_t c_x = column("x");

  std::vector<RateObservation> rows;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorKind::SchemaError, "line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(header.size()) + " fields");
    }
    rows.push_back(RateObservation{cells[c_date], parse_number(cells[c_i], line_no),
                                   parse_number(cells[c_pi], line_no),
                                   parse_number(cells[c_x], line_no)});
  }
  return rows;
}

RuleFit fit_policy_rule(std::span<const RateObservation> data, RuleSpec spec) {
  constexpr std::size_t kMinRows = 8;
  if (data.size() < kMinRows) {
    throw Error(ErrorKind::InsufficientData,
                std::to_string(data.size()) + " rows; at least 8 are needed");
  }
  RuleFit fit;
  if (spec == RuleSpec::Taylor) {
    std::vector<double> y, pi, x, one(data.size(), 1.0);
    for (const auto& row : data) {
      y.push_back(row.i);
      pi.push_back(row.pi);
      x.push_back(row.x);
    }
    fit.regression = ols(y, {{"pi", pi}, {"x", x}, {"const", one}});
    fit.long_run_gap_sensitivity = std::numeric_limits<double>::quiet_NaN();
    return fit;
  }
  std::vector<double> y, lag, x;
  for (std::size_t t = 1; t < data.size(); ++t) {
    y.push_back(data[t].i);
    lag.push_back(data[t - 1].i);
    x.push_back(data[t].x);
  }
  fit.regression = ols(y, {{"i_lag", lag}, {"x", x}});
  const double rho = fit.regression.coef("i_lag");
  fit.long_run_gap_sensitivity = fit.regression.coef("x") / (1.0 - rho);
  return fit;
}

std::vector<RateObservation> generate_taylor_data(std::size_t n, double noise_std,
                                                  std::uint64_t seed) {
  GaussianStream rng(seed);
  std::vector<RateObservation> out;
  out.reserve(n);
  double pi = 2.0;
  double x = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    pi = 2.0 + 0.5 * (pi - 2.0) + rng.draw(1.0);
    x = 0.8 * x + rng.draw(1.0);
    const double i = 1.5 * pi + 0.5 * x + 1.0 + rng.draw(noise_std);
    const std::size_t year = 1987 + t / 4;
    out.push_back(RateObservation{std::to_string(year) + "Q" + std::to_string(t % 4 + 1), i, pi, x});
  }
  return out;
}

double lucas_welfare_cost(const WelfareSpec& ws) {
  if (!(ws.gamma > 0.0) || !(ws.sigma_x >= 0.0) || !std::isfinite(ws.sigma_x)) {
    throw Error(ErrorKind::InvalidArgument, "need gamma > 0 and sigma_x >= 0");
  }
  return 0.5 * ws.gamma * ws.sigma_x * ws.sigma_x;
}

}  // namespace stabilab
