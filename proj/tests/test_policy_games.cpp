#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "stabilab/error.hpp"
#include "stabilab/optimal_control.hpp"
#include "stabilab/policy_games.hpp"

using namespace stabilab;

namespace {

template <class F>
ErrorKind error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected a stabilab::Error");
  return ErrorKind::InvalidArgument;
}

// Direct solve of the commitment problem without multipliers: the decision
// vector is (i[0..H-1], pi[H]); the follower's condition run backward gives
// every pi[t] as an affine function of it, and the loss is a weighted
// least-squares objective.
struct DirectPlan {
  std::vector<double> pi, i;
  double loss;
};

DirectPlan direct_commitment(const StackelbergModel& m, const LossSpec& ls, double z0, int h) {
  const int n = h + 1;  // decisions
  std::vector<double> z(h + 1);
  z[0] = z0;
  for (int t = 1; t <= h; ++t) z[t] = m.rho * z[t - 1];
  // pi[t] = coef[t] . x + off[t]
  Eigen::MatrixXd coef = Eigen::MatrixXd::Zero(h + 1, n);
  Eigen::VectorXd off = Eigen::VectorXd::Zero(h + 1);
  coef(h, h) = 1.0;
  for (int t = h - 1; t >= 0; --t) {
    coef.row(t) = m.delta * coef.row(t + 1);
    coef(t, t) += m.b;
    off(t) = m.delta * off(t + 1) + m.kappa * z[t];
  }
  // Residual vector: sqrt(beta^t q) pi[t] and sqrt(beta^t r) i[t].
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * h + 1, n);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(2 * h + 1);
  for (int t = 0; t <= h; ++t) {
    const double w = std::sqrt(std::pow(ls.beta, t) * ls.q);
    a.row(t) = w * coef.row(t);
    c(t) = w * off(t);
  }
  for (int t = 0; t < h; ++t) a(h + 1 + t, t) = std::sqrt(std::pow(ls.beta, t) * ls.r);
  const Eigen::VectorXd x = a.colPivHouseholderQr().solve(-c);
  DirectPlan out;
  const Eigen::VectorXd pi = coef * x + off;
  out.pi.assign(pi.data(), pi.data() + pi.size());
  out.i.assign(x.data(), x.data() + h);
  out.i.push_back(0.0);
  out.loss = 0.5 * (a * x + c).squaredNorm();
  return out;
}

// Loss of i = f*pi accumulated along the simulated path.
double simulated_rule_loss(const StackelbergModel& m, const LossSpec& ls, double f, double z0) {
  const double c = m.kappa / (1.0 - m.delta * m.rho - m.b * f);
  double loss = 0.0, z = z0, disc = 1.0;
  for (int t = 0; t < 5000; ++t) {
    const double pi = c * z;
    // check the follower's condition with pi' = c rho z
    CHECK(std::abs(pi - (m.delta * c * m.rho * z + m.kappa * z + m.b * f * pi)) <= 1e-12 * (1.0 + std::abs(pi)));
    loss += 0.5 * disc * (ls.q * pi * pi + ls.r * f * f * pi * pi);
    z *= m.rho;
    disc *= ls.beta;
  }
  return loss;
}

}  // namespace

TEST_CASE("Barro-Gordon equilibrium") {
  auto eq = barro_gordon_equilibrium(-1.0, {1.0, 1.0, 1.0, 2.0});
  CHECK(eq.pi_star == 1.0);
  CHECK(eq.i_star == -1.0);
  CHECK(eq.loss_discretion > eq.loss_rules);

  eq = barro_gordon_equilibrium(-1.0, {1.0, 1.0, 1.0, 0.0});
  CHECK(eq.pi_star == 0.0);
  CHECK(eq.i_star == 0.0);
  CHECK(eq.loss_discretion == eq.loss_rules);

  CHECK(barro_gordon_equilibrium(-1.0, {1.0, 1e12, 1.0, 2.0}).pi_star < 1e-11);
  CHECK(error_kind([] { barro_gordon_equilibrium(0.0, {1.0, 1.0, 1.0, 2.0}); }) ==
        ErrorKind::Uncontrollable);

  // Zero target weight gives the rules outcome whatever the bias.
  const auto q0 = barro_gordon_equilibrium(-0.7, {0.0, 2.0, 0.9, 3.0});
  const auto nobias = barro_gordon_equilibrium(-0.7, {1.5, 2.0, 0.9, 0.0});
  CHECK(q0.pi_star == nobias.pi_star);
  CHECK(q0.i_star == nobias.i_star);
}

TEST_CASE("Barro-Gordon comparative statics on random grids") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(0.1, 3.0), ubeta(0.5, 1.0);
  for (int k = 0; k < 500; ++k) {
    const double b = -u(rng), q = u(rng), r = u(rng), beta = ubeta(rng), bias = u(rng);
    const double base = barro_gordon_equilibrium(b, {q, r, beta, bias}).pi_star;
    CHECK(base > 0.0);
    CHECK(barro_gordon_equilibrium(b, {q * 1.1, r, beta, bias}).pi_star > base);
    CHECK(barro_gordon_equilibrium(b, {q, r * 1.1, beta, bias}).pi_star < base);
    CHECK(barro_gordon_equilibrium(b, {q, r, beta, 2.0 * bias}).pi_star ==
          doctest::Approx(2.0 * base).epsilon(1e-14));
    const auto eq = barro_gordon_equilibrium(b, {q, r, beta, bias});
    CHECK(eq.i_star * b == doctest::Approx(eq.pi_star).epsilon(1e-14));
    CHECK(eq.loss_discretion > eq.loss_rules);
  }
}

TEST_CASE("misperception: first round is the full-information optimum") {
  const Transmission tr{0.8, -0.5, 0.0};
  const LossSpec ls{1.0, 0.1, 1.0, 0.0};
  const auto run = kp_misperception_iterate(tr, ls, 10);
  REQUIRE(run.f_path.size() == 10);
  CHECK(run.perceived_a_path.size() == 10);
  CHECK(run.true_lambda_path.size() == 10);
  CHECK(run.loss_path.size() == 10);
  CHECK(run.f_path[0] == riccati_solve(tr, ls).f_star);
  CHECK(run.perceived_a_path[0] == tr.a);
  for (std::size_t k = 1; k < 10; ++k) {
    CHECK(run.perceived_a_path[k] == tr.a + tr.b * run.f_path[k - 1]);
    CHECK(run.loss_path[k] == policy_loss(tr, ls, run.f_path[k], 1.0));
  }
  CHECK(run.verdict == MisperceptionVerdict::Converged);
  CHECK(error_kind([&] { kp_misperception_iterate(tr, ls, 0); }) == ErrorKind::InvalidArgument);
  CHECK(error_kind([&] { kp_misperception_iterate({0.8, 0.0, 0.0}, ls, 3); }) ==
        ErrorKind::Uncontrollable);
}

TEST_CASE("misperception: the perceived persistence drifts with alternating sign") {
  // Attributing the closed loop to structure understates persistence, which
  // weakens the next rule and raises persistence again: the drift oscillates.
  const auto run = kp_misperception_iterate({0.8, -0.5, 0.0}, {1.0, 0.1, 1.0, 0.0}, 12);
  int checked = 0;
  for (std::size_t k = 2; k < run.perceived_a_path.size(); ++k) {
    const double d1 = run.perceived_a_path[k - 1] - run.perceived_a_path[k - 2];
    const double d2 = run.perceived_a_path[k] - run.perceived_a_path[k - 1];
    if (std::abs(d1) < 1e-13 || std::abs(d2) < 1e-13) continue;
    CHECK(d1 * d2 < 0.0);
    ++checked;
  }
  CHECK(checked >= 3);
  CHECK(run.perceived_a_path[1] < run.perceived_a_path[0]);
}

TEST_CASE("misperception: divergence exists; iterates never lose to the peg") {
  const auto run = kp_misperception_iterate({1.2, -0.5, 0.0}, {1.0, 1.0, 1.0, 0.0}, 10);
  CHECK(run.verdict == MisperceptionVerdict::Diverged);
  CHECK(run.rules_loss == std::numeric_limits<double>::infinity());

  // Each iterate keeps 0 < lambda_k < a, so whenever the peg has a finite loss
  // every iterate does at least as well.
  for (double a : {0.3, 0.6, 0.9, 0.99}) {
    for (double ratio : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
      for (double beta : {0.9, 1.0}) {
        const auto r = kp_misperception_iterate({a, -0.5, 0.0}, {1.0, ratio, beta, 0.0}, 20);
        for (std::size_t k = 0; k < r.loss_path.size(); ++k) {
          CHECK(r.true_lambda_path[k] > 0.0);
          CHECK(r.true_lambda_path[k] < a);
          CHECK(r.loss_path[k] <= r.rules_loss);
        }
        CHECK(r.verdict == MisperceptionVerdict::Converged);
      }
    }
  }
}

TEST_CASE("Stackelberg plan solves the commitment problem") {
  const StackelbergModel m;
  const LossSpec ls{1.0, 1.0, 0.99, 0.0};
  const auto plan = stackelberg_commit(m, ls, 1.0, 60);
  const auto direct = direct_commitment(m, ls, 1.0, 60);
  REQUIRE(plan.pi_path.size() == 61);
  for (std::size_t t = 0; t <= 60; ++t) {
    CHECK(plan.pi_path[t] == doctest::Approx(direct.pi[t]).epsilon(1e-9).scale(1.0));
    CHECK(plan.i_path[t] == doctest::Approx(direct.i[t]).epsilon(1e-9).scale(1.0));
  }
  CHECK(plan.loss == doctest::Approx(direct.loss).epsilon(1e-12));

  // Follower's condition holds on every row but the last.
  for (std::size_t t = 0; t < 60; ++t) {
    const double rhs = m.delta * plan.pi_path[t + 1] + m.kappa * plan.z_path[t] + m.b * plan.i_path[t];
    CHECK(std::abs(plan.pi_path[t] - rhs) < 1e-13);
  }
  CHECK(plan.i_path.back() == 0.0);
  CHECK(plan.gamma_path[0] == 0.0);
  CHECK(plan.gamma_path[1] != 0.0);
  CHECK_FALSE(plan.reoptimized_at.has_value());
}

TEST_CASE("Stackelberg plan is linear in the initial state") {
  const StackelbergModel m;
  const LossSpec ls{1.0, 1.0, 0.99, 0.0};
  const auto zero = stackelberg_commit(m, ls, 0.0, 100);
  for (double v : zero.pi_path) CHECK(v == 0.0);
  for (double v : zero.i_path) CHECK(v == 0.0);
  CHECK(zero.loss == 0.0);

  const auto one = stackelberg_commit(m, ls, 1.0, 100);
  const auto three = stackelberg_commit(m, ls, 3.0, 100);
  for (std::size_t t = 0; t <= 100; ++t) {
    CHECK(three.pi_path[t] == doctest::Approx(3.0 * one.pi_path[t]).epsilon(1e-12));
    CHECK(three.gamma_path[t] == doctest::Approx(3.0 * one.gamma_path[t]).epsilon(1e-12));
  }
  CHECK(three.loss == doctest::Approx(9.0 * one.loss).epsilon(1e-12));
}

TEST_CASE("commitment beats every proportional rule") {
  const StackelbergModel m;
  const LossSpec ls{1.0, 1.0, 0.99, 0.0};
  const auto plan = stackelberg_commit(m, ls, 1.0, 200);
  for (double f : {-3.0, -0.5, 0.0, 0.4, 2.0}) {
    CHECK(stackelberg_rule_loss(m, ls, f, 1.0) ==
          doctest::Approx(simulated_rule_loss(m, ls, f, 1.0)).epsilon(1e-10));
  }
  for (double f : linspace(-10.0, 10.0, 401)) {
    CHECK(plan.loss < stackelberg_rule_loss(m, ls, f, 1.0));
  }
}

TEST_CASE("converged horizon") {
  const StackelbergModel m;
  const LossSpec ls{1.0, 1000.0, 0.99, 0.0};
  const auto plan = stackelberg_commit_converged(m, ls, 1.0, 50, 1e-8);
  const auto longer = stackelberg_commit(m, ls, 1.0, 2 * plan.horizon());
  CHECK(std::abs(longer.loss - plan.loss) < 1e-7 * std::max(1.0, plan.loss));
}

TEST_CASE("re-optimization") {
  const StackelbergModel m;
  const LossSpec ls{1.0, 1.0, 0.99, 0.0};
  const auto plan = stackelberg_commit(m, ls, 1.0, 200);

  auto re = stackelberg_reoptimize(plan, 0);
  CHECK(re.deviation == 0.0);
  CHECK(re.concatenated.loss == plan.loss);

  re = stackelberg_reoptimize(plan, 2);
  CHECK(re.deviation > 0.0);
  CHECK(re.continuation.gamma_path[0] == 0.0);
  CHECK(re.continuation.start == 2);
  CHECK(re.continuation.reoptimized_at == std::optional<std::size_t>(2));
  CHECK(re.continuation.horizon() == plan.horizon());
  CHECK(re.concatenated.loss >= plan.loss);
  CHECK(re.concatenated.gamma_path[2] == 0.0);
  // Concatenated plan is feasible for the follower.
  for (std::size_t t = 0; t < 200; ++t) {
    const auto& c = re.concatenated;
    CHECK(std::abs(c.pi_path[t] - (m.delta * c.pi_path[t + 1] + m.kappa * c.z_path[t] + m.b * c.i_path[t])) < 1e-12);
  }

  // Deviation shrinks with the initial shock.
  double prev = std::numeric_limits<double>::infinity();
  for (double z0 : {1.0, 0.1, 0.01}) {
    const double d = stackelberg_reoptimize(stackelberg_commit(m, ls, z0, 200), 2).deviation;
    CHECK(d < prev);
    CHECK(d > 0.0);
    prev = d;
  }

  // Last possible date.
  re = stackelberg_reoptimize(plan, 199);
  CHECK(re.continuation.pi_path.size() == 2);
  CHECK(error_kind([&] { stackelberg_reoptimize(plan, 200); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("re-optimization gap is small at extreme cost ratios") {
  const StackelbergModel m;
  auto deviation = [&](double ratio) {
    const auto plan = stackelberg_commit(m, {1.0, ratio, 0.99, 0.0}, 1.0, 400);
    return stackelberg_reoptimize(plan, 2).deviation;
  };
  const double mid = deviation(1.0);
  CHECK(deviation(1e-3) < mid);
  CHECK(deviation(1e3) < mid);
}

TEST_CASE("Stackelberg argument checks") {
  const LossSpec ls{1.0, 1.0, 0.99, 0.0};
  CHECK(error_kind([&] { stackelberg_commit({1.0, 1.0, -1.0, 0.8}, ls, 1.0, 10); }) ==
        ErrorKind::NoStablePlan);
  CHECK(error_kind([&] { stackelberg_commit({0.99, 1.0, 0.0, 0.8}, ls, 1.0, 10); }) ==
        ErrorKind::NoStablePlan);
  CHECK(error_kind([&] { stackelberg_commit({0.99, 1.0, -1.0, 1.0}, ls, 1.0, 10); }) ==
        ErrorKind::NoStablePlan);
  CHECK(error_kind([&] { stackelberg_commit({}, {0.0, 1.0, 0.99, 0.0}, 1.0, 10); }) ==
        ErrorKind::NoStablePlan);
  CHECK(error_kind([&] { stackelberg_commit({}, ls, 1.0, 1); }) == ErrorKind::InvalidArgument);
}
