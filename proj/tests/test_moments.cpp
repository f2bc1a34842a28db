#include <doctest.h>

#include <cmath>
#include <random>

#include "scrapest/moments.hpp"
#include "support.hpp"

using namespace scrapest;
using test_support::rel_diff;

TEST_SUITE("moments") {

TEST_CASE("gamma from half-life") {
  CHECK(rel_diff(gamma_from_half_life(1000.0), 6.93147e-4) < 1e-6);
  CHECK(rel_diff(gamma_from_half_life(1.0), 0.6931471805599453) < 1e-15);
  CHECK(gamma_from_half_life(1e12) < 1e-11);  // monotone toward 0
  CHECK(gamma_from_half_life(10.0) < gamma_from_half_life(5.0));
  CHECK_THROWS_AS(gamma_from_half_life(0.0), DomainError);
  CHECK_THROWS_AS(gamma_from_half_life(-2.0), DomainError);
}

TEST_CASE("stationary covariance") {
  const double g = gamma_from_half_life(1000.0);
  // Q_ii = 5 q_i^2 puts the long-run sd near 0.042 q_i (within 2%).
  Eigen::VectorXd Q(1);
  Q << 5.0;
  const double p_inf = stationary_covariance(g, Q)[0];
  CHECK(std::abs(p_inf - 0.042 * 0.042) / (0.042 * 0.042) < 0.02);

  Eigen::VectorXd Q2(3);
  Q2 << 1.0, 2.0, 3.0;
  CHECK(rel_diff(stationary_covariance(1.0, Q2), Q2) == 0.0);
  Eigen::VectorXd Q3(1);
  Q3 << 3.0;
  CHECK(rel_diff(stationary_covariance(0.5, Q3)[0], 1.0) < 1e-15);

  CHECK_THROWS_AS(stationary_covariance(0.0, Q2), DomainError);
  CHECK_THROWS_AS(stationary_covariance(1.5, Q2), DomainError);
}

TEST_CASE("process noise from stationary & round trip") {
  const double g = gamma_from_half_life(1000.0);
  Eigen::VectorXd p_inf(1);
  p_inf << 0.042 * 0.042;
  const double q_scale = process_noise_from_stationary(g, p_inf)[0];
  CHECK(rel_diff(q_scale, (2.0 - g) / g * 0.042 * 0.042) < 1e-15);
  CHECK(std::abs(q_scale - 5.09) < 0.01);  // exact value, vs the rounded 5

  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    std::uniform_real_distribution<double> ug(1e-5, 1.0);
    const double gamma = ug(rng);
    const Eigen::VectorXd Q = test_support::random_vector(5, rng, 1e-9, 10.0);
    const Eigen::VectorXd back = process_noise_from_stationary(gamma, stationary_covariance(gamma, Q));
    CHECK(rel_diff(back, Q) < 1e-12);
  }
  Eigen::VectorXd one(1);
  one << 2.0;
  CHECK(rel_diff(process_noise_from_stationary(1.0, one), one) == 0.0);
  CHECK_THROWS_AS(process_noise_from_stationary(0.0, one), DomainError);
}

TEST_CASE("beta moment matching") {
  const BetaParams p = beta_params_from_moments(0.5, 0.05);
  CHECK(rel_diff(p.u, 2.0) < 1e-12);
  CHECK(rel_diff(p.v, 2.0) < 1e-12);

  CHECK_THROWS_AS(beta_params_from_moments(0.5, 0.25), MomentMatchingError);
  CHECK_THROWS_AS(beta_params_from_moments(0.0, 0.1), MomentMatchingError);
  CHECK_THROWS_AS(beta_params_from_moments(1.0, 0.1), MomentMatchingError);

  // Pushed back through the Beta mean/variance formulas the moments return.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uq(1e-5, 0.9);
  std::uniform_real_distribution<double> uf(0.01, 0.9);
  for (int trial = 0; trial < 50; ++trial) {
    const double q = uq(rng);
    const double Q = uf(rng) * q * (1.0 - q);
    const BetaParams b = beta_params_from_moments(q, Q);
    CHECK(b.u > 0.0);
    CHECK(b.v > 0.0);
    const double mean = b.u / (b.u + b.v);
    const double var = b.u * b.v / ((b.u + b.v) * (b.u + b.v) * (b.u + b.v + 1.0));
    CHECK(rel_diff(mean, q) < 1e-12);
    CHECK(rel_diff(var, Q) < 1e-12);
  }

  const BetaParams tiny = beta_params_from_moments(1e-4, 5e-8);
  const double mean = tiny.u / (tiny.u + tiny.v);
  const double var =
      tiny.u * tiny.v / ((tiny.u + tiny.v) * (tiny.u + tiny.v) * (tiny.u + tiny.v + 1.0));
  CHECK(rel_diff(mean, 1e-4) < 1e-12);
  CHECK(rel_diff(var, 5e-8) < 1e-12);

  try {
    beta_params_from_moments(0.5, 0.3, 7);
    CHECK(false);
  } catch (const MomentMatchingError& e) {
    CHECK(e.index() == 7);
  }
}

TEST_CASE("moment propagation") {
  std::mt19937_64 rng(23);
  const int n = 3;
  const Eigen::VectorXd a1 = test_support::random_vector(n, rng, 0.0, 1.0);
  const Eigen::MatrixXd P1 = test_support::random_spd(n, rng, 0.01);
  const Eigen::VectorXd q = test_support::random_vector(n, rng, 0.1, 0.9);
  const Eigen::VectorXd Q = test_support::random_vector(n, rng, 1e-4, 1e-2);

  SUBCASE("zero steps is the identity") {
    const auto [a, P] = propagate_moments(a1, P1, 0.3, q, Q, 0);
    CHECK(rel_diff(a, a1) == 0.0);
    CHECK(rel_diff(P, P1) == 0.0);
  }

  SUBCASE("one step equals the direct update") {
    const double g = 0.37;
    const auto [a, P] = propagate_moments(a1, P1, g, q, Q, 1);
    const Eigen::VectorXd a_direct = (1.0 - g) * a1 + g * q;
    Eigen::MatrixXd P_direct = (1.0 - g) * (1.0 - g) * P1;
    P_direct.diagonal() += g * g * Q;
    CHECK(rel_diff(a, a_direct) < 1e-15);
    CHECK(rel_diff(P, P_direct) < 1e-15);
  }

  SUBCASE("t+1 steps equal t steps plus one prediction") {
    const double g = 0.02;
    for (long t : {1L, 2L, 5L, 17L}) {
      const auto [at, Pt] = propagate_moments(a1, P1, g, q, Q, t);
      const auto [a_next, P_next] = propagate_moments(a1, P1, g, q, Q, t + 1);
      const Eigen::VectorXd a_step = (1.0 - g) * at + g * q;
      Eigen::MatrixXd P_step = (1.0 - g) * (1.0 - g) * Pt;
      P_step.diagonal() += g * g * Q;
      CHECK(rel_diff(a_next, a_step) < 1e-12);
      CHECK(rel_diff(P_next, P_step) < 1e-12);
    }
  }

  SUBCASE("long-run limit") {
    const double g = gamma_from_half_life(1000.0);
    const auto [a, P] = propagate_moments(a1, P1, g, q, Q, 10'000'000);
    CHECK(rel_diff(a, q) < 1e-9);
    Eigen::MatrixXd P_inf = Eigen::MatrixXd::Zero(n, n);
    P_inf.diagonal() = stationary_covariance(g, Q);
    CHECK(rel_diff(P, P_inf) < 1e-9);
  }

  SUBCASE("gamma edge cases") {
    const auto [a0, P0] = propagate_moments(a1, P1, 0.0, q, Q, 1000);
    CHECK(rel_diff(a0, a1) == 0.0);
    CHECK(rel_diff(P0, P1) == 0.0);
    const auto [ag, Pg] = propagate_moments(a1, P1, 1.0, q, Q, 5);
    CHECK(rel_diff(ag, q) < 1e-15);
    Eigen::MatrixXd Qm = Eigen::MatrixXd::Zero(n, n);
    Qm.diagonal() = Q;
    CHECK(rel_diff(Pg, Qm) < 1e-15);
  }

  CHECK_THROWS_AS(propagate_moments(a1, P1, 0.3, q.head(2), Q, 1), DomainError);
}

TEST_CASE("linear observation variance") {
  // 330 t steel / 12 ppm and 280 t hot metal / 5 ppm, in kg and fractions.
  const double H = estimate_obs_variance_linear(330e3, 12e-6, 280e3, 5e-6);
  CHECK(rel_diff(H * 1e6, 17'641'600.0) < 1e-12);  // g^2
  CHECK(estimate_obs_variance_linear(0, 0, 0, 0) == 0.0);
  CHECK(rel_diff(estimate_obs_variance_linear(330e3, 12e-6, 0.0, 5e-6),
                 330e3 * 12e-6 * 330e3 * 12e-6) < 1e-15);
  CHECK_THROWS_AS(estimate_obs_variance_linear(-1, 0, 0, 0), DomainError);
}

TEST_CASE("noise spec validation") {
  NoiseSpec spec;
  spec.gamma = gamma_from_half_life(1000.0);
  spec.q = Eigen::VectorXd::Constant(3, 2e-4);
  spec.Q_diag = 5.0 * spec.q.array().square();
  spec.H = 17.64;
  spec.validate();
  spec.validate_beta_feasible();
  CHECK(rel_diff(spec.p_inf_diag(), stationary_covariance(spec.gamma, spec.Q_diag)) == 0.0);

  SUBCASE("beta feasibility is eager and names the index") {
    spec.Q_diag[1] = 0.3;  // above q(1-q)
    spec.validate();
    try {
      spec.validate_beta_feasible();
      CHECK(false);
    } catch (const MomentMatchingError& e) {
      CHECK(e.index() == 1);
    }
  }

  SUBCASE("non-diagonal Q is rejected") {
    Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(3, 3);
    Q.diagonal() = spec.Q_diag;
    Q(0, 1) = 1e-9;
    CHECK_THROWS_AS(NoiseSpec::from_matrices(spec.gamma, spec.q, Q, spec.H), DomainError);
    Q(0, 1) = 0.0;
    const NoiseSpec ok = NoiseSpec::from_matrices(spec.gamma, spec.q, Q, spec.H);
    CHECK(rel_diff(ok.Q_diag, spec.Q_diag) == 0.0);
  }

  SUBCASE("gamma domain") {
    spec.gamma = 0.0;
    CHECK_THROWS_AS(spec.validate(), DomainError);
    spec.gamma = 1.2;
    CHECK_THROWS_AS(spec.validate(), DomainError);
  }
}

}  // TEST_SUITE
