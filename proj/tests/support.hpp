#pragma once

#include <Eigen/Dense>

#include <random>
#include <vector>

#include "scrapest/types.hpp"

namespace test_support {

inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double min_eig = 0.1) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = gauss(rng);
  Eigen::MatrixXd P = A * A.transpose() / static_cast<double>(n);
  P.diagonal().array() += min_eig;
  return P;
}

inline Eigen::VectorXd random_vector(int n, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = unif(rng);
  return v;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / scale;
}

inline double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max({a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(), 1e-300});
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

/// Simple heats with fully-dense positive scrap masses; linear elements get
/// f_steel filled by the caller or left empty.
inline std::vector<scrapest::HeatRecord> dense_heats(int n_heats, int n_scrap,
                                                     std::mt19937_64& rng,
                                                     double mass_lo = 1000.0,
                                                     double mass_hi = 20000.0) {
  std::vector<scrapest::HeatRecord> heats(static_cast<std::size_t>(n_heats));
  for (int t = 0; t < n_heats; ++t) {
    auto& h = heats[static_cast<std::size_t>(t)];
    h.heat_index = t + 1;
    h.scrap_mass_kg = random_vector(n_scrap, rng, mass_lo, mass_hi);
    h.m_hm_kg = 280e3;
    h.f_hm = 20e-6;
    h.m_steel_kg = 330e3;
    h.m_slag_kg = 35e3;
    h.f_feon_slag = 0.25;
  }
  return heats;
}

struct MeanVar {
  double mean = 0.0;
  double var = 0.0;
  double se_mean = 0.0;
  double se_var = 0.0;
  long n = 0;
};

/// Sample mean/variance with their standard errors (the variance SE uses
/// the empirical fourth moment).
inline MeanVar mean_var_with_se(const std::vector<double>& xs) {
  MeanVar out;
  out.n = static_cast<long>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  out.mean = sum / static_cast<double>(out.n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - out.mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(out.n);
  m4 /= static_cast<double>(out.n);
  out.var = m2 * static_cast<double>(out.n) / static_cast<double>(out.n - 1);
  out.se_mean = std::sqrt(out.var / static_cast<double>(out.n));
  const double var_of_var = (m4 - m2 * m2) / static_cast<double>(out.n);
  out.se_var = std::sqrt(std::max(var_of_var, 0.0));
  return out;
}

}  // namespace test_support
