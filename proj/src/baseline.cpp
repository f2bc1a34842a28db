#include "scrapest/baseline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/SVD>

#include <cmath>
#include <sstream>

namespace scrapest::baseline {

void WindowConfig::validate() const {
  if (window < 1) throw DomainError("window must be >= 1");
  if (min_rows > window) throw DomainError("min_rows must be <= window");
  if (stride < 1) throw DomainError("stride must be >= 1");
}

double observation_target(const HeatRecord& heat, const ElementSpec& element, double fixed_ell) {
  if (!heat.f_steel) throw DomainError("observation_target: heat has no f_steel");
  if (!element.transfers_to_slag)
    return heat.m_steel_kg * *heat.f_steel - heat.m_hm_kg * heat.f_hm;
  return *heat.f_steel * (heat.m_steel_kg + heat.m_slag_kg * fixed_ell) -
         heat.m_hm_kg * heat.f_hm;
}

NnlsResult nnls_solve_gram(const Eigen::MatrixXd& G, const Eigen::VectorXd& b,
                           double kkt_scale) {
  const int n = static_cast<int>(b.size());
  if (G.rows() != n || G.cols() != n) throw DomainError("nnls: Gram dimension mismatch");

  const double tol = 1e-8 * std::max(kkt_scale, 1e-300);
  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);
  Eigen::VectorXd w = b;  // stationarity: w = b - G x

  const int max_iter = 30 + 10 * n;
  int iter = 0;
  std::vector<int> pidx;
  pidx.reserve(static_cast<std::size_t>(n));

  auto solve_passive = [&](Eigen::VectorXd& z) {
    pidx.clear();
    for (int i = 0; i < n; ++i)
      if (passive[static_cast<std::size_t>(i)]) pidx.push_back(i);
    const int p = static_cast<int>(pidx.size());
    Eigen::MatrixXd Gpp(p, p);
    Eigen::VectorXd bp(p);
    for (int r = 0; r < p; ++r) {
      bp[r] = b[pidx[static_cast<std::size_t>(r)]];
      for (int c = 0; c < p; ++c)
        Gpp(r, c) = G(pidx[static_cast<std::size_t>(r)], pidx[static_cast<std::size_t>(c)]);
    }
    z = Gpp.ldlt().solve(bp);
  };

  while (true) {
    // Pick the most violated inactive constraint.
    int best = -1;
    double best_w = tol;
    for (int i = 0; i < n; ++i) {
      if (!passive[static_cast<std::size_t>(i)] && w[i] > best_w) {
        best_w = w[i];
        best = i;
      }
    }
    if (best < 0) break;  // KKT satisfied
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      if (++iter > max_iter) {
        std::ostringstream os;
        os << "nnls did not converge in " << max_iter << " iterations (n = " << n
           << ", max stationarity " << w.maxCoeff() << ", tol " << tol << ")";
        throw SolverError(os.str());
      }
      Eigen::VectorXd z;
      solve_passive(z);
      bool feasible = true;
      for (int r = 0; r < static_cast<int>(pidx.size()); ++r)
        if (z[r] <= 0.0) feasible = false;
      if (feasible) {
        for (int r = 0; r < static_cast<int>(pidx.size()); ++r)
          res.x[pidx[static_cast<std::size_t>(r)]] = z[r];
        break;
      }
      // Step toward z until the first passive component hits zero.
      double step = 1.0;
      for (int r = 0; r < static_cast<int>(pidx.size()); ++r) {
        if (z[r] <= 0.0) {
          const double xi = res.x[pidx[static_cast<std::size_t>(r)]];
          if (xi - z[r] > 0.0) step = std::min(step, xi / (xi - z[r]));
        }
      }
      for (int r = 0; r < static_cast<int>(pidx.size()); ++r) {
        const int i = pidx[static_cast<std::size_t>(r)];
        res.x[i] += step * (z[r] - res.x[i]);
        if (res.x[i] <= 1e-14 * std::abs(z[r]) || res.x[i] <= 0.0) {
          res.x[i] = 0.0;
          passive[static_cast<std::size_t>(i)] = false;
        }
      }
    }
    w = b - G * res.x;
  }

  res.iterations = iter;
  double kkt = 0.0;
  for (int i = 0; i < n; ++i) {
    if (passive[static_cast<std::size_t>(i)])
      kkt = std::max(kkt, std::abs(w[i]));
    else
      kkt = std::max(kkt, std::max(w[i], 0.0));
  }
  res.kkt_residual = kkt;
  return res;
}

NnlsResult nnls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
  if (X.rows() < 1) throw DomainError("nnls: need at least one row");
  if (X.rows() != y.size()) throw DomainError("nnls: row count mismatch");
  const Eigen::MatrixXd G = X.transpose() * X;
  const Eigen::VectorXd b = X.transpose() * y;
  return nnls_solve_gram(G, b, b.cwiseAbs().maxCoeff());
}

namespace {

struct WindowProblem {
  Eigen::MatrixXd G;
  Eigen::VectorXd b;
  long usable = 0;
};

void accumulate_row(WindowProblem& p, const HeatRecord& h, const ElementSpec& element,
                    double fixed_ell, double sign) {
  if (!h.f_steel) return;
  const double target = observation_target(h, element, fixed_ell);
  p.G.selfadjointView<Eigen::Lower>().rankUpdate(h.scrap_mass_kg, sign);
  p.b += sign * target * h.scrap_mass_kg;
  p.usable += sign > 0 ? 1 : -1;
}

WindowProblem scratch_problem(const std::vector<HeatRecord>& heats, int begin, int end,
                              const ElementSpec& element, double fixed_ell, int n) {
  WindowProblem p;
  p.G = Eigen::MatrixXd::Zero(n, n);
  p.b = Eigen::VectorXd::Zero(n);
  for (int r = begin; r < end; ++r)
    accumulate_row(p, heats[static_cast<std::size_t>(r)], element, fixed_ell, 1.0);
  return p;
}

/// Solves one window position given its accumulated Gram problem.
bool solve_position(const std::vector<HeatRecord>& heats, int t, const WindowProblem& p,
                    const ElementSpec& element, const WindowConfig& cfg, int n,
                    WindowEstimate& out) {
  if (p.usable < cfg.effective_min_rows()) return false;

  Eigen::MatrixXd G = p.G.selfadjointView<Eigen::Lower>();
  // Column norms over the window are sqrt(diag(G)).
  const Eigen::VectorXd col_norm = G.diagonal().cwiseMax(0.0).cwiseSqrt();
  const double mean_norm = col_norm.mean();
  const double ridge = cfg.ridge_rel * mean_norm;
  G.diagonal().array() += ridge * ridge;

  const NnlsResult sol = nnls_solve_gram(G, p.b, std::max(p.b.cwiseAbs().maxCoeff(), ridge));

  const HeatRecord& h = heats[static_cast<std::size_t>(t)];
  out.heat_index = h.heat_index;
  out.alpha = sol.x;
  out.unidentifiable.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (col_norm[i] < 1e-8 * mean_norm) out.unidentifiable[static_cast<std::size_t>(i)] = 1;

  const double numerator = h.scrap_mass_kg.dot(sol.x) + h.m_hm_kg * h.f_hm;
  const double denominator = element.transfers_to_slag
                                 ? h.m_steel_kg + h.m_slag_kg * cfg.fixed_ell
                                 : h.m_steel_kg;
  if (!(denominator > 0.0)) return false;
  out.predicted_f_steel = numerator / denominator;
  return true;
}

std::vector<int> emission_positions(int n_heats, const WindowConfig& cfg) {
  std::vector<int> pos;
  for (int t = cfg.window; t < n_heats; t += cfg.stride) pos.push_back(t);
  return pos;
}

}  // namespace

std::vector<WindowEstimate> windowed_nnls_serial(const std::vector<HeatRecord>& heats,
                                                 const ElementSpec& element,
                                                 const WindowConfig& cfg) {
  cfg.validate();
  if (heats.empty()) return {};
  const int n = static_cast<int>(heats.front().scrap_mass_kg.size());
  std::vector<WindowEstimate> out;
  for (int t : emission_positions(static_cast<int>(heats.size()), cfg)) {
    const WindowProblem p = scratch_problem(heats, t - cfg.window, t, element, cfg.fixed_ell, n);
    WindowEstimate est;
    if (solve_position(heats, t, p, element, cfg, n, est)) out.push_back(std::move(est));
  }
  return out;
}

std::vector<WindowEstimate> windowed_nnls(const std::vector<HeatRecord>& heats,
                                          const ElementSpec& element, const WindowConfig& cfg) {
  cfg.validate();
  if (heats.empty()) return {};
  const int n = static_cast<int>(heats.front().scrap_mass_kg.size());
  const std::vector<int> positions = emission_positions(static_cast<int>(heats.size()), cfg);
  if (positions.empty()) return {};

  constexpr int kChunk = 256;  // fixed grid: results independent of thread count
  const int n_chunks = (static_cast<int>(positions.size()) + kChunk - 1) / kChunk;
  std::vector<WindowEstimate> slots(positions.size());
  std::vector<std::uint8_t> emitted(positions.size(), 0);

#pragma omp parallel for schedule(dynamic)
  for (int c = 0; c < n_chunks; ++c) {
    const int p_begin = c * kChunk;
    const int p_end = std::min(p_begin + kChunk, static_cast<int>(positions.size()));
    int t = positions[static_cast<std::size_t>(p_begin)];
    WindowProblem prob = scratch_problem(heats, t - cfg.window, t, element, cfg.fixed_ell, n);
    for (int pi = p_begin; pi < p_end; ++pi) {
      const int target = positions[static_cast<std::size_t>(pi)];
      // Slide the window forward: rows enter at the front, leave at the back.
      for (; t < target; ++t) {
        accumulate_row(prob, heats[static_cast<std::size_t>(t)], element, cfg.fixed_ell, 1.0);
        accumulate_row(prob, heats[static_cast<std::size_t>(t - cfg.window)], element,
                       cfg.fixed_ell, -1.0);
      }
      WindowEstimate est;
      if (solve_position(heats, target, prob, element, cfg, n, est)) {
        slots[static_cast<std::size_t>(pi)] = std::move(est);
        emitted[static_cast<std::size_t>(pi)] = 1;
      }
    }
  }

  std::vector<WindowEstimate> out;
  out.reserve(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i)
    if (emitted[i]) out.push_back(std::move(slots[i]));
  return out;
}

OlsInitResult ols_init(const std::vector<HeatRecord>& heats, const ElementSpec& element,
                       double fixed_ell) {
  if (heats.empty()) throw DomainError("ols_init: no heats");
  const int n = static_cast<int>(heats.front().scrap_mass_kg.size());
  long rows = 0;
  for (const auto& h : heats)
    if (h.f_steel) ++rows;
  if (rows < 1) throw DomainError("ols_init: no usable rows (f_steel missing everywhere)");

  Eigen::MatrixXd X(rows, n);
  Eigen::VectorXd y(rows);
  long r = 0;
  for (const auto& h : heats) {
    if (!h.f_steel) continue;
    X.row(r) = h.scrap_mass_kg.transpose();
    y[r] = observation_target(h, element, fixed_ell);
    ++r;
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-10);
  OlsInitResult res;
  res.rank = static_cast<int>(svd.rank());
  res.rank_deficient = res.rank < n;
  res.q = svd.solve(y).cwiseMax(0.0);
  return res;
}

}  // namespace scrapest::baseline
