#include "scrapest/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <set>
#include <sstream>

namespace scrapest {

void ScrapCatalog::validate() const {
  if (scrap_ids.empty()) throw DomainError("catalog must list at least one scrap type");
  std::set<std::string> seen;
  for (const auto& id : scrap_ids) {
    if (!seen.insert(id).second) throw DomainError("duplicate scrap id: " + id);
  }
  if (!display_names.empty() && display_names.size() != scrap_ids.size())
    throw DomainError("display_names length does not match scrap_ids");
}

ScrapCatalog ScrapCatalog::numbered(int n_scrap) {
  ScrapCatalog cat;
  cat.scrap_ids.reserve(static_cast<std::size_t>(n_scrap));
  for (int i = 1; i <= n_scrap; ++i) {
    std::ostringstream os;
    if (i < 10) os << '0';
    os << i;
    cat.scrap_ids.push_back(os.str());
  }
  return cat;
}

namespace {

void require_fraction(double v, const char* name, int heat_index) {
  if (!(v >= 0.0 && v <= 1.0)) {
    std::ostringstream os;
    os << "heat " << heat_index << ": " << name << " = " << v << " outside [0, 1]";
    throw DomainError(os.str());
  }
}

void require_nonneg(double v, const char* name, int heat_index) {
  if (!(v >= 0.0)) {
    std::ostringstream os;
    os << "heat " << heat_index << ": " << name << " = " << v << " is negative";
    throw DomainError(os.str());
  }
}

}  // namespace

void HeatRecord::validate(int n_scrap) const {
  if (heat_index < 1) throw DomainError("heat_index must be >= 1");
  if (scrap_mass_kg.size() != n_scrap) {
    std::ostringstream os;
    os << "heat " << heat_index << ": scrap mass vector has length " << scrap_mass_kg.size()
       << ", catalog has " << n_scrap;
    throw DomainError(os.str());
  }
  for (int i = 0; i < scrap_mass_kg.size(); ++i)
    require_nonneg(scrap_mass_kg[i], "scrap mass", heat_index);
  require_nonneg(m_hm_kg, "m_hm", heat_index);
  require_nonneg(m_steel_kg, "m_steel", heat_index);
  require_nonneg(m_slag_kg, "m_slag", heat_index);
  require_fraction(f_hm, "f_hm", heat_index);
  if (f_steel) {
    require_fraction(*f_steel, "f_steel", heat_index);
    if (!(m_steel_kg > 0.0)) {
      std::ostringstream os;
      os << "heat " << heat_index << ": f_steel present but m_steel = " << m_steel_kg;
      throw DomainError(os.str());
    }
  }
  if (f_feon_slag) require_fraction(*f_feon_slag, "f_feon_slag", heat_index);
}

void GaussianBelief::validate(double sym_rel_tol, double psd_tol) const {
  if (cov.rows() != mean.size() || cov.cols() != mean.size())
    throw DomainError("belief covariance dimension does not match mean");
  const double scale = std::max(cov.cwiseAbs().maxCoeff(), 1e-300);
  const double asym = (cov - cov.transpose()).cwiseAbs().maxCoeff();
  if (asym > sym_rel_tol * scale) throw DomainError("belief covariance is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov, Eigen::EigenvaluesOnly);
  const double min_eig = es.eigenvalues().minCoeff();
  if (min_eig < -psd_tol * std::max(cov.trace(), 1e-300))
    throw DomainError("belief covariance is not positive semidefinite");
}

Eigen::VectorXd NoiseSpec::p_inf_diag() const {
  return (gamma / (2.0 - gamma)) * Q_diag;
}

Eigen::VectorXd NoiseSpec::p_c_inf_diag() const {
  if (!Qc_diag) throw DomainError("no partition-parameter covariance in this NoiseSpec");
  return (gamma / (2.0 - gamma)) * *Qc_diag;
}

void NoiseSpec::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw DomainError("gamma must lie in (0, 1]");
  if (q.size() == 0) throw DomainError("empty process-noise mean");
  if (Q_diag.size() != q.size()) throw DomainError("Q diagonal length does not match q");
  if ((Q_diag.array() < 0.0).any()) throw DomainError("Q diagonal has negative entries");
  if (!(H >= 0.0)) throw DomainError("observation variance H must be >= 0");
  if (q_c.has_value() != Qc_diag.has_value())
    throw DomainError("q_c and Q_c must be given together");
  if (Qc_diag && (Qc_diag->array() < 0.0).any())
    throw DomainError("Q_c diagonal has negative entries");
}

void NoiseSpec::validate_beta_feasible() const {
  for (int i = 0; i < q.size(); ++i) {
    const double qi = q[i];
    if (!(qi > 0.0 && qi < 1.0)) {
      std::ostringstream os;
      os << "component " << i << ": mean " << qi << " outside (0, 1), Beta matching impossible";
      throw MomentMatchingError(os.str(), i);
    }
    if (Q_diag[i] > 0.0 && !(Q_diag[i] < qi * (1.0 - qi))) {
      std::ostringstream os;
      os << "component " << i << ": variance " << Q_diag[i] << " >= q(1-q) = "
         << qi * (1.0 - qi) << ", Beta matching infeasible";
      throw MomentMatchingError(os.str(), i);
    }
  }
}

NoiseSpec NoiseSpec::from_matrices(double gamma, const Eigen::VectorXd& q,
                                   const Eigen::MatrixXd& Q, double H) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size())
    throw DomainError("Q must be square with dimension matching q");
  for (int i = 0; i < Q.rows(); ++i)
    for (int j = 0; j < Q.cols(); ++j)
      if (i != j && Q(i, j) != 0.0)
        throw DomainError("process-noise covariance must be diagonal");
  NoiseSpec spec;
  spec.gamma = gamma;
  spec.q = q;
  spec.Q_diag = Q.diagonal();
  spec.H = H;
  spec.validate();
  return spec;
}

}  // namespace scrapest
