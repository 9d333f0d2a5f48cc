#ifndef GREYBO_MATH_LINALG_HPP
#define GREYBO_MATH_LINALG_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace greybo {

inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  return m.allFinite();
}

inline bool is_symmetric(const Eigen::Ref<const Eigen::MatrixXd>& m,
                         double rel_tol = 1e-10) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

inline Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

// Cholesky of a symmetric positive-definite matrix; throws on failure.
inline Eigen::LLT<Eigen::MatrixXd> cholesky(const Eigen::MatrixXd& m,
                                            const char* what = "matrix") {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error(std::string("Cholesky factorization failed for ") + what);
  }
  return llt;
}

inline double spd_log_det(const Eigen::MatrixXd& m) {
  const Eigen::LLT<Eigen::MatrixXd> llt = cholesky(m, "log-det argument");
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

// Spectral norm of a symmetric matrix.
inline double sym_spectral_norm(const Eigen::MatrixXd& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::abs(m(0, 0));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(m),
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Factor C with C C^T = S for symmetric positive-semidefinite S.
// Uses Cholesky when S is definite and an eigenvalue square root otherwise.
inline Eigen::MatrixXd psd_factor(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(symmetrize(s));
  if (llt.info() == Eigen::Success) return llt.matrixL();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(s));
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition failed in psd_factor");
  }
  const Eigen::VectorXd clamped = es.eigenvalues().cwiseMax(0.0);
  return es.eigenvectors() * clamped.cwiseSqrt().asDiagonal();
}

}  // namespace greybo

#endif  // GREYBO_MATH_LINALG_HPP
