#ifndef GREYBO_MODEL_POSTERIOR_HPP
#define GREYBO_MODEL_POSTERIOR_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "greybo/math/linalg.hpp"
#include "greybo/math/rng.hpp"
#include "greybo/model/lip_model.hpp"

namespace greybo {

// Gaussian belief over the model parameters theta, kept in information
// (precision) form so that near-noiseless updates stay well conditioned.
// The covariance is only materialized on demand through Cholesky solves.
// Values are immutable snapshots; updates return new posteriors.
class GaussianPosterior {
 public:
  GaussianPosterior() = default;
  GaussianPosterior(Eigen::VectorXd mean, Eigen::MatrixXd precision,
                    double log_det_precision)
      : mean_(std::move(mean)),
        precision_(std::move(precision)),
        log_det_precision_(log_det_precision) {}

  // Isotropic prior N(mu0, sigma0^2 I).
  static GaussianPosterior prior(Eigen::Index dim, double sigma0,
                                 const Eigen::VectorXd& mu0 = Eigen::VectorXd()) {
    if (sigma0 <= 0.0) throw std::invalid_argument("sigma0 must be positive");
    Eigen::VectorXd mean = mu0.size() == 0 ? Eigen::VectorXd::Zero(dim) : mu0;
    if (mean.size() != dim) throw std::invalid_argument("prior mean has wrong dimension");
    const double lam = 1.0 / (sigma0 * sigma0);
    return GaussianPosterior(std::move(mean),
                             Eigen::MatrixXd::Identity(dim, dim) * lam,
                             -2.0 * static_cast<double>(dim) * std::log(sigma0));
  }

  Eigen::Index dim() const { return mean_.size(); }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& precision() const { return precision_; }
  double log_det_precision() const { return log_det_precision_; }

  Eigen::MatrixXd covariance() const {
    return cholesky(precision_, "posterior precision")
        .solve(Eigen::MatrixXd::Identity(dim(), dim()));
  }

  // Factor C with C C^T = covariance, computed from the precision Cholesky.
  Eigen::MatrixXd covariance_factor() const {
    const Eigen::MatrixXd l = cholesky(precision_, "posterior precision").matrixL();
    return l.triangularView<Eigen::Lower>()
        .transpose()
        .solve(Eigen::MatrixXd::Identity(dim(), dim()));
  }

  // Mahalanobis distance ||theta - mean||_Lambda induced by the precision.
  double precision_norm(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd diff = theta - mean_;
    const double sq = diff.dot(precision_ * diff);
    return std::sqrt(std::max(0.0, sq));
  }

  bool valid(double sym_tol = 1e-10) const {
    if (!mean_.allFinite() || !precision_.allFinite()) return false;
    if (!is_symmetric(precision_, sym_tol)) return false;
    Eigen::LLT<Eigen::MatrixXd> llt(precision_);
    return llt.info() == Eigen::Success;
  }

 private:
  Eigen::VectorXd mean_;
  Eigen::MatrixXd precision_;
  double log_det_precision_ = 0.0;
};

// One Bayesian linear regression step in information form with the feature
// matrix given explicitly:
//   Lambda' = Lambda + A^T Sigma_v^{-1} A
//   Lambda' mu' = Lambda mu + A^T Sigma_v^{-1} residual
// The log-determinant is carried along through the rank-m determinant
// identity det(Lambda') = det(Lambda) det(I_m + Sv^{-1/2} A Lambda^{-1} A^T Sv^{-1/2}).
inline GaussianPosterior update_posterior_with(const GaussianPosterior& post,
                                               const Eigen::MatrixXd& a,
                                               const NoiseModel& noise,
                                               const Eigen::VectorXd& residual) {
  const Eigen::Index d = post.dim();
  const Eigen::Index m = a.rows();
  if (a.cols() != d) throw std::invalid_argument("feature matrix has wrong width");
  if (residual.size() != m) throw std::invalid_argument("observation has wrong dimension");
  if (noise.output_dim() != m) throw std::invalid_argument("noise model has wrong dimension");
  if (!a.allFinite() || !residual.allFinite()) {
    throw std::invalid_argument("non-finite inputs in posterior update");
  }

  const Eigen::VectorXd inv_var = noise.inv_variances();
  const Eigen::MatrixXd a_weighted = inv_var.asDiagonal() * a;

  Eigen::MatrixXd precision = symmetrize(post.precision() + a.transpose() * a_weighted);

  const auto llt = cholesky(post.precision(), "posterior precision");
  const Eigen::MatrixXd sigma_at = llt.solve(a.transpose());  // Sigma A^T
  const Eigen::MatrixXd inner =
      symmetrize(Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m) +
                                 noise.sigma_v().cwiseInverse().asDiagonal() *
                                     (a * sigma_at) *
                                     noise.sigma_v().cwiseInverse().asDiagonal()));
  const double log_det = post.log_det_precision() + spd_log_det(inner);

  const Eigen::VectorXd info_vec =
      post.precision() * post.mean() + a.transpose() * (inv_var.asDiagonal() * residual);
  const Eigen::VectorXd mean = cholesky(precision, "updated precision").solve(info_vec);

  return GaussianPosterior(mean, std::move(precision), log_det);
}

// Recursive posterior update from one (input, observation) pair.
inline GaussianPosterior update_posterior(const GaussianPosterior& post,
                                          const LipModel& model, const NoiseModel& noise,
                                          const Eigen::VectorXd& u,
                                          const Eigen::VectorXd& y) {
  if (!u.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite inputs in posterior update");
  }
  if (y.size() != model.output_dim()) {
    throw std::invalid_argument("observation has wrong dimension");
  }
  return update_posterior_with(post, model.features(u), noise, y - model.offset(u));
}

// Same update expressed as m rank-one scalar steps over the rows of A(u).
// Requires (and exploits) the diagonal noise covariance.
inline GaussianPosterior update_posterior_scalarized(const GaussianPosterior& post,
                                                     const LipModel& model,
                                                     const NoiseModel& noise,
                                                     const Eigen::VectorXd& u,
                                                     const Eigen::VectorXd& y) {
  if (!u.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("non-finite inputs in posterior update");
  }
  const Eigen::MatrixXd a = model.features(u);
  const Eigen::VectorXd residual = y - model.offset(u);
  if (residual.size() != a.rows()) {
    throw std::invalid_argument("observation has wrong dimension");
  }
  GaussianPosterior current = post;
  for (Eigen::Index k = 0; k < a.rows(); ++k) {
    const NoiseModel row_noise(Eigen::VectorXd::Constant(1, noise.sigma_v()[k]));
    current = update_posterior_with(current, a.row(k), row_noise,
                                    residual.segment(k, 1));
  }
  return current;
}

// Draw theta ~ N(mean, covariance), deterministic for a fixed seed.
inline Eigen::VectorXd sample_parameters(const GaussianPosterior& post,
                                         std::uint64_t rng_seed) {
  const Eigen::MatrixXd factor = psd_factor(post.covariance());
  Rng rng(rng_seed);
  return post.mean() + factor * rng.normal_vector(post.dim());
}

inline Eigen::VectorXd sample_parameters(const GaussianPosterior& post, Rng& rng) {
  const Eigen::MatrixXd factor = psd_factor(post.covariance());
  return post.mean() + factor * rng.normal_vector(post.dim());
}

}  // namespace greybo

#endif  // GREYBO_MODEL_POSTERIOR_HPP
