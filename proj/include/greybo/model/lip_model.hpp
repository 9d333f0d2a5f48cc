#ifndef GREYBO_MODEL_LIP_MODEL_HPP
#define GREYBO_MODEL_LIP_MODEL_HPP

#include <Eigen/Core>

#include <functional>
#include <stdexcept>
#include <utility>

#include "greybo/math/linalg.hpp"

namespace greybo {

// Linear-in-parameters output model: the predicted output at input u is
//   f(u, theta) = offset(u) + features(u) * theta,
// where features(u) is an m x d matrix that may depend nonlinearly on u and
// offset(u) is a known fixed part (e.g. the nominal affine dynamics).
class LipModel {
 public:
  using FeatureFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
  using OffsetFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

  LipModel() = default;
  LipModel(Eigen::Index param_dim, Eigen::Index output_dim, FeatureFn features,
           OffsetFn offset = nullptr, double frobenius_bound = 0.0)
      : param_dim_(param_dim),
        output_dim_(output_dim),
        features_(std::move(features)),
        offset_(std::move(offset)),
        frobenius_bound_(frobenius_bound) {}

  Eigen::Index param_dim() const { return param_dim_; }
  Eigen::Index output_dim() const { return output_dim_; }

  Eigen::MatrixXd features(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd a = features_(u);
    if (a.rows() != output_dim_ || a.cols() != param_dim_) {
      throw std::runtime_error("feature matrix has wrong shape");
    }
    return a;
  }

  Eigen::VectorXd offset(const Eigen::VectorXd& u) const {
    if (!offset_) return Eigen::VectorXd::Zero(output_dim_);
    return offset_(u);
  }

  Eigen::VectorXd predict(const Eigen::VectorXd& u, const Eigen::VectorXd& theta) const {
    return offset(u) + features(u) * theta;
  }

  // Upper bound on ||A(u)||_F over the input domain.
  double frobenius_bound() const { return frobenius_bound_; }
  void set_frobenius_bound(double value) { frobenius_bound_ = value; }

 private:
  Eigen::Index param_dim_ = 0;
  Eigen::Index output_dim_ = 0;
  FeatureFn features_;
  OffsetFn offset_;
  double frobenius_bound_ = 0.0;
};

// Diagonal Gaussian observation noise, one standard deviation per output.
class NoiseModel {
 public:
  NoiseModel() = default;
  explicit NoiseModel(Eigen::VectorXd sigma_v) : sigma_v_(std::move(sigma_v)) {
    if ((sigma_v_.array() <= 0.0).any()) {
      throw std::invalid_argument("noise standard deviations must be positive");
    }
  }
  static NoiseModel isotropic(Eigen::Index m, double sigma) {
    return NoiseModel(Eigen::VectorXd::Constant(m, sigma));
  }

  const Eigen::VectorXd& sigma_v() const { return sigma_v_; }
  Eigen::Index output_dim() const { return sigma_v_.size(); }

  Eigen::VectorXd variances() const { return sigma_v_.array().square(); }
  Eigen::VectorXd inv_variances() const { return sigma_v_.array().square().inverse(); }

  // trace(Sigma_v^{-1}), the nu_v constant of the log-det bound.
  double nu_v() const { return inv_variances().sum(); }

 private:
  Eigen::VectorXd sigma_v_;
};

}  // namespace greybo

#endif  // GREYBO_MODEL_LIP_MODEL_HPP
