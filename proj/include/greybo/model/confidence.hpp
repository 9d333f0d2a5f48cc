#ifndef GREYBO_MODEL_CONFIDENCE_HPP
#define GREYBO_MODEL_CONFIDENCE_HPP

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "greybo/math/linalg.hpp"
#include "greybo/model/lip_model.hpp"
#include "greybo/model/posterior.hpp"

namespace greybo {

// Ellipsoid { center + S^{1/2} v : ||v|| <= radius } with S the shape matrix.
// The shape may be singular (image of a parameter ellipsoid under a wide
// feature matrix); membership then additionally requires the point to lie in
// the affine subspace spanned by the shape, which matches the preimage
// semantics of the parameter-space confidence set.
class ConfidenceEllipsoid {
 public:
  ConfidenceEllipsoid(Eigen::VectorXd center, Eigen::MatrixXd shape, double radius)
      : center_(std::move(center)), shape_(std::move(shape)), radius_(radius) {
    if (radius_ < 0.0) throw std::invalid_argument("ellipsoid radius must be nonnegative");
    if (!center_.allFinite() || !shape_.allFinite()) {
      throw std::invalid_argument("non-finite ellipsoid parameters");
    }
  }

  const Eigen::VectorXd& center() const { return center_; }
  const Eigen::MatrixXd& shape() const { return shape_; }
  double radius() const { return radius_; }

  // Mahalanobis distance of z from the center in the metric of the shape,
  // infinite when z has a component outside the range of the shape.
  double distance(const Eigen::VectorXd& z, double range_tol = 1e-9) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrize(shape_));
    const Eigen::VectorXd evals = es.eigenvalues();
    const Eigen::VectorXd r = es.eigenvectors().transpose() * (z - center_);
    const double scale = std::max(evals.cwiseAbs().maxCoeff(), 1e-300);
    double sq = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
      if (evals[i] <= range_tol * scale) {
        if (std::abs(r[i]) > range_tol * std::sqrt(scale) * std::max(1.0, radius_)) {
          return std::numeric_limits<double>::infinity();
        }
      } else {
        sq += r[i] * r[i] / evals[i];
      }
    }
    return std::sqrt(sq);
  }

  bool contains(const Eigen::VectorXd& z, double slack = 1e-9) const {
    return distance(z) <= radius_ * (1.0 + slack) + slack;
  }

  Eigen::VectorXd support_point(const Eigen::VectorXd& direction) const {
    // arg max over the ellipsoid of <direction, z>
    const Eigen::VectorXd sd = shape_ * direction;
    const double denom = std::sqrt(std::max(0.0, direction.dot(sd)));
    if (denom == 0.0) return center_;
    return center_ + (radius_ / denom) * sd;
  }

 private:
  Eigen::VectorXd center_;
  Eigen::MatrixXd shape_;
  double radius_;
};

// Model confidence set for the outputs at input u: the image of the
// parameter ellipsoid E(mean, gamma^2 Sigma) under z = offset(u) + A(u) theta.
inline ConfidenceEllipsoid output_confidence_set(const GaussianPosterior& post,
                                                 const LipModel& model,
                                                 const Eigen::VectorXd& u, double gamma) {
  if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
  if (!u.allFinite()) throw std::invalid_argument("non-finite input");
  const Eigen::MatrixXd a = model.features(u);
  const Eigen::MatrixXd sigma_at =
      cholesky(post.precision(), "posterior precision").solve(a.transpose());
  return ConfidenceEllipsoid(model.offset(u) + a * post.mean(),
                             symmetrize(a * sigma_at), gamma);
}

// Schedules for the confidence scaling gamma_n.
struct GammaSchedule {
  enum class Kind { data_dependent, data_independent, log_heuristic, constant };

  Kind kind = Kind::log_heuristic;
  double delta = 0.1;        // confidence parameter, in (0, 1]
  double theta_bound = 1.0;  // bound on ||theta_*||
  double sigma0 = 1.0;
  Eigen::Index param_dim = 0;
  Eigen::Index output_dim = 0;
  double a_bar = 0.0;  // bound on ||A(u)||_F over the domain
  double constant_value = 1.0;

  static GammaSchedule data_dependent(double delta, double theta_bound, double sigma0,
                                      Eigen::Index d) {
    GammaSchedule s;
    s.kind = Kind::data_dependent;
    s.delta = delta;
    s.theta_bound = theta_bound;
    s.sigma0 = sigma0;
    s.param_dim = d;
    s.validate();
    return s;
  }
  static GammaSchedule data_independent(double delta, double theta_bound, double sigma0,
                                        Eigen::Index d, Eigen::Index m, double a_bar) {
    GammaSchedule s;
    s.kind = Kind::data_independent;
    s.delta = delta;
    s.theta_bound = theta_bound;
    s.sigma0 = sigma0;
    s.param_dim = d;
    s.output_dim = m;
    s.a_bar = a_bar;
    s.validate();
    return s;
  }
  static GammaSchedule log_heuristic() {
    GammaSchedule s;
    s.kind = Kind::log_heuristic;
    return s;
  }
  static GammaSchedule constant(double value) {
    GammaSchedule s;
    s.kind = Kind::constant;
    s.constant_value = value;
    if (value < 0.0) throw std::invalid_argument("constant gamma must be nonnegative");
    return s;
  }

  void validate() const {
    if (kind == Kind::data_dependent || kind == Kind::data_independent) {
      if (!(delta > 0.0 && delta <= 1.0)) {
        throw std::invalid_argument("delta must lie in (0, 1]");
      }
      if (sigma0 <= 0.0) throw std::invalid_argument("sigma0 must be positive");
    }
  }
};

// Confidence scaling at iteration n. The data-dependent variant reads the
// accumulated information from the posterior log-determinant; the
// data-independent variant is its closed-form upper bound.
inline double gamma_value(const GammaSchedule& schedule, int n,
                          const GaussianPosterior& post = GaussianPosterior()) {
  if (n < 0) throw std::invalid_argument("iteration index must be nonnegative");
  switch (schedule.kind) {
    case GammaSchedule::Kind::data_dependent: {
      schedule.validate();
      if (post.dim() == 0) {
        throw std::invalid_argument("data-dependent gamma needs the posterior");
      }
      const double log_ratio = 2.0 * static_cast<double>(post.dim()) *
                                   std::log(schedule.sigma0) +
                               post.log_det_precision();
      const double inner = 2.0 * std::log(1.0 / schedule.delta) + std::max(0.0, log_ratio);
      return schedule.theta_bound / schedule.sigma0 + std::sqrt(inner);
    }
    case GammaSchedule::Kind::data_independent: {
      schedule.validate();
      const double d = static_cast<double>(schedule.param_dim);
      const double m = static_cast<double>(schedule.output_dim);
      const double inner =
          2.0 * std::log(1.0 / schedule.delta) +
          d * std::log1p(m * n * schedule.a_bar * schedule.a_bar *
                         schedule.sigma0 * schedule.sigma0 / d);
      return schedule.theta_bound / schedule.sigma0 + std::sqrt(inner);
    }
    case GammaSchedule::Kind::log_heuristic:
      return std::log(std::exp(1.0) + static_cast<double>(n));
    case GammaSchedule::Kind::constant:
      return schedule.constant_value;
  }
  throw std::logic_error("unknown gamma schedule kind");
}

inline std::string to_string(GammaSchedule::Kind kind) {
  switch (kind) {
    case GammaSchedule::Kind::data_dependent: return "data_dependent";
    case GammaSchedule::Kind::data_independent: return "data_independent";
    case GammaSchedule::Kind::log_heuristic: return "log_heuristic";
    case GammaSchedule::Kind::constant: return "constant";
  }
  return "unknown";
}

}  // namespace greybo

#endif  // GREYBO_MODEL_CONFIDENCE_HPP
