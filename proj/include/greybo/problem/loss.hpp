#ifndef GREYBO_PROBLEM_LOSS_HPP
#define GREYBO_PROBLEM_LOSS_HPP

#include <Eigen/Core>

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "greybo/math/rng.hpp"

namespace greybo {

// Compact box input domain [lower, upper].
class BoxDomain {
 public:
  BoxDomain() = default;
  BoxDomain(Eigen::VectorXd lower, Eigen::VectorXd upper)
      : lower_(std::move(lower)), upper_(std::move(upper)) {
    if (lower_.size() != upper_.size() || (lower_.array() > upper_.array()).any()) {
      throw std::invalid_argument("invalid box bounds");
    }
  }
  static BoxDomain cube(Eigen::Index dim, double lo, double hi) {
    return BoxDomain(Eigen::VectorXd::Constant(dim, lo),
                     Eigen::VectorXd::Constant(dim, hi));
  }

  Eigen::Index dim() const { return lower_.size(); }
  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  bool contains(const Eigen::VectorXd& u, double tol = 1e-12) const {
    return (u.array() >= lower_.array() - tol).all() &&
           (u.array() <= upper_.array() + tol).all();
  }
  Eigen::VectorXd clamp(const Eigen::VectorXd& u) const {
    return u.cwiseMax(lower_).cwiseMin(upper_);
  }
  Eigen::VectorXd center() const { return 0.5 * (lower_ + upper_); }
  Eigen::VectorXd sample(Rng& rng) const {
    Eigen::VectorXd u(dim());
    for (Eigen::Index i = 0; i < dim(); ++i) u[i] = rng.uniform(lower_[i], upper_[i]);
    return u;
  }
  // Uniform grid, only meaningful for one-dimensional domains.
  std::vector<double> grid_1d(int points) const {
    if (dim() != 1) throw std::logic_error("grid_1d requires a one-dimensional domain");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
      const double t = points == 1 ? 0.5 : static_cast<double>(i) / (points - 1);
      g[static_cast<std::size_t>(i)] = lower_[0] + t * (upper_[0] - lower_[0]);
    }
    return g;
  }

 private:
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

// Known outer loss l(u, z) with gradients and a bound on ||dl/dz|| over the
// reachable outputs (used by the regret bounds).
struct LossFunction {
  using EvalFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
  using GradFn =
      std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

  EvalFn eval;
  GradFn grad_z;
  GradFn grad_u;  // optional, may be empty
  double lipschitz_Lz = 0.0;
  bool convex_in_z = false;
  std::optional<double> lower_bound;  // global lower bound, when known

  double operator()(const Eigen::VectorXd& u, const Eigen::VectorXd& z) const {
    return eval(u, z);
  }
};

// Affine input-output map z = B u + b.
struct AffineModel {
  Eigen::MatrixXd B;
  Eigen::VectorXd b;

  Eigen::VectorXd predict(const Eigen::VectorXd& u) const { return B * u + b; }
  Eigen::Index output_dim() const { return B.rows(); }
  Eigen::Index input_dim() const { return B.cols(); }
};

// Quadratic loss family l(u, z) = (z - z_ref)^T Qz (z - z_ref) + u^T R u.
// Covers both benchmark losses and the custom problem files.
struct QuadraticLossData {
  Eigen::MatrixXd q_z;    // symmetric PSD output weight
  Eigen::MatrixXd r_u;    // symmetric PSD control weight
  Eigen::VectorXd z_ref;  // output reference

  double eval(const Eigen::VectorXd& u, const Eigen::VectorXd& z) const {
    const Eigen::VectorXd dz = z - z_ref;
    return dz.dot(q_z * dz) + u.dot(r_u * u);
  }
  Eigen::VectorXd grad_z(const Eigen::VectorXd& z) const {
    return 2.0 * (q_z * (z - z_ref));
  }
  Eigen::VectorXd grad_u(const Eigen::VectorXd& u) const { return 2.0 * (r_u * u); }
};

// Quadratic function of u: 0.5 u^T H u + g^T u + c.
struct QuadraticObjective {
  Eigen::MatrixXd H;
  Eigen::VectorXd g;
  double c = 0.0;

  double value(const Eigen::VectorXd& u) const {
    return 0.5 * u.dot(H * u) + g.dot(u) + c;
  }
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const { return H * u + g; }
};

// The composite u -> l(u, Bu + b) for a quadratic loss is itself quadratic.
inline QuadraticObjective compose_quadratic(const AffineModel& model,
                                            const QuadraticLossData& loss) {
  const Eigen::VectorXd shift = model.b - loss.z_ref;
  QuadraticObjective q;
  q.H = 2.0 * (model.B.transpose() * loss.q_z * model.B + loss.r_u);
  q.g = model.B.transpose() * (2.0 * (loss.q_z * shift));
  q.c = shift.dot(loss.q_z * shift);
  return q;
}

inline LossFunction make_loss(const QuadraticLossData& data, double lipschitz_Lz) {
  LossFunction l;
  l.eval = [data](const Eigen::VectorXd& u, const Eigen::VectorXd& z) {
    return data.eval(u, z);
  };
  l.grad_z = [data](const Eigen::VectorXd&, const Eigen::VectorXd& z) {
    return data.grad_z(z);
  };
  l.grad_u = [data](const Eigen::VectorXd& u, const Eigen::VectorXd&) {
    return data.grad_u(u);
  };
  l.lipschitz_Lz = lipschitz_Lz;
  l.convex_in_z = true;
  l.lower_bound = 0.0;
  return l;
}

// Exact optimum of the problem, used as the regret oracle.
struct GroundTruth {
  Eigen::VectorXd theta_star;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> f_star;
  std::function<double(const Eigen::VectorXd&)> phi_star;
  Eigen::VectorXd u_star;
  double phi_star_min = 0.0;
};

// Structure-agnostic surrogate: a scalar objective model that is linear in
// its parameters, phi(u) ~ nominal_part(u) + psi(u)^T theta_phi.
struct AgnosticSurrogate {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> features;  // psi(u)
  Eigen::Index param_dim = 0;
  std::function<double(const Eigen::VectorXd&)> nominal_part;  // may be empty (== 0)
  std::optional<Eigen::VectorXd> theta_phi_star;  // exact parameters, when known
  double a_bar = 0.0;  // bound on ||psi(u)|| over the domain

  double nominal(const Eigen::VectorXd& u) const {
    return nominal_part ? nominal_part(u) : 0.0;
  }
};

}  // namespace greybo

#endif  // GREYBO_PROBLEM_LOSS_HPP
