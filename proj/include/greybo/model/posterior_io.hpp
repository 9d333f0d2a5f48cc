#ifndef GREYBO_MODEL_POSTERIOR_IO_HPP
#define GREYBO_MODEL_POSTERIOR_IO_HPP

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

#include "greybo/model/posterior.hpp"

namespace greybo {

inline constexpr int kPosteriorFormatVersion = 1;

// Versioned JSON record: mean, precision as row-major lower triangle, log-det.
inline nlohmann::json posterior_to_json(const GaussianPosterior& post) {
  const Eigen::Index d = post.dim();
  std::vector<double> lower;
  lower.reserve(static_cast<std::size_t>(d * (d + 1) / 2));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) lower.push_back(post.precision()(i, j));
  }
  return nlohmann::json{
      {"format", "greybo.posterior"},
      {"version", kPosteriorFormatVersion},
      {"dim", d},
      {"mean", std::vector<double>(post.mean().data(), post.mean().data() + d)},
      {"precision_lower", lower},
      {"log_det_precision", post.log_det_precision()},
  };
}

inline GaussianPosterior posterior_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "greybo.posterior") {
    throw std::runtime_error("not a posterior record");
  }
  if (j.value("version", -1) != kPosteriorFormatVersion) {
    throw std::runtime_error("unsupported posterior record version");
  }
  const Eigen::Index d = j.at("dim").get<Eigen::Index>();
  const auto mean_vals = j.at("mean").get<std::vector<double>>();
  const auto lower = j.at("precision_lower").get<std::vector<double>>();
  if (mean_vals.size() != static_cast<std::size_t>(d) ||
      lower.size() != static_cast<std::size_t>(d * (d + 1) / 2)) {
    throw std::runtime_error("posterior record has inconsistent sizes");
  }
  Eigen::VectorXd mean = Eigen::Map<const Eigen::VectorXd>(mean_vals.data(), d);
  Eigen::MatrixXd precision(d, d);
  std::size_t idx = 0;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j2 = 0; j2 <= i; ++j2) {
      precision(i, j2) = lower[idx];
      precision(j2, i) = lower[idx];
      ++idx;
    }
  }
  return GaussianPosterior(std::move(mean), std::move(precision),
                           j.at("log_det_precision").get<double>());
}

}  // namespace greybo

#endif  // GREYBO_MODEL_POSTERIOR_IO_HPP
