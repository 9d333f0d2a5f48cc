#ifndef GREYBO_PROBLEM_PROBLEM_FILE_HPP
#define GREYBO_PROBLEM_PROBLEM_FILE_HPP

#include <Eigen/Core>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "greybo/cli/kv_parser.hpp"
#include "greybo/problem/problems.hpp"

namespace greybo {

// Declarative problem description: nominal and true affine dynamics, a
// quadratic tracking loss and the box bounds. Matrices are written row by
// row with `;` separating rows; scalar bounds and references broadcast.
//
//   name = mismatch2
//   inputs = 2
//   outputs = 2
//   B = 0.5 0 ; 0 0.5
//   b = 0 0
//   B_star = 1 0 ; 0 1
//   b_star = 0 0
//   z_ref = 0.5
//   w_output = 1
//   w_control = 10
//   w_terminal = 0
//   lower = -10
//   upper = 10
//   correction = dense            # or lower_triangular
inline Problem parse_problem_file(const std::string& text) {
  std::optional<Eigen::Index> nu, m;
  std::optional<Eigen::MatrixXd> b_mat, bstar_mat;
  std::optional<Eigen::VectorXd> b_vec, bstar_vec, z_ref, lower, upper;
  double w_output = 1.0, w_control = 0.0, w_terminal = 0.0;
  std::string name = "custom";
  std::string correction = "dense";
  int last_line = 0;

  const auto parse_matrix = [](const detail::KvEntry& e, Eigen::Index rows,
                               Eigen::Index cols) {
    Eigen::MatrixXd mat(rows, cols);
    std::istringstream row_stream(e.value);
    std::string row_text;
    Eigen::Index r = 0;
    while (std::getline(row_stream, row_text, ';')) {
      if (r >= rows) throw ConfigError(e.line, "too many rows in `" + e.key + "`");
      std::istringstream ss(row_text);
      for (Eigen::Index c = 0; c < cols; ++c) {
        if (!(ss >> mat(r, c))) {
          throw ConfigError(e.line, "row " + std::to_string(r + 1) + " of `" + e.key +
                                        "` needs " + std::to_string(cols) + " numbers");
        }
      }
      std::string rest;
      if (ss >> rest) throw ConfigError(e.line, "trailing text in `" + e.key + "`");
      ++r;
    }
    if (r != rows) throw ConfigError(e.line, "`" + e.key + "` needs " +
                                                 std::to_string(rows) + " rows");
    return mat;
  };
  const auto broadcast = [](const detail::KvEntry& e, Eigen::Index n) {
    const std::vector<double> values = detail::parse_numbers(e);
    Eigen::VectorXd v(n);
    if (values.size() == 1) {
      v.setConstant(values[0]);
    } else if (static_cast<Eigen::Index>(values.size()) == n) {
      for (Eigen::Index i = 0; i < n; ++i) v[i] = values[static_cast<std::size_t>(i)];
    } else {
      throw ConfigError(e.line, "`" + e.key + "` needs 1 or " + std::to_string(n) +
                                    " numbers");
    }
    return v;
  };
  const auto need_dims = [&](const detail::KvEntry& e) {
    if (!nu || !m) {
      throw ConfigError(e.line, "declare `inputs` and `outputs` before `" + e.key + "`");
    }
  };

  for (const detail::KvEntry& e : detail::parse_kv_lines(text)) {
    last_line = e.line;
    if (e.key.empty()) throw ConfigError(e.line, "problem files have no sections");
    if (e.key == "name") {
      name = e.value;
    } else if (e.key == "inputs") {
      nu = static_cast<Eigen::Index>(detail::parse_int(e));
    } else if (e.key == "outputs") {
      m = static_cast<Eigen::Index>(detail::parse_int(e));
    } else if (e.key == "B") {
      need_dims(e);
      b_mat = parse_matrix(e, *m, *nu);
    } else if (e.key == "B_star") {
      need_dims(e);
      bstar_mat = parse_matrix(e, *m, *nu);
    } else if (e.key == "b") {
      need_dims(e);
      b_vec = broadcast(e, *m);
    } else if (e.key == "b_star") {
      need_dims(e);
      bstar_vec = broadcast(e, *m);
    } else if (e.key == "z_ref") {
      need_dims(e);
      z_ref = broadcast(e, *m);
    } else if (e.key == "w_output") {
      w_output = detail::parse_double(e);
    } else if (e.key == "w_control") {
      w_control = detail::parse_double(e);
    } else if (e.key == "w_terminal") {
      w_terminal = detail::parse_double(e);
    } else if (e.key == "lower") {
      need_dims(e);
      lower = broadcast(e, *nu);
    } else if (e.key == "upper") {
      need_dims(e);
      upper = broadcast(e, *nu);
    } else if (e.key == "correction") {
      if (e.value != "dense" && e.value != "lower_triangular") {
        throw ConfigError(e.line, "correction must be dense or lower_triangular");
      }
      correction = e.value;
    } else {
      throw ConfigError(e.line, "unknown key: " + e.key);
    }
  }

  const auto require = [&](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(last_line, "missing required key `" + what + "`");
  };
  require(nu.has_value(), "inputs");
  require(m.has_value(), "outputs");
  require(b_mat.has_value(), "B");
  require(b_vec.has_value(), "b");
  require(bstar_mat.has_value(), "B_star");
  require(bstar_vec.has_value(), "b_star");
  require(z_ref.has_value(), "z_ref");
  require(lower.has_value(), "lower");
  require(upper.has_value(), "upper");
  if (correction == "lower_triangular" && *nu != *m) {
    throw ConfigError(last_line, "lower_triangular correction needs inputs == outputs");
  }

  Problem p;
  p.name = name;
  p.domain = BoxDomain(*lower, *upper);

  AffineModel nominal{*b_mat, *b_vec};
  AffineModel plant{*bstar_mat, *bstar_vec};
  p.nominal = nominal;
  p.plant = plant;

  QuadraticLossData quad;
  quad.q_z = w_output * Eigen::MatrixXd::Identity(*m, *m);
  quad.q_z(*m - 1, *m - 1) += w_terminal;
  quad.r_u = w_control * Eigen::MatrixXd::Identity(*nu, *nu);
  quad.z_ref = *z_ref;
  p.quad_loss = quad;

  const Eigen::Index rows = *m, cols = *nu;
  const bool triangular = correction == "lower_triangular";
  const Eigen::Index d1 =
      triangular ? rows * (rows + 1) / 2 : rows * cols;
  const Eigen::Index d = d1 + rows;
  const auto entry_index = [triangular, cols](Eigen::Index r, Eigen::Index c) {
    return triangular ? detail::tri_index(r, c) : r * cols + c;
  };

  p.model = LipModel(
      d, rows,
      [rows, cols, d, d1, triangular, entry_index,
       nominal](const Eigen::VectorXd& u) {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, d);
        for (Eigen::Index r = 0; r < rows; ++r) {
          const Eigen::Index width = triangular ? r + 1 : cols;
          for (Eigen::Index c = 0; c < width; ++c) a(r, entry_index(r, c)) = u[c];
          a(r, d1 + r) = 1.0;
        }
        return a;
      },
      [nominal](const Eigen::VectorXd& u) { return nominal.predict(u); });
  Eigen::VectorXd corner(*nu);
  for (Eigen::Index j = 0; j < *nu; ++j) {
    corner[j] = std::max(std::abs((*lower)[j]), std::abs((*upper)[j]));
  }
  p.model.set_frobenius_bound(p.model.features(corner).norm());

  // the mismatch must be representable by the correction structure
  const Eigen::MatrixXd mismatch = plant.B - nominal.B;
  if (triangular) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = r + 1; c < cols; ++c) {
        if (std::abs(mismatch(r, c)) > 1e-12) {
          throw ConfigError(last_line,
                            "plant mismatch is not lower triangular but the "
                            "correction structure is");
        }
      }
    }
  }
  Eigen::VectorXd theta_star(d);
  theta_star.setZero();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index width = triangular ? r + 1 : cols;
    for (Eigen::Index c = 0; c < width; ++c) {
      theta_star[entry_index(r, c)] = mismatch(r, c);
    }
  }
  theta_star.tail(rows) = plant.b - nominal.b;
  p.truth.theta_star = theta_star;

  Eigen::VectorXd z_width(rows);
  for (Eigen::Index k = 0; k < rows; ++k) {
    double reach = std::abs(plant.b[k] - (*z_ref)[k]);
    for (Eigen::Index j = 0; j < cols; ++j) {
      reach += std::abs(plant.B(k, j)) * corner[j];
    }
    z_width[k] = reach;
  }
  Eigen::VectorXd grad_bound = 2.0 * w_output * z_width;
  grad_bound[rows - 1] += 2.0 * w_terminal * z_width[rows - 1];
  p.loss = make_loss(quad, grad_bound.norm());

  QuadraticLossData quad_copy = quad;
  p.truth.f_star = [plant](const Eigen::VectorXd& u) { return plant.predict(u); };
  p.truth.phi_star = [plant, quad_copy](const Eigen::VectorXd& u) {
    return quad_copy.eval(u, plant.predict(u));
  };
  const QuadraticObjective composite = compose_quadratic(plant, quad);
  const BoxQpResult opt = solve_box_qp(composite.H, composite.g, composite.c,
                                       p.domain.lower(), p.domain.upper());
  p.truth.u_star = opt.u;
  p.truth.phi_star_min = opt.value;

  p.surrogate.features = quadratic_correction_features;
  p.surrogate.param_dim = (cols + 1) * (cols + 2) / 2;
  AffineModel nominal_copy = nominal;
  p.surrogate.nominal_part = [nominal_copy, quad_copy](const Eigen::VectorXd& u) {
    return quad_copy.eval(u, nominal_copy.predict(u));
  };
  p.surrogate.a_bar = quadratic_correction_features(corner).norm();
  const QuadraticObjective nominal_quad = compose_quadratic(nominal, quad);
  QuadraticObjective diff;
  diff.H = composite.H - nominal_quad.H;
  diff.g = composite.g - nominal_quad.g;
  diff.c = composite.c - nominal_quad.c;
  p.surrogate.theta_phi_star = quadratic_to_surrogate_params(diff);

  p.affine_of_theta = [nominal_copy, rows, cols, d1, triangular,
                       entry_index](const Eigen::VectorXd& theta) {
    AffineModel a = nominal_copy;
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Eigen::Index width = triangular ? r + 1 : cols;
      for (Eigen::Index c = 0; c < width; ++c) a.B(r, c) += theta[entry_index(r, c)];
    }
    a.b += theta.tail(rows);
    return a;
  };
  return p;
}

inline Problem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open problem file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_problem_file(buffer.str());
}

// Resolve `example1`, `oscillator_ilc` or `file:<path>`.
inline Problem resolve_problem(const std::string& spec) {
  if (spec == "example1") return example1_problem();
  if (spec == "oscillator_ilc") return oscillator_ilc_problem();
  if (spec.rfind("file:", 0) == 0) return load_problem_file(spec.substr(5));
  throw std::runtime_error("unknown problem: " + spec +
                           " (expected example1, oscillator_ilc or file:<path>)");
}

}  // namespace greybo

#endif  // GREYBO_PROBLEM_PROBLEM_FILE_HPP
