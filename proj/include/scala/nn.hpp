// Copyright 2026 The SCALA Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "scala/common.hpp"

namespace scala::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

// A trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  std::uint64_t step_count = 0;

  Parameter() = default;
  Parameter(std::string n, Matrix init) : name(std::move(n)), value(std::move(init)) {
    grad = Matrix::Zero(value.rows(), value.cols());
    adam_m = grad;
    adam_v = grad;
  }

  Eigen::Index size() const { return value.size(); }
  void zero_grad() { grad.setZero(); }
  // Scalar parameters (PReLU slopes) are stored as 1x1.
  double scalar() const { return value(0, 0); }
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_stability = 1e-8;

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
      throw ConfigError("Adam betas must lie in (0, 1)");
    }
  }
};

// Glorot/Xavier uniform: U(-sqrt(6/(rows+cols)), +sqrt(6/(rows+cols))).
inline Matrix xavier_init(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  if (rows < 1 || cols < 1) throw ConfigError("xavier_init needs rows, cols >= 1");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = (2.0 * uniform01(rng) - 1.0) * bound;
  }
  return m;
}

// PReLU with one shared slope. The slope branch is taken at exactly 0.
template <typename Derived>
Matrix prelu(const Eigen::MatrixBase<Derived>& x, double slope) {
  return x.unaryExpr([slope](double v) { return v > 0.0 ? v : slope * v; });
}

// Returns dL/dx for upstream dL/dout and adds dL/dslope into `slope_grad`.
template <typename DerivedX, typename DerivedG>
Matrix prelu_backward(const Eigen::MatrixBase<DerivedX>& x,
                      const Eigen::MatrixBase<DerivedG>& grad_out, double slope,
                      double& slope_grad) {
  Matrix grad_in(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (v > 0.0) {
        grad_in(r, c) = grad_out(r, c);
      } else {
        grad_in(r, c) = slope * grad_out(r, c);
        slope_grad += v * grad_out(r, c);
      }
    }
  }
  return grad_in;
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline constexpr double kProbabilityClamp = 1e-7;

// -1/2 (log s+ + log(1 - s-)) on clamped sigmoid outputs, with derivatives
// with respect to the two logits (zero where the clamp is active).
struct ContrastLoss {
  double value = 0.0;
  double pos_score = 0.0;
  double neg_score = 0.0;
  double dlogit_pos = 0.0;
  double dlogit_neg = 0.0;
};

inline double clamp_probability(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

inline double bce(double pos_score, double neg_score) {
  return -0.5 * (std::log(clamp_probability(pos_score)) +
                 std::log(1.0 - clamp_probability(neg_score)));
}

inline ContrastLoss contrast_loss(double pos_logit, double neg_logit) {
  ContrastLoss out;
  const double sp = sigmoid(pos_logit);
  const double sn = sigmoid(neg_logit);
  out.pos_score = clamp_probability(sp);
  out.neg_score = clamp_probability(sn);
  out.value = bce(sp, sn);
  if (sp == out.pos_score) out.dlogit_pos = -0.5 * (1.0 - sp);
  if (sn == out.neg_score) out.dlogit_neg = 0.5 * sn;
  return out;
}

// Bias-corrected Adam; zeroes gradients afterwards.
inline void adam_step(std::span<Parameter* const> params, const AdamConfig& cfg) {
  for (const Parameter* p : params) {
    if (!p->grad.allFinite()) throw NumericError("non-finite gradient in parameter " + p->name);
  }
  for (Parameter* p : params) {
    ++p->step_count;
    const double t = static_cast<double>(p->step_count);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    p->adam_m = cfg.beta1 * p->adam_m + (1.0 - cfg.beta1) * p->grad;
    p->adam_v = cfg.beta2 * p->adam_v + (1.0 - cfg.beta2) * p->grad.cwiseAbs2();
    p->value.array() -= cfg.learning_rate * (p->adam_m.array() / correction1) /
                        ((p->adam_v.array() / correction2).sqrt() + cfg.eps_stability);
    if (!p->value.allFinite()) throw NumericError("non-finite value in parameter " + p->name);
    p->zero_grad();
  }
}

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::vector<std::pair<std::string, double>> per_parameter;
};

// Relative error between an analytic and a numeric derivative. Below the floor
// the comparison degrades gracefully to an absolute one.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

// Compares each parameter's `grad` (already filled by the caller's backward
// pass) against central differences of `loss`, on up to `probes` random
// coordinates per parameter (all of them when the parameter is smaller).
inline GradCheckReport grad_check(const std::function<double()>& loss,
                                  std::span<Parameter* const> params, std::size_t probes,
                                  Rng& rng, double step = 1e-4) {
  GradCheckReport report;
  for (Parameter* p : params) {
    const auto total = static_cast<std::uint64_t>(p->size());
    std::vector<std::uint64_t> coords;
    if (probes >= total) {
      for (std::uint64_t k = 0; k < total; ++k) coords.push_back(k);
    } else {
      for (std::size_t k = 0; k < probes; ++k) coords.push_back(uniform_index(rng, total));
    }
    double worst = 0.0;
    for (std::uint64_t k : coords) {
      double& w = p->value.data()[k];
      const double saved = w;
      w = saved + step;
      const double up = loss();
      w = saved - step;
      const double down = loss();
      w = saved;
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, relative_error(p->grad.data()[k], numeric));
    }
    report.per_parameter.emplace_back(p->name, worst);
    if (worst >= report.max_relative_error) {
      report.max_relative_error = worst;
      report.worst_parameter = p->name;
    }
  }
  return report;
}

inline nlohmann::json matrix_to_json(const Matrix& m) {
  return nlohmann::json{{"rows", m.rows()},
                        {"cols", m.cols()},
                        {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) {
    throw ParseError("checkpoint matrix has wrong element count");
  }
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

inline nlohmann::json to_json(const Parameter& p) {
  return nlohmann::json{{"name", p.name},
                        {"value", matrix_to_json(p.value)},
                        {"adam_m", matrix_to_json(p.adam_m)},
                        {"adam_v", matrix_to_json(p.adam_v)},
                        {"step_count", p.step_count}};
}

inline Parameter parameter_from_json(const nlohmann::json& j) {
  Parameter p(j.at("name").get<std::string>(), matrix_from_json(j.at("value")));
  p.adam_m = matrix_from_json(j.at("adam_m"));
  p.adam_v = matrix_from_json(j.at("adam_v"));
  p.step_count = j.at("step_count").get<std::uint64_t>();
  if (p.adam_m.rows() != p.value.rows() || p.adam_m.cols() != p.value.cols() ||
      p.adam_v.rows() != p.value.rows() || p.adam_v.cols() != p.value.cols()) {
    throw ParseError("checkpoint parameter " + p.name + " has mismatched Adam buffers");
  }
  return p;
}

}  // namespace scala::nn
