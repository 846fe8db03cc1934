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

#include <array>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "scala/graph.hpp"
#include "scala/io.hpp"
#include "scala/nn.hpp"
#include "scala/sampler.hpp"

namespace scala {

// Nonzero cells of every attribute row. Bag-of-words attributes are mostly
// zero, so x_i W and x_i^T g only touch a few rows of W.
class SparseRows {
 public:
  SparseRows() = default;
  explicit SparseRows(const AttributeMatrix& x) : cols_(static_cast<std::size_t>(x.cols())) {
    offsets_.reserve(static_cast<std::size_t>(x.rows()) + 1);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) {
        if (x(r, c) != 0.0) {
          index_.push_back(static_cast<std::uint32_t>(c));
          values_.push_back(x(r, c));
        }
      }
      offsets_.push_back(index_.size());
    }
  }

  std::size_t num_rows() const { return offsets_.size() - 1; }
  std::size_t num_cols() const { return cols_; }

  // x_i W
  nn::RowVector times(NodeId i, const nn::Matrix& w) const {
    nn::RowVector out = nn::RowVector::Zero(w.cols());
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      out.noalias() += values_[k] * w.row(index_[k]);
    }
    return out;
  }

  // dw += x_i^T g
  void add_outer(NodeId i, const nn::RowVector& g, nn::Matrix& dw) const {
    for (std::size_t k = offsets_[i]; k < offsets_[i + 1]; ++k) {
      dw.row(index_[k]).noalias() += values_[k] * g;
    }
  }

 private:
  std::size_t cols_ = 0;
  std::vector<std::size_t> offsets_{0};
  std::vector<std::uint32_t> index_;
  std::vector<double> values_;
};

// All trainable state. The dense view's GCN and MLP both read
// `encoder_dense`; the spar view's both read `encoder_spar`. The bilinear
// discriminator is shared by the two views.
struct ModelParams {
  nn::Parameter encoder_dense;     // f x d
  nn::Parameter encoder_spar;      // f x d
  nn::Parameter discriminator;     // d x d
  nn::Parameter attention_weight;  // P x P
  nn::Parameter attention_bias;    // 1 x P
  nn::Parameter slope_dense;       // 1 x 1, PReLU of the dense encoder
  nn::Parameter slope_spar;        // 1 x 1, PReLU of the spar encoder

  static constexpr double kInitialSlope = 0.25;

  static ModelParams initialize(Eigen::Index attributes, Eigen::Index embedding_dim,
                                Eigen::Index subgraph_size, Rng& rng) {
    ModelParams p;
    p.encoder_dense = {"encoder_dense", nn::xavier_init(attributes, embedding_dim, rng)};
    p.encoder_spar = {"encoder_spar", nn::xavier_init(attributes, embedding_dim, rng)};
    p.discriminator = {"discriminator", nn::xavier_init(embedding_dim, embedding_dim, rng)};
    p.attention_weight = {"attention_weight",
                          nn::xavier_init(subgraph_size, subgraph_size, rng)};
    p.attention_bias = {"attention_bias", nn::Matrix::Zero(1, subgraph_size)};
    p.slope_dense = {"slope_dense", nn::Matrix::Constant(1, 1, kInitialSlope)};
    p.slope_spar = {"slope_spar", nn::Matrix::Constant(1, 1, kInitialSlope)};
    return p;
  }

  std::array<nn::Parameter*, 7> all() {
    return {&encoder_dense, &encoder_spar,   &discriminator, &attention_weight,
            &attention_bias, &slope_dense, &slope_spar};
  }
  std::array<const nn::Parameter*, 7> all() const {
    return {&encoder_dense, &encoder_spar,   &discriminator, &attention_weight,
            &attention_bias, &slope_dense, &slope_spar};
  }

  Eigen::Index attribute_dim() const { return encoder_dense.value.rows(); }
  Eigen::Index embedding_dim() const { return encoder_dense.value.cols(); }
  Eigen::Index subgraph_size() const { return attention_weight.value.rows(); }

  void zero_grad() {
    for (nn::Parameter* p : all()) p->zero_grad();
  }
};

struct ModelOptions {
  // Weight of the spar view in the loss and in the contrastive score.
  double gamma = 0.9;
  // Score the spar view against the dense target embedding h_i instead of the
  // spar encoder's own target embedding.
  bool spar_target_from_dense = false;

  void validate() const {
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  }
};

struct SubgraphEncoding {
  nn::Matrix projected;  // rows x_k W, zero for anonymized rows
  nn::Matrix pre;        // adj_norm * projected
  nn::Matrix h;          // PReLU(pre)
};

inline SubgraphEncoding encode_subgraph(const SubgraphPair& pair, const SparseRows& rows,
                                        const nn::Matrix& weight, double slope) {
  const auto p = static_cast<Eigen::Index>(pair.size());
  if (pair.adj_norm.rows() != p || pair.adj_norm.cols() != p) {
    throw InternalError("subgraph adjacency does not match its node count");
  }
  if (static_cast<Eigen::Index>(rows.num_cols()) != weight.rows()) {
    throw InternalError("encoder weight rows differ from attribute dimension");
  }
  SubgraphEncoding enc;
  enc.projected = nn::Matrix::Zero(p, weight.cols());
  for (Eigen::Index k = 0; k < p; ++k) {
    if (!pair.anonymized(static_cast<std::size_t>(k))) {
      enc.projected.row(k) = rows.times(pair.node_ids[k], weight);
    }
  }
  enc.pre.noalias() = pair.adj_norm * enc.projected;
  enc.h = nn::prelu(enc.pre, slope);
  return enc;
}

// H = PReLU(adj_norm X W): one GCN layer over the anonymized subgraph.
inline nn::Matrix embed_subgraph(const SubgraphPair& pair, const SparseRows& rows,
                                 const nn::Matrix& weight, double slope) {
  return encode_subgraph(pair, rows, weight, slope).h;
}

struct TargetEncoding {
  nn::RowVector pre;
  nn::RowVector h;
};

inline TargetEncoding encode_target(NodeId target, const SparseRows& rows,
                                    const nn::Matrix& weight, double slope) {
  TargetEncoding enc;
  enc.pre = rows.times(target, weight);
  enc.h = nn::prelu(enc.pre, slope);
  return enc;
}

// h = PReLU(x_i W), the MLP that shares the GCN weight.
inline nn::RowVector embed_target(NodeId target, const SparseRows& rows,
                                  const nn::Matrix& weight, double slope) {
  return encode_target(target, rows, weight, slope).h;
}

inline nn::RowVector readout_avg(const nn::Matrix& h) { return h.colwise().mean(); }

struct AttentionReadout {
  nn::RowVector gate;  // sigmoid(s W_s + b), not normalized
  nn::RowVector embedding;
};

inline AttentionReadout readout_attn(const nn::Matrix& h, const nn::RowVector& sim,
                                     const nn::Matrix& attention_weight,
                                     const nn::Matrix& attention_bias) {
  if (sim.size() != h.rows() || attention_weight.rows() != sim.size()) {
    throw InternalError("attention readout: subgraph size mismatch");
  }
  AttentionReadout out;
  out.gate = (sim * attention_weight + attention_bias).unaryExpr(&nn::sigmoid);
  out.embedding.noalias() = out.gate * h;
  return out;
}

inline double discriminator_logit(const nn::RowVector& h, const nn::RowVector& e,
                                  const nn::Matrix& discriminator) {
  return (h * discriminator).dot(e);
}

// sigma(h W_d e^T)
inline double discriminate(const nn::RowVector& h, const nn::RowVector& e,
                           const nn::Matrix& discriminator) {
  return nn::sigmoid(discriminator_logit(h, e, discriminator));
}

// Discriminator outputs for one target: positive/negative, per view.
struct TargetScores {
  double pos_dense = 0.5;
  double neg_dense = 0.5;
  double pos_spar = 0.5;
  double neg_spar = 0.5;

  // (1-gamma)(s~d - sd) + gamma (s~s - ss); in [-1, 1].
  double contrast_score(double gamma) const {
    return (1.0 - gamma) * (neg_dense - pos_dense) + gamma * (neg_spar - pos_spar);
  }
};

// (1-gamma) mean L_dense + gamma mean L_spar.
inline double batch_loss(std::span<const TargetScores> scores, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in [0, 1]");
  if (scores.empty()) return 0.0;
  double dense = 0.0;
  double spar = 0.0;
  for (const auto& s : scores) {
    dense += nn::bce(s.pos_dense, s.neg_dense);
    spar += nn::bce(s.pos_spar, s.neg_spar);
  }
  const auto b = static_cast<double>(scores.size());
  return (1.0 - gamma) * dense / b + gamma * spar / b;
}

// Gradient accumulator with the same layout as ModelParams.
struct Gradients {
  nn::Matrix encoder_dense;
  nn::Matrix encoder_spar;
  nn::Matrix discriminator;
  nn::Matrix attention_weight;
  nn::Matrix attention_bias;
  double slope_dense = 0.0;
  double slope_spar = 0.0;

  static Gradients zeros_like(const ModelParams& p) {
    Gradients g;
    g.encoder_dense = nn::Matrix::Zero(p.encoder_dense.value.rows(), p.encoder_dense.value.cols());
    g.encoder_spar = nn::Matrix::Zero(p.encoder_spar.value.rows(), p.encoder_spar.value.cols());
    g.discriminator = nn::Matrix::Zero(p.discriminator.value.rows(), p.discriminator.value.cols());
    g.attention_weight =
        nn::Matrix::Zero(p.attention_weight.value.rows(), p.attention_weight.value.cols());
    g.attention_bias =
        nn::Matrix::Zero(p.attention_bias.value.rows(), p.attention_bias.value.cols());
    return g;
  }

  void add_to(ModelParams& p) const {
    p.encoder_dense.grad += encoder_dense;
    p.encoder_spar.grad += encoder_spar;
    p.discriminator.grad += discriminator;
    p.attention_weight.grad += attention_weight;
    p.attention_bias.grad += attention_bias;
    p.slope_dense.grad(0, 0) += slope_dense;
    p.slope_spar.grad(0, 0) += slope_spar;
  }
};

namespace detail {

// Backpropagates dL/dH through H = PReLU(adj_norm X W).
inline void backprop_subgraph(const SubgraphPair& pair, const SubgraphEncoding& enc,
                              const nn::Matrix& grad_h, const SparseRows& rows, double slope,
                              nn::Matrix& grad_weight, double& grad_slope) {
  const nn::Matrix grad_pre = nn::prelu_backward(enc.pre, grad_h, slope, grad_slope);
  const nn::Matrix grad_projected = pair.adj_norm.transpose() * grad_pre;
  for (Eigen::Index k = 0; k < grad_projected.rows(); ++k) {
    if (!pair.anonymized(static_cast<std::size_t>(k))) {
      rows.add_outer(pair.node_ids[k], grad_projected.row(k), grad_weight);
    }
  }
}

}  // namespace detail

// Forward pass for one target's four pairs; when `grads` is non-null, adds
// `weight` times the gradient of the target's loss
// (1-gamma) L_dense + gamma L_spar. Returns that (unweighted) loss.
inline double forward_target(const ModelParams& params, const SparseRows& rows,
                             const TargetPairs& pairs, const ModelOptions& opts,
                             TargetScores* scores, double weight = 0.0,
                             Gradients* grads = nullptr) {
  const NodeId target = pairs.pos_dense.target;
  const nn::Matrix& w_dense = params.encoder_dense.value;
  const nn::Matrix& w_spar = params.encoder_spar.value;
  const nn::Matrix& w_disc = params.discriminator.value;
  const double a_dense = params.slope_dense.scalar();
  const double a_spar = params.slope_spar.scalar();

  // Dense view: average readout.
  const TargetEncoding h_dense = encode_target(target, rows, w_dense, a_dense);
  const SubgraphEncoding pos_d = encode_subgraph(pairs.pos_dense, rows, w_dense, a_dense);
  const SubgraphEncoding neg_d = encode_subgraph(pairs.neg_dense, rows, w_dense, a_dense);
  const nn::RowVector e_pos_d = readout_avg(pos_d.h);
  const nn::RowVector e_neg_d = readout_avg(neg_d.h);
  const nn::ContrastLoss loss_d =
      nn::contrast_loss(discriminator_logit(h_dense.h, e_pos_d, w_disc),
                        discriminator_logit(h_dense.h, e_neg_d, w_disc));

  // Spar view: similarity-gated readout.
  const TargetEncoding h_spar = opts.spar_target_from_dense
                                    ? h_dense
                                    : encode_target(target, rows, w_spar, a_spar);
  const SubgraphEncoding pos_s = encode_subgraph(pairs.pos_spar, rows, w_spar, a_spar);
  const SubgraphEncoding neg_s = encode_subgraph(pairs.neg_spar, rows, w_spar, a_spar);
  const AttentionReadout e_pos_s = readout_attn(pos_s.h, pairs.pos_spar.sim_vector,
                                                params.attention_weight.value,
                                                params.attention_bias.value);
  const AttentionReadout e_neg_s = readout_attn(neg_s.h, pairs.neg_spar.sim_vector,
                                                params.attention_weight.value,
                                                params.attention_bias.value);
  const nn::ContrastLoss loss_s =
      nn::contrast_loss(discriminator_logit(h_spar.h, e_pos_s.embedding, w_disc),
                        discriminator_logit(h_spar.h, e_neg_s.embedding, w_disc));

  if (scores != nullptr) {
    *scores = {loss_d.pos_score, loss_d.neg_score, loss_s.pos_score, loss_s.neg_score};
  }
  const double total = (1.0 - opts.gamma) * loss_d.value + opts.gamma * loss_s.value;
  if (grads == nullptr) return total;

  const double c_dense = weight * (1.0 - opts.gamma);
  const double c_spar = weight * opts.gamma;
  Gradients& g = *grads;
  const auto p_dense = static_cast<double>(pos_d.h.rows());

  nn::RowVector grad_h_dense = nn::RowVector::Zero(h_dense.h.size());
  nn::RowVector grad_h_spar = nn::RowVector::Zero(h_spar.h.size());

  // Discriminator terms: logit = h W_d e^T.
  const auto discriminator_backward = [&](double grad_logit, const nn::RowVector& h,
                                          const nn::RowVector& e, nn::RowVector& grad_h) {
    g.discriminator.noalias() += grad_logit * h.transpose() * e;
    grad_h.noalias() += grad_logit * e * w_disc.transpose();
    return nn::RowVector(grad_logit * (h * w_disc));
  };

  // Dense view.
  for (const auto& [grad_logit, enc, e, pair] :
       {std::tuple{c_dense * loss_d.dlogit_pos, &pos_d, &e_pos_d, &pairs.pos_dense},
        std::tuple{c_dense * loss_d.dlogit_neg, &neg_d, &e_neg_d, &pairs.neg_dense}}) {
    if (grad_logit == 0.0) continue;
    const nn::RowVector grad_e = discriminator_backward(grad_logit, h_dense.h, *e, grad_h_dense);
    const nn::Matrix grad_h = nn::Matrix::Ones(enc->h.rows(), 1) * (grad_e / p_dense);
    detail::backprop_subgraph(*pair, *enc, grad_h, rows, a_dense, g.encoder_dense,
                              g.slope_dense);
  }

  // Spar view.
  for (const auto& [grad_logit, enc, readout, pair] :
       {std::tuple{c_spar * loss_s.dlogit_pos, &pos_s, &e_pos_s, &pairs.pos_spar},
        std::tuple{c_spar * loss_s.dlogit_neg, &neg_s, &e_neg_s, &pairs.neg_spar}}) {
    if (grad_logit == 0.0) continue;
    const nn::RowVector grad_e =
        discriminator_backward(grad_logit, h_spar.h, readout->embedding, grad_h_spar);
    // e = gate H
    const nn::Matrix grad_h = readout->gate.transpose() * grad_e;
    const nn::RowVector grad_gate = (enc->h * grad_e.transpose()).transpose();
    const nn::RowVector grad_u =
        grad_gate.array() * readout->gate.array() * (1.0 - readout->gate.array());
    g.attention_weight.noalias() += pair->sim_vector.transpose() * grad_u;
    g.attention_bias += grad_u;
    detail::backprop_subgraph(*pair, *enc, grad_h, rows, a_spar, g.encoder_spar,
                              g.slope_spar);
  }

  // Target MLPs.
  if (opts.spar_target_from_dense) {
    grad_h_dense += grad_h_spar;
  } else {
    const nn::RowVector grad_pre =
        nn::prelu_backward(h_spar.pre, grad_h_spar, a_spar, g.slope_spar);
    rows.add_outer(target, grad_pre, g.encoder_spar);
  }
  const nn::RowVector grad_pre =
      nn::prelu_backward(h_dense.pre, grad_h_dense, a_dense, g.slope_dense);
  rows.add_outer(target, grad_pre, g.encoder_dense);
  return total;
}

// Targets per gradient buffer. Fixed so the reduction order, and therefore the
// result, does not depend on the thread count.
inline constexpr std::size_t kTargetsPerChunk = 32;

struct BatchResult {
  double loss = 0.0;
  std::vector<TargetScores> scores;
};

// Mean batch loss; when `accumulate` is set, adds its gradient into every
// parameter's `grad`.
inline BatchResult batch_forward(ModelParams& params, const SparseRows& rows,
                                 std::span<const TargetPairs> batch, const ModelOptions& opts,
                                 bool accumulate, std::size_t threads) {
  opts.validate();
  BatchResult result;
  result.scores.resize(batch.size());
  if (batch.empty()) return result;
  const std::size_t chunks = (batch.size() + kTargetsPerChunk - 1) / kTargetsPerChunk;
  const double weight = 1.0 / static_cast<double>(batch.size());
  std::vector<double> chunk_loss(chunks, 0.0);
  std::vector<Gradients> chunk_grads(accumulate ? chunks : 0);

  parallel_for(chunks, threads, [&](std::size_t c) {
    Gradients* grads = nullptr;
    if (accumulate) {
      chunk_grads[c] = Gradients::zeros_like(params);
      grads = &chunk_grads[c];
    }
    const std::size_t end = std::min(batch.size(), (c + 1) * kTargetsPerChunk);
    for (std::size_t i = c * kTargetsPerChunk; i < end; ++i) {
      chunk_loss[c] += forward_target(params, rows, batch[i], opts, &result.scores[i], weight,
                                      grads);
    }
  });
  for (std::size_t c = 0; c < chunks; ++c) {
    result.loss += chunk_loss[c];
    if (accumulate) chunk_grads[c].add_to(params);
  }
  result.loss *= weight;
  return result;
}

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json checkpoint_to_json(const ModelParams& params, const ModelOptions& opts) {
  nlohmann::json j;
  j["format"] = "scala-checkpoint";
  j["version"] = kCheckpointVersion;
  j["options"] = {{"gamma", opts.gamma},
                  {"spar_target_from_dense", opts.spar_target_from_dense}};
  j["parameters"] = nlohmann::json::array();
  for (const nn::Parameter* p : params.all()) j["parameters"].push_back(nn::to_json(*p));
  return j;
}

struct Checkpoint {
  ModelParams params;
  ModelOptions options;
};

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "scala-checkpoint") throw ParseError("not a scala checkpoint");
  if (j.value("version", 0) != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version");
  }
  Checkpoint ckpt;
  ckpt.options.gamma = j.at("options").at("gamma").get<double>();
  ckpt.options.spar_target_from_dense =
      j.at("options").at("spar_target_from_dense").get<bool>();
  const auto& list = j.at("parameters");
  auto slots = ckpt.params.all();
  if (list.size() != slots.size()) throw ParseError("checkpoint has wrong parameter count");
  for (std::size_t k = 0; k < slots.size(); ++k) {
    nn::Parameter p = nn::parameter_from_json(list[k]);
    if (p.name != std::array{"encoder_dense", "encoder_spar", "discriminator",
                             "attention_weight", "attention_bias", "slope_dense",
                             "slope_spar"}[k]) {
      throw ParseError("unexpected checkpoint parameter " + p.name);
    }
    *slots[k] = std::move(p);
  }
  return ckpt;
}

inline void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                            const ModelOptions& opts) {
  auto out = io::open_output(path);
  out << checkpoint_to_json(params, opts).dump(1) << '\n';
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  auto in = io::open_input(path);
  try {
    return checkpoint_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace scala
