/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Stacked LSTM with a three-layer fully connected head, trained by
 *  backpropagation through time on an MSE loss with global-norm gradient
 *  clipping and Adam.
 *
 *  Every tensor is stored column-major with one sample per column, so a
 *  mini-batch of B sequences is pushed through the recurrence as
 *  (features × B) matrices. Gate weights act on the concatenation [h; x],
 *  hence each W has shape hidden × (hidden + input).
 */

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"
#include "edupredict/metrics.hpp"
#include "edupredict/records.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace edupredict::lstm {

using Eigen::MatrixXd;

enum class Activation { ReLU, Sigmoid, Tanh, Identity };

inline const char* to_string(Activation a) {
    switch (a) {
        case Activation::ReLU: return "relu";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Identity: return "identity";
    }
    return "relu";
}

inline Activation activation_from_string(std::string_view s) {
    if (s == "relu") return Activation::ReLU;
    if (s == "sigmoid") return Activation::Sigmoid;
    if (s == "tanh") return Activation::Tanh;
    if (s == "identity") return Activation::Identity;
    throw Error(ErrorCode::InvalidConfig, "unknown activation '" + std::string(s) + "'");
}

struct NetworkConfig {
    std::size_t input_dim = 1;
    std::size_t lstm_layers = 2;
    std::size_t hidden = 50;
    std::size_t fc_hidden = 128;
    double dropout_p = 0.7;
    double clip_threshold = 1.01;
    std::size_t seq_len = records::kSequenceLength;
    Activation fc2_activation = Activation::ReLU;
    /// Initial bias of the ReLU output unit; keeps it active at start.
    double output_bias_init = 0.5;

    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t epochs = 30;
    std::size_t batch_size = 32;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (input_dim < 1 || lstm_layers < 1 || hidden < 1 || fc_hidden < 1 || seq_len < 1 || batch_size < 1) {
            throw Error(ErrorCode::InvalidConfig, "network: dimensions must be >= 1");
        }
        if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw Error(ErrorCode::InvalidConfig, "network: dropout_p in [0,1)");
        if (!(clip_threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "network: clip_threshold > 0");
    }
};

struct LstmLayerParams {
    MatrixXd W_f, W_i, W_C, W_o;  // hidden × (hidden + input)
    MatrixXd b_f, b_i, b_C, b_o;  // hidden × 1

    Eigen::Index hidden() const { return W_f.rows(); }
    Eigen::Index input_dim() const { return W_f.cols() - W_f.rows(); }
};

struct FcParams {
    MatrixXd W1, b1;  // fc_hidden × hidden, sigmoid
    MatrixXd W2, b2;  // fc_hidden × fc_hidden, configurable
    MatrixXd W3, b3;  // 1 × fc_hidden, ReLU
};

/// All trainable tensors. Gradients and Adam moments share this layout.
struct NetworkParams {
    std::vector<LstmLayerParams> lstm;
    FcParams fc;

    template <typename Self, typename F>
    static void for_each(Self& self, F&& f) {
        for (std::size_t l = 0; l < self.lstm.size(); ++l) {
            auto& p = self.lstm[l];
            const std::string pre = "lstm" + std::to_string(l) + ".";
            f(pre + "W_f", p.W_f);
            f(pre + "W_i", p.W_i);
            f(pre + "W_C", p.W_C);
            f(pre + "W_o", p.W_o);
            f(pre + "b_f", p.b_f);
            f(pre + "b_i", p.b_i);
            f(pre + "b_C", p.b_C);
            f(pre + "b_o", p.b_o);
        }
        f(std::string("fc.W1"), self.fc.W1);
        f(std::string("fc.b1"), self.fc.b1);
        f(std::string("fc.W2"), self.fc.W2);
        f(std::string("fc.b2"), self.fc.b2);
        f(std::string("fc.W3"), self.fc.W3);
        f(std::string("fc.b3"), self.fc.b3);
    }

    std::vector<std::pair<std::string, MatrixXd*>> tensors() {
        std::vector<std::pair<std::string, MatrixXd*>> out;
        for_each(*this, [&](const std::string& n, MatrixXd& m) { out.emplace_back(n, &m); });
        return out;
    }

    std::vector<std::pair<std::string, const MatrixXd*>> tensors() const {
        std::vector<std::pair<std::string, const MatrixXd*>> out;
        for_each(*this, [&](const std::string& n, const MatrixXd& m) { out.emplace_back(n, &m); });
        return out;
    }

    NetworkParams zeros_like() const {
        NetworkParams z = *this;
        for_each(z, [](const std::string&, MatrixXd& m) { m.setZero(); });
        return z;
    }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for_each(*this, [&](const std::string&, const MatrixXd& m) { n += static_cast<std::size_t>(m.size()); });
        return n;
    }
};

using Gradients = NetworkParams;

struct LstmNetwork {
    NetworkConfig config;
    NetworkParams params;
    /// Bumped on every parameter update; caches remember the value they saw.
    std::uint64_t version = 0;
};

/// Network with every parameter zero (deterministic reference point).
inline LstmNetwork zero_network(const NetworkConfig& cfg) {
    cfg.validate();
    LstmNetwork net{cfg, {}, 0};
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const auto in = static_cast<Eigen::Index>(l == 0 ? cfg.input_dim : cfg.hidden);
        LstmLayerParams p;
        for (MatrixXd* w : {&p.W_f, &p.W_i, &p.W_C, &p.W_o}) *w = MatrixXd::Zero(H, H + in);
        for (MatrixXd* b : {&p.b_f, &p.b_i, &p.b_C, &p.b_o}) *b = MatrixXd::Zero(H, 1);
        net.params.lstm.push_back(std::move(p));
    }
    const auto F = static_cast<Eigen::Index>(cfg.fc_hidden);
    net.params.fc.W1 = MatrixXd::Zero(F, H);
    net.params.fc.b1 = MatrixXd::Zero(F, 1);
    net.params.fc.W2 = MatrixXd::Zero(F, F);
    net.params.fc.b2 = MatrixXd::Zero(F, 1);
    net.params.fc.W3 = MatrixXd::Zero(1, F);
    net.params.fc.b3 = MatrixXd::Zero(1, 1);
    return net;
}

/// Uniform(−1/√fan_in, 1/√fan_in) for every tensor, fan_in being the width
/// of the input the tensor's layer consumes.
inline LstmNetwork make_network(const NetworkConfig& cfg) {
    LstmNetwork net = zero_network(cfg);
    Rng rng(derive_seed(cfg.rng_seed, "init"));
    auto fill = [&](MatrixXd& m, Eigen::Index fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = rng.uniform(-bound, bound);
        }
    };
    for (auto& p : net.params.lstm) {
        const Eigen::Index fan_in = p.W_f.cols();
        for (MatrixXd* m : {&p.W_f, &p.W_i, &p.W_C, &p.W_o, &p.b_f, &p.b_i, &p.b_C, &p.b_o}) fill(*m, fan_in);
    }
    auto& fc = net.params.fc;
    fill(fc.W1, fc.W1.cols());
    fill(fc.b1, fc.W1.cols());
    fill(fc.W2, fc.W2.cols());
    fill(fc.b2, fc.W2.cols());
    fill(fc.W3, fc.W3.cols());
    fc.b3.setConstant(cfg.output_bias_init);
    return net;
}

// ---------------------------------------------------------------------------
// Elementwise helpers
// ---------------------------------------------------------------------------

inline MatrixXd sigmoid(const MatrixXd& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

inline MatrixXd apply(Activation a, const MatrixXd& x) {
    switch (a) {
        case Activation::ReLU: return x.cwiseMax(0.0);
        case Activation::Sigmoid: return sigmoid(x);
        case Activation::Tanh: return x.array().tanh().matrix();
        case Activation::Identity: return x;
    }
    return x;
}

/// Derivative expressed through pre-activation x and output y.
inline MatrixXd derivative(Activation a, const MatrixXd& x, const MatrixXd& y) {
    switch (a) {
        case Activation::ReLU: return (x.array() > 0.0).cast<double>().matrix();
        case Activation::Sigmoid: return (y.array() * (1.0 - y.array())).matrix();
        case Activation::Tanh: return (1.0 - y.array().square()).matrix();
        case Activation::Identity: return MatrixXd::Ones(x.rows(), x.cols());
    }
    return MatrixXd::Ones(x.rows(), x.cols());
}

// ---------------------------------------------------------------------------
// Cell
// ---------------------------------------------------------------------------

struct CellCache {
    MatrixXd z;  // [h_prev; x]
    MatrixXd f, i, g, o;
    MatrixXd c_prev, c, tanh_c;
};

struct CellOutput {
    MatrixXd h;
    MatrixXd c;
    CellCache cache;
};

/// One LSTM step for a batch (columns are samples):
///   f = σ(W_f[h,x] + b_f), i = σ(W_i[h,x] + b_i), c̃ = tanh(W_C[h,x] + b_C),
///   c = f∘c_prev + i∘c̃, o = σ(W_o[h,x] + b_o), h = o∘tanh(c).
inline CellOutput cell_forward(const LstmLayerParams& p, const MatrixXd& x, const MatrixXd& h_prev, const MatrixXd& c_prev) {
    const Eigen::Index H = p.hidden();
    if (x.rows() != p.input_dim() || h_prev.rows() != H || c_prev.rows() != H || x.cols() != h_prev.cols() ||
        x.cols() != c_prev.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "cell_forward: input " + std::to_string(x.rows()) + "x" +
                                                      std::to_string(x.cols()) + " for hidden " + std::to_string(H) +
                                                      ", input_dim " + std::to_string(p.input_dim()));
    }
    CellOutput out;
    CellCache& k = out.cache;
    k.z.resize(H + x.rows(), x.cols());
    k.z.topRows(H) = h_prev;
    k.z.bottomRows(x.rows()) = x;
    k.f = sigmoid((p.W_f * k.z).colwise() + p.b_f.col(0));
    k.i = sigmoid((p.W_i * k.z).colwise() + p.b_i.col(0));
    k.g = ((p.W_C * k.z).colwise() + p.b_C.col(0)).array().tanh().matrix();
    k.o = sigmoid((p.W_o * k.z).colwise() + p.b_o.col(0));
    k.c_prev = c_prev;
    k.c = (k.f.array() * c_prev.array() + k.i.array() * k.g.array()).matrix();
    k.tanh_c = k.c.array().tanh().matrix();
    out.c = k.c;
    out.h = (k.o.array() * k.tanh_c.array()).matrix();
    return out;
}

// ---------------------------------------------------------------------------
// Network forward / backward
// ---------------------------------------------------------------------------

enum class Mode { Train, Eval };

/// Inverted-dropout masks: masks[l][t] multiplies the output of layer l at
/// step t before it enters layer l + 1 (entries 0 or 1/keep).
using DropoutMasks = std::vector<std::vector<MatrixXd>>;

struct ForwardCache {
    std::uint64_t version = 0;
    Mode mode = Mode::Eval;
    std::vector<std::vector<CellCache>> cells;  // [layer][t]
    DropoutMasks masks;
    MatrixXd h_last;
    MatrixXd a1, s1, a2, s2, a3;
};

struct ForwardResult {
    Eigen::RowVectorXd predictions;
    ForwardCache cache;
};

/// Stacks step t of every sequence into an (input_dim × B) matrix per step.
inline std::vector<MatrixXd> batch_inputs(std::span<const records::StudentSequence* const> batch, const NetworkConfig& cfg) {
    const auto B = static_cast<Eigen::Index>(batch.size());
    std::vector<MatrixXd> xs(cfg.seq_len, MatrixXd::Zero(static_cast<Eigen::Index>(cfg.input_dim), B));
    for (Eigen::Index b = 0; b < B; ++b) {
        const auto& seq = *batch[static_cast<std::size_t>(b)];
        if (seq.steps.size() != cfg.seq_len) {
            throw Error(ErrorCode::ShapeError, "sequence " + seq.student_id + " has " + std::to_string(seq.steps.size()) +
                                                   " steps, network expects " + std::to_string(cfg.seq_len));
        }
        for (std::size_t t = 0; t < cfg.seq_len; ++t) {
            if (seq.steps[t].size() != cfg.input_dim) {
                throw Error(ErrorCode::ShapeError, "sequence " + seq.student_id + " step " + std::to_string(t) + " has " +
                                                       std::to_string(seq.steps[t].size()) + " features, network expects " +
                                                       std::to_string(cfg.input_dim));
            }
            for (std::size_t d = 0; d < cfg.input_dim; ++d) xs[t](static_cast<Eigen::Index>(d), b) = seq.steps[t][d];
        }
    }
    return xs;
}

/// Draws inverted-dropout masks for layers 0..L−2.
inline DropoutMasks draw_masks(const NetworkConfig& cfg, std::size_t steps, Eigen::Index batch, Rng& rng) {
    DropoutMasks masks(cfg.lstm_layers > 0 ? cfg.lstm_layers - 1 : 0);
    const double keep = 1.0 - cfg.dropout_p;
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    for (auto& layer : masks) {
        layer.resize(steps);
        for (auto& m : layer) {
            m.resize(H, batch);
            for (Eigen::Index j = 0; j < batch; ++j) {
                for (Eigen::Index i = 0; i < H; ++i) m(i, j) = rng.bernoulli(keep) ? 1.0 / keep : 0.0;
            }
        }
    }
    return masks;
}

/// Runs the network on pre-stacked inputs. In Train mode with dropout_p > 0
/// `masks` must hold one mask per non-final layer and step.
inline ForwardResult forward_inputs(const LstmNetwork& net, const std::vector<MatrixXd>& xs, Mode mode,
                                    const DropoutMasks* masks) {
    const auto& cfg = net.config;
    if (xs.size() != cfg.seq_len || xs.empty()) {
        throw Error(ErrorCode::ShapeError, "forward: got " + std::to_string(xs.size()) + " steps, expected " +
                                               std::to_string(cfg.seq_len));
    }
    const Eigen::Index B = xs[0].cols();
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    const bool use_dropout = mode == Mode::Train && cfg.dropout_p > 0.0 && cfg.lstm_layers > 1;

    ForwardResult out;
    ForwardCache& cache = out.cache;
    cache.version = net.version;
    cache.mode = mode;
    cache.cells.resize(cfg.lstm_layers);
    if (use_dropout) {
        if (masks == nullptr || masks->size() != cfg.lstm_layers - 1) {
            throw Error(ErrorCode::ShapeError, "forward: dropout masks missing");
        }
        cache.masks = *masks;
    }

    std::vector<MatrixXd> layer_in = xs;
    for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
        const auto& p = net.params.lstm[l];
        MatrixXd h = MatrixXd::Zero(H, B);
        MatrixXd c = MatrixXd::Zero(H, B);
        std::vector<MatrixXd> layer_out(cfg.seq_len);
        cache.cells[l].reserve(cfg.seq_len);
        for (std::size_t t = 0; t < cfg.seq_len; ++t) {
            CellOutput step = cell_forward(p, layer_in[t], h, c);
            h = std::move(step.h);
            c = std::move(step.c);
            cache.cells[l].push_back(std::move(step.cache));
            if (use_dropout && l + 1 < cfg.lstm_layers) {
                layer_out[t] = (h.array() * cache.masks[l][t].array()).matrix();
            } else {
                layer_out[t] = h;
            }
        }
        if (l + 1 == cfg.lstm_layers) cache.h_last = h;
        layer_in = std::move(layer_out);
    }

    const auto& fc = net.params.fc;
    cache.a1 = (fc.W1 * cache.h_last).colwise() + fc.b1.col(0);
    cache.s1 = sigmoid(cache.a1);
    cache.a2 = (fc.W2 * cache.s1).colwise() + fc.b2.col(0);
    cache.s2 = apply(cfg.fc2_activation, cache.a2);
    cache.a3 = (fc.W3 * cache.s2).colwise() + fc.b3.col(0);
    out.predictions = cache.a3.cwiseMax(0.0).row(0);
    return out;
}

inline ForwardResult forward(const LstmNetwork& net, std::span<const records::StudentSequence* const> batch, Mode mode, Rng& rng) {
    const auto xs = batch_inputs(batch, net.config);
    if (mode == Mode::Train && net.config.dropout_p > 0.0 && net.config.lstm_layers > 1) {
        const auto masks = draw_masks(net.config, net.config.seq_len, static_cast<Eigen::Index>(batch.size()), rng);
        return forward_inputs(net, xs, mode, &masks);
    }
    return forward_inputs(net, xs, mode, nullptr);
}

/// Eval-mode scalar prediction for one sequence.
inline double predict(const LstmNetwork& net, const records::StudentSequence& seq) {
    const records::StudentSequence* one[] = {&seq};
    Rng unused(0);
    return forward(net, one, Mode::Eval, unused).predictions(0);
}

/// 1 when the eval-mode prediction is at least 0.5.
inline int predict_class(const LstmNetwork& net, const records::StudentSequence& seq) {
    return predict(net, seq) >= 0.5 ? 1 : 0;
}

/// (1/n) Σ (Y − Ŷ)²
inline double mse(const Eigen::Ref<const Eigen::VectorXd>& pred, const Eigen::Ref<const Eigen::VectorXd>& target) {
    if (pred.size() != target.size() || pred.size() == 0) {
        throw Error(ErrorCode::LengthMismatch, "mse: " + std::to_string(pred.size()) + " predictions vs " +
                                                   std::to_string(target.size()) + " targets");
    }
    return (pred - target).squaredNorm() / static_cast<double>(pred.size());
}

/// Exact gradients of the batch MSE with respect to every parameter.
inline Gradients backward(const LstmNetwork& net, const ForwardCache& cache, const Eigen::RowVectorXd& target) {
    if (cache.version != net.version || cache.cells.size() != net.config.lstm_layers || cache.a3.size() == 0) {
        throw Error(ErrorCode::StaleCache, "backward: cache does not belong to the current parameters");
    }
    const auto& cfg = net.config;
    const Eigen::Index B = cache.a3.cols();
    if (target.size() != B) throw Error(ErrorCode::LengthMismatch, "backward: target size differs from batch");
    const auto H = static_cast<Eigen::Index>(cfg.hidden);
    const auto& fc = net.params.fc;
    Gradients grad = net.params.zeros_like();

    // Head.
    const MatrixXd y = cache.a3.cwiseMax(0.0);
    MatrixXd da3 = (2.0 / static_cast<double>(B)) * (y - target);
    da3.array() *= (cache.a3.array() > 0.0).cast<double>();
    grad.fc.W3 = da3 * cache.s2.transpose();
    grad.fc.b3 = da3.rowwise().sum();
    MatrixXd da2 = (fc.W3.transpose() * da3).cwiseProduct(derivative(cfg.fc2_activation, cache.a2, cache.s2));
    grad.fc.W2 = da2 * cache.s1.transpose();
    grad.fc.b2 = da2.rowwise().sum();
    MatrixXd da1 = (fc.W2.transpose() * da2).cwiseProduct(derivative(Activation::Sigmoid, cache.a1, cache.s1));
    grad.fc.W1 = da1 * cache.h_last.transpose();
    grad.fc.b1 = da1.rowwise().sum();

    // Gradient arriving at each layer's hidden output per step, from above.
    std::vector<MatrixXd> dh_above(cfg.seq_len, MatrixXd::Zero(H, B));
    dh_above[cfg.seq_len - 1] = fc.W1.transpose() * da1;

    for (std::size_t l = cfg.lstm_layers; l-- > 0;) {
        const auto& p = net.params.lstm[l];
        auto& g = grad.lstm[l];
        const Eigen::Index in = p.input_dim();
        std::vector<MatrixXd> dx_below(l > 0 ? cfg.seq_len : 0);
        MatrixXd dh_next = MatrixXd::Zero(H, B);
        MatrixXd dc_next = MatrixXd::Zero(H, B);
        for (std::size_t t = cfg.seq_len; t-- > 0;) {
            const CellCache& k = cache.cells[l][t];
            const MatrixXd dh = dh_above[t] + dh_next;
            const MatrixXd d_o = dh.cwiseProduct(k.tanh_c);
            const MatrixXd dc = dc_next + dh.cwiseProduct(k.o).cwiseProduct((1.0 - k.tanh_c.array().square()).matrix());
            const MatrixXd dzf = (dc.array() * k.c_prev.array() * k.f.array() * (1.0 - k.f.array())).matrix();
            const MatrixXd dzi = (dc.array() * k.g.array() * k.i.array() * (1.0 - k.i.array())).matrix();
            const MatrixXd dzg = (dc.array() * k.i.array() * (1.0 - k.g.array().square())).matrix();
            const MatrixXd dzo = (d_o.array() * k.o.array() * (1.0 - k.o.array())).matrix();
            dc_next = dc.cwiseProduct(k.f);

            g.W_f.noalias() += dzf * k.z.transpose();
            g.W_i.noalias() += dzi * k.z.transpose();
            g.W_C.noalias() += dzg * k.z.transpose();
            g.W_o.noalias() += dzo * k.z.transpose();
            g.b_f += dzf.rowwise().sum();
            g.b_i += dzi.rowwise().sum();
            g.b_C += dzg.rowwise().sum();
            g.b_o += dzo.rowwise().sum();

            MatrixXd dz = p.W_f.transpose() * dzf;
            dz.noalias() += p.W_i.transpose() * dzi;
            dz.noalias() += p.W_C.transpose() * dzg;
            dz.noalias() += p.W_o.transpose() * dzo;
            dh_next = dz.topRows(H);
            if (l > 0) {
                MatrixXd dx = dz.bottomRows(in);
                if (!cache.masks.empty()) dx.array() *= cache.masks[l - 1][t].array();
                dx_below[t] = std::move(dx);
            }
        }
        if (l > 0) dh_above = std::move(dx_below);
    }
    return grad;
}

inline double global_norm(const Gradients& grads) {
    double ss = 0.0;
    for (const auto& [name, m] : grads.tensors()) ss += m->squaredNorm();
    return std::sqrt(ss);
}

/// Rescales all gradients by threshold / ‖g‖ when the global ℓ₂ norm
/// exceeds the threshold.
inline Gradients clip(Gradients grads, double threshold = 1.01) {
    const double norm = global_norm(grads);
    if (norm > threshold) {
        const double scale = threshold / norm;
        for (auto& [name, m] : grads.tensors()) *m *= scale;
    }
    return grads;
}

struct AdamState {
    NetworkParams m;
    NetworkParams v;
    std::size_t step = 0;

    static AdamState for_params(const NetworkParams& p) { return {p.zeros_like(), p.zeros_like(), 0}; }
};

struct AdamHyper {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Bias-corrected Adam update of `params` in place.
inline void adam_step(NetworkParams& params, const Gradients& grads, AdamState& state, const AdamHyper& h) {
    auto p = params.tensors();
    const auto g = grads.tensors();
    auto m = state.m.tensors();
    auto v = state.v.tensors();
    if (p.size() != g.size() || p.size() != m.size() || p.size() != v.size()) {
        throw Error(ErrorCode::ShapeError, "adam: parameter/gradient/state layouts differ");
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
        if (p[k].second->rows() != g[k].second->rows() || p[k].second->cols() != g[k].second->cols() ||
            m[k].second->size() != p[k].second->size() || v[k].second->size() != p[k].second->size()) {
            throw Error(ErrorCode::ShapeError, "adam: shape mismatch at " + p[k].first);
        }
    }
    ++state.step;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.step));
    for (std::size_t k = 0; k < p.size(); ++k) {
        auto& mk = *m[k].second;
        auto& vk = *v[k].second;
        const auto& gk = *g[k].second;
        mk = h.beta1 * mk + (1.0 - h.beta1) * gk;
        vk = h.beta2 * vk + (1.0 - h.beta2) * gk.cwiseProduct(gk);
        p[k].second->array() -= h.lr * (mk.array() / bc1) / ((vk.array() / bc2).sqrt() + h.epsilon);
    }
}

inline void adam_step(LstmNetwork& net, const Gradients& grads, AdamState& state) {
    const auto& c = net.config;
    adam_step(net.params, grads, state, AdamHyper{c.learning_rate, c.beta1, c.beta2, c.epsilon});
    ++net.version;
}

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
};

struct BatchStats {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double loss = 0.0;
};

struct TrainCurves {
    std::vector<EpochStats> epochs;
    std::vector<BatchStats> batches;
};

struct EvalStats {
    double loss = 0.0;
    double accuracy = 0.0;
    std::vector<double> predictions;
};

/// Eval-mode loss and thresholded accuracy, in batches.
inline EvalStats evaluate(const LstmNetwork& net, const std::vector<records::StudentSequence>& data) {
    EvalStats s;
    if (data.empty()) return s;
    Rng unused(0);
    std::size_t correct = 0;
    double sq = 0.0;
    const std::size_t bs = std::max<std::size_t>(net.config.batch_size, 64);
    std::vector<const records::StudentSequence*> ptrs;
    for (std::size_t start = 0; start < data.size(); start += bs) {
        ptrs.clear();
        for (std::size_t i = start; i < std::min(data.size(), start + bs); ++i) ptrs.push_back(&data[i]);
        const auto out = forward(net, ptrs, Mode::Eval, unused);
        for (std::size_t j = 0; j < ptrs.size(); ++j) {
            const double p = out.predictions(static_cast<Eigen::Index>(j));
            const double y = ptrs[j]->label;
            sq += (p - y) * (p - y);
            correct += (p >= 0.5 ? 1 : 0) == ptrs[j]->label;
            s.predictions.push_back(p);
        }
    }
    s.loss = sq / static_cast<double>(data.size());
    s.accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
    return s;
}

/// Mini-batch epochs of forward → MSE → backward → clip → Adam over a
/// per-epoch shuffle. Deterministic for a fixed config.rng_seed.
inline TrainCurves train(LstmNetwork& net, const std::vector<records::StudentSequence>& train_set,
                         const std::vector<records::StudentSequence>& val_set) {
    const auto& cfg = net.config;
    cfg.validate();
    TrainCurves curves;
    if (cfg.epochs == 0) return curves;
    if (train_set.empty()) throw Error(ErrorCode::TooFewSamples, "train: empty training set");

    Rng rng(derive_seed(cfg.rng_seed, "train"));
    AdamState adam = AdamState::for_params(net.params);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<const records::StudentSequence*> batch;

    for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double loss_sum = 0.0;
        std::size_t correct = 0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            batch.clear();
            for (std::size_t i = start; i < std::min(order.size(), start + cfg.batch_size); ++i) batch.push_back(&train_set[order[i]]);
            Eigen::RowVectorXd target(static_cast<Eigen::Index>(batch.size()));
            for (std::size_t j = 0; j < batch.size(); ++j) target(static_cast<Eigen::Index>(j)) = batch[j]->label;

            const auto out = forward(net, batch, Mode::Train, rng);
            const double loss = mse(out.predictions.transpose(), target.transpose());
            for (std::size_t j = 0; j < batch.size(); ++j) {
                correct += (out.predictions(static_cast<Eigen::Index>(j)) >= 0.5 ? 1 : 0) == batch[j]->label;
            }
            loss_sum += loss * static_cast<double>(batch.size());
            curves.batches.push_back({epoch, ++batch_index, loss});

            const Gradients grads = clip(backward(net, out.cache, target), cfg.clip_threshold);
            adam_step(net, grads, adam);
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(train_set.size());
        stats.train_accuracy = static_cast<double>(correct) / static_cast<double>(train_set.size());
        if (!val_set.empty()) {
            const auto v = evaluate(net, val_set);
            stats.val_loss = v.loss;
            stats.val_accuracy = v.accuracy;
        }
        curves.epochs.push_back(stats);
        info("epoch " + std::to_string(epoch) + ": loss " + std::to_string(stats.train_loss) + ", accuracy " +
             std::to_string(stats.train_accuracy) +
             (val_set.empty() ? std::string() : ", validation accuracy " + std::to_string(stats.val_accuracy)));
    }
    return curves;
}

inline metrics::Report evaluate_report(const LstmNetwork& net, const std::vector<records::StudentSequence>& data) {
    const auto stats = evaluate(net, data);
    std::vector<int> preds, labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
        preds.push_back(stats.predictions[i] >= 0.5 ? 1 : 0);
        labels.push_back(data[i].label);
    }
    return metrics::report(metrics::confusion(preds, labels));
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

inline nlohmann::json config_to_json(const NetworkConfig& c) {
    return {{"input_dim", c.input_dim},
            {"lstm_layers", c.lstm_layers},
            {"hidden", c.hidden},
            {"fc_hidden", c.fc_hidden},
            {"dropout_p", c.dropout_p},
            {"clip_threshold", c.clip_threshold},
            {"seq_len", c.seq_len},
            {"fc2_activation", to_string(c.fc2_activation)},
            {"output_bias_init", c.output_bias_init},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"epsilon", c.epsilon},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"rng_seed", c.rng_seed}};
}

inline NetworkConfig config_from_json(const nlohmann::json& j) {
    NetworkConfig c;
    c.input_dim = j.at("input_dim").get<std::size_t>();
    c.lstm_layers = j.at("lstm_layers").get<std::size_t>();
    c.hidden = j.at("hidden").get<std::size_t>();
    c.fc_hidden = j.at("fc_hidden").get<std::size_t>();
    c.dropout_p = j.at("dropout_p").get<double>();
    c.clip_threshold = j.at("clip_threshold").get<double>();
    c.seq_len = j.at("seq_len").get<std::size_t>();
    c.fc2_activation = activation_from_string(j.at("fc2_activation").get<std::string>());
    c.output_bias_init = j.value("output_bias_init", 0.5);
    c.learning_rate = j.at("learning_rate").get<double>();
    c.beta1 = j.at("beta1").get<double>();
    c.beta2 = j.at("beta2").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.epochs = j.at("epochs").get<std::size_t>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    return c;
}

/// JSON checkpoint: config plus every tensor as {name, rows, cols, data}
/// with data in column-major order.
inline nlohmann::json to_json(const LstmNetwork& net) {
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto& [name, m] : net.params.tensors()) {
        tensors.push_back({{"name", name},
                           {"rows", m->rows()},
                           {"cols", m->cols()},
                           {"data", std::vector<double>(m->data(), m->data() + m->size())}});
    }
    return {{"format", "edupredict-lstm"}, {"version", kCheckpointVersion}, {"config", config_to_json(net.config)},
            {"tensors", tensors}};
}

inline LstmNetwork network_from_json(const nlohmann::json& j) {
    if (j.value("format", "") != "edupredict-lstm" || j.value("version", 0) != kCheckpointVersion) {
        throw Error(ErrorCode::ShapeError, "checkpoint: unsupported format or version");
    }
    LstmNetwork net = zero_network(config_from_json(j.at("config")));
    auto tensors = net.params.tensors();
    const auto& stored = j.at("tensors");
    if (stored.size() != tensors.size()) throw Error(ErrorCode::ShapeError, "checkpoint: tensor count differs");
    for (std::size_t k = 0; k < tensors.size(); ++k) {
        const auto& t = stored[k];
        MatrixXd& m = *tensors[k].second;
        if (t.at("name").get<std::string>() != tensors[k].first || t.at("rows").get<Eigen::Index>() != m.rows() ||
            t.at("cols").get<Eigen::Index>() != m.cols()) {
            throw Error(ErrorCode::ShapeError, "checkpoint: tensor " + tensors[k].first + " has wrong name or shape");
        }
        const auto data = t.at("data").get<std::vector<double>>();
        if (static_cast<Eigen::Index>(data.size()) != m.size()) throw Error(ErrorCode::ShapeError, "checkpoint: data size");
        std::copy(data.begin(), data.end(), m.data());
    }
    return net;
}

}  // namespace edupredict::lstm
