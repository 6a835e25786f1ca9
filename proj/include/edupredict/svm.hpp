/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Linear soft-margin SVM trained by stochastic subgradient descent
 *  on λ‖w‖²/2 + mean hinge loss, plus stratified k-fold evaluation.
 */

#include "edupredict/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace edupredict::svm {

/// Decision surface wᵀx + b = 0.
struct Hyperplane {
    Vector w;
    double b = 0.0;
};

struct SvmConfig {
    double lambda = 1e-2;
    std::size_t epochs = 20;
    std::uint64_t rng_seed = 0;
    /// Step size at update t (1-based) is 1 / (λ (t + t0)) with
    /// t0 = 1 / (λ · initial_step), so the first step is close to initial_step.
    double initial_step = 1.0;
};

enum class FoldMetric { Accuracy, F1 };

inline double decision(const Hyperplane& h, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    return x.dot(h.w.transpose()) + h.b;
}

/// sign(wᵀx + b) with sign(0) = +1.
inline int predict(const Hyperplane& h, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    if (x.size() != h.w.size()) {
        throw Error(ErrorCode::DimensionMismatch, "svm: input has " + std::to_string(x.size()) + " features, w has " +
                                                      std::to_string(h.w.size()));
    }
    return decision(h, x) >= 0.0 ? 1 : -1;
}

inline double norm(const Hyperplane& h) { return std::sqrt(h.w.squaredNorm()); }

/// |wᵀx + b| / ‖w‖₂
inline double point_distance(const Hyperplane& h, const Eigen::Ref<const Eigen::RowVectorXd>& x) {
    const double n = norm(h);
    if (!(n > 0.0)) throw Error(ErrorCode::ZeroNorm, "svm: distance undefined for w = 0");
    if (x.size() != h.w.size()) throw Error(ErrorCode::DimensionMismatch, "svm: point dimension differs from w");
    return std::abs(decision(h, x)) / n;
}

/// 2 / ‖w‖₂
inline double margin(const Hyperplane& h) {
    const double n = norm(h);
    if (!(n > 0.0)) throw Error(ErrorCode::ZeroNorm, "svm: margin undefined for w = 0");
    return 2.0 / n;
}

/// λ‖w‖²/2 + (1/n) Σ max(0, 1 − yᵢ(wᵀxᵢ + b))
inline double objective(const Hyperplane& h, const RowMatrix& X, const std::vector<int>& y, double lambda) {
    double loss = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        loss += std::max(0.0, 1.0 - y[static_cast<std::size_t>(i)] * decision(h, X.row(i)));
    }
    return 0.5 * lambda * h.w.squaredNorm() + loss / static_cast<double>(X.rows());
}

/// Maps {0,1} labels to {−1,+1}.
inline std::vector<int> to_signed(const std::vector<int>& labels) {
    std::vector<int> out(labels.size());
    std::transform(labels.begin(), labels.end(), out.begin(), [](int v) { return v > 0 ? 1 : -1; });
    return out;
}

/// Pegasos-style epochs over a per-epoch shuffled order. The bias is not
/// regularized. Returns the final iterate.
inline Hyperplane train(const RowMatrix& X, const std::vector<int>& y, const SvmConfig& cfg = {}) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "svm: X rows and label count differ");
    }
    const bool pos = std::find(y.begin(), y.end(), 1) != y.end();
    const bool neg = std::find(y.begin(), y.end(), -1) != y.end();
    if (!pos || !neg) throw Error(ErrorCode::SingleClass, "svm: training data needs both classes");
    if (!(cfg.lambda > 0.0) || cfg.epochs < 1) throw Error(ErrorCode::InvalidConfig, "svm: lambda > 0 and epochs >= 1");

    Hyperplane h{Vector::Zero(X.cols()), 0.0};
    Rng rng(cfg.rng_seed);
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    // w is kept as scale · v so the shrink step is O(1).
    Vector v = Vector::Zero(X.cols());
    double scale = 1.0;
    double t = 0.0;
    const double t0 = cfg.initial_step > 0.0 ? 1.0 / (cfg.lambda * cfg.initial_step) : 0.0;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        for (std::size_t i : order) {
            t += 1.0;
            const double eta = 1.0 / (cfg.lambda * (t + t0));
            const auto xi = X.row(static_cast<Eigen::Index>(i));
            const double yi = y[i];
            const double score = scale * xi.dot(v.transpose()) + h.b;
            const double shrink = 1.0 - eta * cfg.lambda;
            if (shrink <= 0.0) {
                v.setZero();
                scale = 1.0;
            } else {
                scale *= shrink;
            }
            if (yi * score < 1.0) {
                v += (eta * yi / scale) * xi.transpose();
                h.b += eta * yi;
            }
            if (scale < 1e-9) {
                v *= scale;
                scale = 1.0;
            }
        }
    }
    h.w = scale * v;
    return h;
}

/// Test-fold index sets: each class shuffled under `seed` and dealt
/// round-robin, so every index lands in exactly one fold.
inline std::vector<std::vector<std::size_t>> stratified_folds(const std::vector<int>& y, std::size_t k, std::uint64_t seed) {
    if (k < 2 || y.size() < k) {
        throw Error(ErrorCode::TooFewSamples, "k-fold: " + std::to_string(y.size()) + " samples for " + std::to_string(k) + " folds");
    }
    std::vector<int> classes(y);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());

    Rng rng(seed);
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t next = 0;
    for (int c : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == c) members.push_back(i);
        }
        rng.shuffle(members.begin(), members.end());
        for (std::size_t i : members) {
            folds[next].push_back(i);
            next = (next + 1) % k;
        }
    }
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

inline RowMatrix take_rows(const RowMatrix& X, const std::vector<std::size_t>& rows) {
    RowMatrix out(static_cast<Eigen::Index>(rows.size()), X.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

/// Mean held-out score over stratified folds (labels in {−1,+1}).
inline double kfold_score(const RowMatrix& X, const std::vector<int>& y, std::size_t k, const SvmConfig& cfg,
                          FoldMetric metric = FoldMetric::Accuracy) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "k-fold: X rows and label count differ");
    }
    const auto folds = stratified_folds(y, k, derive_seed(cfg.rng_seed, "folds"));
    double total = 0.0;
    for (std::size_t f = 0; f < k; ++f) {
        std::vector<char> in_test(y.size(), 0);
        for (std::size_t i : folds[f]) in_test[i] = 1;
        std::vector<std::size_t> train_rows;
        std::vector<int> train_y;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!in_test[i]) {
                train_rows.push_back(i);
                train_y.push_back(y[i]);
            }
        }
        SvmConfig fold_cfg = cfg;
        fold_cfg.rng_seed = derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(f));
        const Hyperplane h = train(take_rows(X, train_rows), train_y, fold_cfg);

        std::size_t correct = 0, tp = 0, fp = 0, fn = 0;
        for (std::size_t i : folds[f]) {
            const int p = predict(h, X.row(static_cast<Eigen::Index>(i)));
            correct += p == y[i];
            tp += p == 1 && y[i] == 1;
            fp += p == 1 && y[i] == -1;
            fn += p == -1 && y[i] == 1;
        }
        if (metric == FoldMetric::Accuracy) {
            total += static_cast<double>(correct) / static_cast<double>(folds[f].size());
        } else {
            const double denom = static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn);
            total += denom > 0.0 ? static_cast<double>(tp) / denom : 0.0;
        }
    }
    return total / static_cast<double>(k);
}

inline double kfold_accuracy(const RowMatrix& X, const std::vector<int>& y, std::size_t k = 5, const SvmConfig& cfg = {}) {
    return kfold_score(X, y, k, cfg, FoldMetric::Accuracy);
}

}  // namespace edupredict::svm
