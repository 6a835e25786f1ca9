/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief SMOTE oversampling of the minority class.
 */

#include "edupredict/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace edupredict::balance {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    double target_minority_fraction = 0.5;
    std::uint64_t rng_seed = 0;
};

struct SmoteResult {
    RowMatrix X;
    std::vector<int> y;
    std::size_t synthetic = 0;
    int minority_label = 0;
};

/// Number of synthetic minority rows needed so that minority / total ≥ target.
inline std::size_t synthetic_needed(std::size_t minority, std::size_t total, double target) {
    const double need = (target * static_cast<double>(total) - static_cast<double>(minority)) / (1.0 - target);
    if (need <= 0.0) return 0;
    auto s = static_cast<std::size_t>(std::ceil(need - 1e-9));
    while (static_cast<double>(minority + s) < target * static_cast<double>(total + s)) ++s;
    return s;
}

/// Indices (into `pool`) of the k nearest pool rows to pool[i], excluding i.
/// Ties resolve to the lower index.
inline std::vector<std::vector<std::size_t>> nearest_neighbors(const RowMatrix& pool, std::size_t k) {
    const auto m = pool.rows();
    const Vector norms = pool.rowwise().squaredNorm();
    std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(m));
    constexpr Eigen::Index kBlock = 256;
    std::vector<std::size_t> idx(static_cast<std::size_t>(m));
    for (Eigen::Index start = 0; start < m; start += kBlock) {
        const Eigen::Index rows = std::min(kBlock, m - start);
        const Eigen::MatrixXd cross = pool.middleRows(start, rows) * pool.transpose();
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index i = start + r;
            auto dist = [&](std::size_t j) {
                return norms(i) + norms(static_cast<Eigen::Index>(j)) - 2.0 * cross(r, static_cast<Eigen::Index>(j));
            };
            std::iota(idx.begin(), idx.end(), 0);
            idx.erase(idx.begin() + i);
            const std::size_t kk = std::min<std::size_t>(k, idx.size());
            std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk), idx.end(),
                              [&](std::size_t a, std::size_t b) {
                                  const double da = dist(a), db = dist(b);
                                  return da < db || (da == db && a < b);
                              });
            out[static_cast<std::size_t>(i)].assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(kk));
            idx.resize(static_cast<std::size_t>(m));
        }
    }
    return out;
}

/// Appends synthetic minority rows x_i + u·(x_nn − x_i) until the minority
/// fraction reaches the target. Original rows keep their order and values.
inline SmoteResult smote(const RowMatrix& X, const std::vector<int>& y, const SmoteConfig& cfg) {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw Error(ErrorCode::DimensionMismatch, "smote: X rows and label count differ");
    }
    if (!(cfg.target_minority_fraction > 0.0 && cfg.target_minority_fraction <= 0.5) || cfg.k_neighbors < 1) {
        throw Error(ErrorCode::InvalidConfig, "smote: target fraction must be in (0, 0.5] and k >= 1");
    }
    const auto ones = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    const std::size_t zeros = y.size() - ones;
    if (ones == 0 || zeros == 0) throw Error(ErrorCode::SingleClass, "smote: both classes must be present");

    SmoteResult result{X, y, 0, ones < zeros ? 1 : 0};
    const std::size_t minority = std::min(ones, zeros);
    const std::size_t needed = synthetic_needed(minority, y.size(), cfg.target_minority_fraction);
    if (needed == 0) return result;
    if (minority <= cfg.k_neighbors) {
        throw Error(ErrorCode::TooFewMinority, "smote: " + std::to_string(minority) + " minority rows, k = " +
                                                   std::to_string(cfg.k_neighbors));
    }

    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (y[i] == result.minority_label) members.push_back(i);
    }
    RowMatrix pool(static_cast<Eigen::Index>(members.size()), X.cols());
    for (std::size_t i = 0; i < members.size(); ++i) pool.row(static_cast<Eigen::Index>(i)) = X.row(static_cast<Eigen::Index>(members[i]));
    const auto neighbors = nearest_neighbors(pool, cfg.k_neighbors);

    Rng rng(cfg.rng_seed);
    result.X.conservativeResize(X.rows() + static_cast<Eigen::Index>(needed), X.cols());
    for (std::size_t s = 0; s < needed; ++s) {
        const std::size_t base = rng.index(members.size());
        const auto& nn = neighbors[base];
        const std::size_t other = nn[rng.index(nn.size())];
        const double u = rng.uniform();
        const auto row = X.rows() + static_cast<Eigen::Index>(s);
        result.X.row(row) = pool.row(static_cast<Eigen::Index>(base)) +
                            u * (pool.row(static_cast<Eigen::Index>(other)) - pool.row(static_cast<Eigen::Index>(base)));
        result.y.push_back(result.minority_label);
    }
    result.synthetic = needed;
    return result;
}

}  // namespace edupredict::balance
