/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Random-forest imputation of missing table cells.
 *
 *  Columns are visited from fewest to most missing cells. For each target
 *  column every other missing cell is temporarily read as 0, a regression
 *  forest is trained on the rows where the target is observed and its
 *  predictions fill the gaps. Passes repeat while anything is missing.
 */

#include "edupredict/common.hpp"
#include "edupredict/records.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

namespace edupredict::impute {

struct ForestConfig {
    std::size_t n_trees = 50;
    std::size_t max_depth = 10;
    std::size_t min_leaf = 2;
    double feature_subsample = 1.0 / 3.0;
    std::uint64_t rng_seed = 0;
    /// Upper bound on rows used to train each forest; 0 uses every row.
    std::size_t max_train_rows = 0;

    void validate() const {
        if (n_trees < 1 || max_depth < 1 || min_leaf < 1 || !(feature_subsample > 0.0 && feature_subsample <= 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "forest: n_trees, max_depth, min_leaf >= 1 and feature_subsample in (0,1]");
        }
    }
};

/// CART regression tree (variance-reduction splits, mean-valued leaves).
class RegressionTree {
public:
    void fit(const RowMatrix& X, const Vector& y, std::vector<std::size_t> rows, const ForestConfig& cfg, Rng& rng) {
        nodes_.clear();
        const auto p = static_cast<std::size_t>(X.cols());
        mtry_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(cfg.feature_subsample * static_cast<double>(p))));
        mtry_ = std::min(mtry_, p);
        build(X, y, rows, 0, rows.size(), 0, cfg, rng);
    }

    double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
        std::size_t n = 0;
        while (!nodes_[n].leaf) {
            n = x(static_cast<Eigen::Index>(nodes_[n].feature)) <= nodes_[n].threshold ? nodes_[n].left : nodes_[n].right;
        }
        return nodes_[n].value;
    }

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        bool leaf = true;
        std::size_t feature = 0;
        double threshold = 0.0;
        std::size_t left = 0;
        std::size_t right = 0;
        double value = 0.0;
    };

    std::size_t build(const RowMatrix& X, const Vector& y, std::vector<std::size_t>& rows, std::size_t begin,
                      std::size_t end, std::size_t depth, const ForestConfig& cfg, Rng& rng) {
        const std::size_t id = nodes_.size();
        nodes_.emplace_back();
        const std::size_t n = end - begin;

        double sum = 0.0;
        for (std::size_t i = begin; i < end; ++i) sum += y(static_cast<Eigen::Index>(rows[i]));
        const double mean = sum / static_cast<double>(n);
        nodes_[id].value = mean;

        double sse = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const double d = y(static_cast<Eigen::Index>(rows[i])) - mean;
            sse += d * d;
        }
        if (depth >= cfg.max_depth || n < 2 * cfg.min_leaf || sse <= 0.0) return id;

        // Random feature subset for this node.
        const auto p = static_cast<std::size_t>(X.cols());
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), 0);
        for (std::size_t i = 0; i < mtry_; ++i) std::swap(features[i], features[i + rng.index(p - i)]);

        double best_gain = 0.0;
        std::size_t best_feature = 0;
        double best_threshold = 0.0;
        std::vector<std::size_t> order(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                       rows.begin() + static_cast<std::ptrdiff_t>(end));
        for (std::size_t k = 0; k < mtry_; ++k) {
            const auto f = static_cast<Eigen::Index>(features[k]);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return X(static_cast<Eigen::Index>(a), f) < X(static_cast<Eigen::Index>(b), f);
            });
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                left_sum += y(static_cast<Eigen::Index>(order[i]));
                const std::size_t n_left = i + 1;
                const std::size_t n_right = n - n_left;
                const double xa = X(static_cast<Eigen::Index>(order[i]), f);
                const double xb = X(static_cast<Eigen::Index>(order[i + 1]), f);
                if (n_left < cfg.min_leaf || n_right < cfg.min_leaf || !(xa < xb)) continue;
                const double right_sum = sum - left_sum;
                // SSE reduction = n_l·μ_l² + n_r·μ_r² − n·μ²
                const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                                    right_sum * right_sum / static_cast<double>(n_right) - sum * sum / static_cast<double>(n);
                if (gain > best_gain + 1e-12 * std::abs(best_gain)) {
                    best_gain = gain;
                    best_feature = features[k];
                    best_threshold = xa + 0.5 * (xb - xa);
                }
            }
        }
        if (best_gain <= 0.0) return id;

        const auto bf = static_cast<Eigen::Index>(best_feature);
        auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                  rows.begin() + static_cast<std::ptrdiff_t>(end),
                                  [&](std::size_t r) { return X(static_cast<Eigen::Index>(r), bf) <= best_threshold; });
        const auto split = static_cast<std::size_t>(mid - rows.begin());
        if (split == begin || split == end) return id;

        nodes_[id].leaf = false;
        nodes_[id].feature = best_feature;
        nodes_[id].threshold = best_threshold;
        const std::size_t left = build(X, y, rows, begin, split, depth + 1, cfg, rng);
        const std::size_t right = build(X, y, rows, split, end, depth + 1, cfg, rng);
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    std::vector<Node> nodes_;
    std::size_t mtry_ = 1;
};

/// Mean prediction of cfg.n_trees bootstrap CART trees. Tree t draws from its
/// own stream derived from (rng_seed, t).
inline Vector forest_fit_predict(const RowMatrix& X, const Vector& y, const RowMatrix& Xq, const ForestConfig& cfg) {
    cfg.validate();
    if (X.rows() != y.size() || X.rows() < 1) {
        throw Error(ErrorCode::DimensionMismatch, "forest: X has " + std::to_string(X.rows()) + " rows, y has " +
                                                      std::to_string(y.size()));
    }
    if (Xq.rows() > 0 && Xq.cols() != X.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "forest: query width differs from training width");
    }
    const auto n = static_cast<std::size_t>(X.rows());
    Vector out = Vector::Zero(Xq.rows());
    RegressionTree tree;
    for (std::size_t t = 0; t < cfg.n_trees; ++t) {
        Rng rng(derive_seed(cfg.rng_seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> sample(n);
        for (auto& s : sample) s = rng.index(n);
        tree.fit(X, y, std::move(sample), cfg, rng);
        for (Eigen::Index q = 0; q < Xq.rows(); ++q) out(q) += tree.predict(Xq.row(q));
    }
    out /= static_cast<double>(cfg.n_trees);
    return out;
}

struct ImputationPlan {
    std::vector<std::string> columns;
    std::vector<std::vector<std::size_t>> missing_rows;
};

/// Columns with at least one missing cell, ascending by missing count; ties
/// keep column order.
inline ImputationPlan plan(const records::FeatureTable& table) {
    std::vector<std::size_t> cols;
    std::vector<std::size_t> counts(table.cols(), 0);
    for (std::size_t c = 0; c < table.cols(); ++c) {
        counts[c] = static_cast<std::size_t>(table.values.col(static_cast<Eigen::Index>(c)).array().isNaN().count());
        if (counts[c] > 0) cols.push_back(c);
    }
    std::stable_sort(cols.begin(), cols.end(), [&](std::size_t a, std::size_t b) { return counts[a] < counts[b]; });
    ImputationPlan out;
    for (std::size_t c : cols) {
        out.columns.push_back(table.column_names[c]);
        std::vector<std::size_t> rows;
        for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
            if (is_missing(table.values(r, static_cast<Eigen::Index>(c)))) rows.push_back(static_cast<std::size_t>(r));
        }
        out.missing_rows.push_back(std::move(rows));
    }
    return out;
}

struct ImputeOptions {
    /// Columns never used as predictors (the label, by default).
    std::vector<std::string> exclude_predictors = {std::string(records::col::kStatus)};
};

inline records::FeatureTable impute(const records::FeatureTable& input, const ForestConfig& cfg,
                                    const ImputeOptions& opts = {}) {
    cfg.validate();
    records::FeatureTable work = input;
    const auto n_rows = work.values.rows();
    for (std::size_t c = 0; c < work.cols(); ++c) {
        const auto missing = work.values.col(static_cast<Eigen::Index>(c)).array().isNaN().count();
        if (n_rows > 0 && missing == n_rows) {
            throw Error(ErrorCode::AllMissingColumn, "column '" + work.column_names[c] + "' has no observed values");
        }
    }

    std::size_t remaining = work.missing_count();
    while (remaining > 0) {
        const ImputationPlan order = plan(work);
        for (std::size_t k = 0; k < order.columns.size(); ++k) {
            const std::size_t target = work.index(order.columns[k]);
            std::vector<std::size_t> predictors;
            for (std::size_t c = 0; c < work.cols(); ++c) {
                if (c == target) continue;
                if (std::find(opts.exclude_predictors.begin(), opts.exclude_predictors.end(), work.column_names[c]) !=
                    opts.exclude_predictors.end()) {
                    continue;
                }
                predictors.push_back(c);
            }

            std::vector<std::size_t> observed;
            std::vector<std::size_t> missing;
            for (Eigen::Index r = 0; r < n_rows; ++r) {
                (is_missing(work.values(r, static_cast<Eigen::Index>(target))) ? missing : observed)
                    .push_back(static_cast<std::size_t>(r));
            }
            if (missing.empty()) continue;

            ForestConfig column_cfg = cfg;
            column_cfg.rng_seed = derive_seed(cfg.rng_seed, order.columns[k]);
            if (cfg.max_train_rows > 0 && observed.size() > cfg.max_train_rows) {
                Rng pick(derive_seed(column_cfg.rng_seed, "rows"));
                pick.shuffle(observed.begin(), observed.end());
                observed.resize(cfg.max_train_rows);
                std::sort(observed.begin(), observed.end());
            }

            // Zero-fill placeholder for other missing cells.
            auto gather = [&](const std::vector<std::size_t>& rows) {
                RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(predictors.size()));
                for (std::size_t i = 0; i < rows.size(); ++i) {
                    for (std::size_t j = 0; j < predictors.size(); ++j) {
                        const double v = work.values(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(predictors[j]));
                        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = is_missing(v) ? 0.0 : v;
                    }
                }
                return m;
            };
            const RowMatrix X = gather(observed);
            const RowMatrix Xq = gather(missing);
            Vector y(static_cast<Eigen::Index>(observed.size()));
            for (std::size_t i = 0; i < observed.size(); ++i) {
                y(static_cast<Eigen::Index>(i)) = work.values(static_cast<Eigen::Index>(observed[i]), static_cast<Eigen::Index>(target));
            }
            const Vector pred = forest_fit_predict(X, y, Xq, column_cfg);
            for (std::size_t i = 0; i < missing.size(); ++i) {
                work.values(static_cast<Eigen::Index>(missing[i]), static_cast<Eigen::Index>(target)) =
                    pred(static_cast<Eigen::Index>(i));
            }
            info("imputed " + std::to_string(missing.size()) + " cell(s) of '" + order.columns[k] + "'");
        }
        const std::size_t after = work.missing_count();
        if (after >= remaining) {
            throw Error(ErrorCode::NoProgress, "imputation pass did not reduce the missing count");
        }
        remaining = after;
    }
    return work;
}

}  // namespace edupredict::impute
