/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "edupredict/impute.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace edupredict;
using impute::ForestConfig;
using impute::ImputeOptions;
using impute::forest_fit_predict;
using impute::plan;
using records::FeatureTable;

namespace {

FeatureTable table_of(std::vector<std::string> names, const RowMatrix& values) {
    FeatureTable t;
    t.column_names = std::move(names);
    t.values = values;
    return t;
}

bool bit_equal(const RowMatrix& a, const RowMatrix& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST(Plan, OrdersByMissingCount) {
    RowMatrix v(3, 3);
    v << 1, kMissing, 1,  //
        2, kMissing, kMissing,  //
        3, kMissing, 3;
    const auto p = plan(table_of({"a", "b", "c"}, v));
    EXPECT_EQ(p.columns, (std::vector<std::string>{"c", "b"}));
    EXPECT_EQ(p.missing_rows[0], std::vector<std::size_t>{1});
    EXPECT_EQ(p.missing_rows[1], (std::vector<std::size_t>{0, 1, 2}));
}

TEST(Plan, EmptyWhenComplete) {
    RowMatrix v(2, 2);
    v << 1, 2, 3, 4;
    EXPECT_TRUE(plan(table_of({"a", "b"}, v)).columns.empty());
}

TEST(Plan, TiesKeepColumnPosition) {
    RowMatrix v(3, 2);
    v << kMissing, 1,  //
        kMissing, kMissing,  //
        1, kMissing;
    EXPECT_EQ(plan(table_of({"a", "b"}, v)).columns, (std::vector<std::string>{"a", "b"}));
}

TEST(Forest, ConstantTargetPredictsConstant) {
    Rng rng(1);
    RowMatrix X(30, 3);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
    const Vector y = Vector::Constant(30, 4.25);
    RowMatrix Xq(5, 3);
    for (Eigen::Index i = 0; i < Xq.size(); ++i) Xq.data()[i] = rng.normal();
    const Vector p = forest_fit_predict(X, y, Xq, ForestConfig{});
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p(i), 4.25);
}

TEST(Forest, SingleRowPredictsItsTarget) {
    RowMatrix X(1, 2);
    X << 3, 4;
    Vector y(1);
    y << -2.5;
    RowMatrix Xq(3, 2);
    Xq << 0, 0, 10, 10, 3, 4;
    const Vector p = forest_fit_predict(X, y, Xq, ForestConfig{});
    for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_DOUBLE_EQ(p(i), -2.5);
}

TEST(Forest, SingleTreeFitsGrid) {
    RowMatrix X(100, 2);
    Vector y(100);
    for (int i = 0; i < 100; ++i) {
        X(i, 0) = i / 10.0;
        X(i, 1) = (i * 37) % 11;
        y(i) = X(i, 0);
    }
    ForestConfig cfg;
    cfg.n_trees = 1;
    cfg.max_depth = 8;
    cfg.feature_subsample = 1.0;
    cfg.rng_seed = 3;
    const Vector p = forest_fit_predict(X, y, X, cfg);
    const double mse = (p - y).squaredNorm() / 100.0;
    const double var = (y.array() - y.mean()).square().mean();
    EXPECT_LT(mse, 0.05 * var);
}

TEST(Forest, DimensionMismatch) {
    RowMatrix X(3, 2);
    X.setZero();
    Vector y(2);
    y.setZero();
    try {
        forest_fit_predict(X, y, X, ForestConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
    }
}

TEST(Impute, CompleteTableIsBitIdentical) {
    RowMatrix v(4, 2);
    v << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
    const auto t = table_of({"a", "b"}, v);
    EXPECT_TRUE(bit_equal(impute::impute(t, ForestConfig{}).values, v));
}

TEST(Impute, LinearFixtureRecoversMissingCell) {
    RowMatrix v(51, 2);
    for (int i = 0; i < 51; ++i) {
        v(i, 0) = i * 0.2;
        v(i, 1) = v(i, 0);
    }
    const double truth = v(23, 1);
    v(23, 1) = kMissing;
    ForestConfig cfg;
    cfg.max_depth = 4;
    cfg.feature_subsample = 1.0;
    cfg.rng_seed = 8;
    const auto out = impute::impute(table_of({"x", "y"}, v), cfg);
    EXPECT_NEAR(out.values(23, 1), truth, 0.5);
    EXPECT_EQ(out.missing_count(), 0u);
}

TEST(Impute, AllMissingColumnFails) {
    RowMatrix v(3, 2);
    v << 1, kMissing, 2, kMissing, 3, kMissing;
    try {
        impute::impute(table_of({"a", "b"}, v), ForestConfig{});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::AllMissingColumn);
    }
}

TEST(Impute, ObservedCellsUntouchedAndDeterministic) {
    Rng rng(4);
    RowMatrix v(60, 4);
    for (Eigen::Index r = 0; r < 60; ++r) {
        const double base = rng.normal();
        for (Eigen::Index c = 0; c < 4; ++c) v(r, c) = base * static_cast<double>(c + 1) + 0.1 * rng.normal();
    }
    RowMatrix holes = v;
    for (Eigen::Index r = 0; r < 60; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            if (rng.bernoulli(0.15)) holes(r, c) = kMissing;
        }
    }
    ForestConfig cfg;
    cfg.n_trees = 10;
    cfg.rng_seed = 99;
    const auto t = table_of({"a", "b", "c", "d"}, holes);
    const auto a = impute::impute(t, cfg);
    const auto b = impute::impute(t, cfg);
    EXPECT_TRUE(bit_equal(a.values, b.values));
    EXPECT_EQ(a.missing_count(), 0u);
    for (Eigen::Index r = 0; r < 60; ++r) {
        for (Eigen::Index c = 0; c < 4; ++c) {
            if (!is_missing(holes(r, c))) {
                EXPECT_EQ(a.values(r, c), holes(r, c));
            }
        }
    }
}

TEST(Impute, LabelIsNotAPredictor) {
    // The label equals the target; if it were used, imputation would be exact.
    RowMatrix v(40, 3);
    Rng rng(2);
    for (Eigen::Index r = 0; r < 40; ++r) {
        v(r, 0) = static_cast<double>(r % 2);
        v(r, 1) = v(r, 0);
        v(r, 2) = rng.normal();
    }
    v(5, 1) = kMissing;
    ForestConfig cfg;
    cfg.rng_seed = 1;
    cfg.feature_subsample = 1.0;
    auto t = table_of({"sit_vinculo_atual", "y", "noise"}, v);
    const auto out = impute::impute(t, cfg);
    ImputeOptions with_label;
    with_label.exclude_predictors.clear();
    const auto leaky = impute::impute(t, cfg, with_label);
    EXPECT_NEAR(leaky.values(5, 1), 1.0, 1e-9);
    EXPECT_GT(std::abs(out.values(5, 1) - 1.0), 1e-6);
}
