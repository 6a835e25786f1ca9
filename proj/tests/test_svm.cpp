/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "edupredict/svm.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace edupredict;
using namespace edupredict::svm;
using edupredict::test_support::separable_blobs;
using edupredict::test_support::separable_square;

namespace {

Hyperplane plane(std::initializer_list<double> w, double b) {
    Hyperplane h;
    h.w = Vector(static_cast<Eigen::Index>(w.size()));
    Eigen::Index i = 0;
    for (double v : w) h.w(i++) = v;
    h.b = b;
    return h;
}

Eigen::RowVectorXd point(double x, double y) {
    Eigen::RowVectorXd p(2);
    p << x, y;
    return p;
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::NoProgress;
}

}  // namespace

TEST(SvmTrain, SquareFixtureBoundaryNearMiddle) {
    const auto d = separable_square();
    SvmConfig cfg;
    cfg.epochs = 1000;
    cfg.rng_seed = 4;
    const auto h = train(d.X, d.y, cfg);
    for (Eigen::Index i = 0; i < 4; ++i) EXPECT_EQ(predict(h, d.X.row(i)), d.y[static_cast<std::size_t>(i)]);
    // Boundary crossing on the x axis at y = 0.5.
    const double x_cross = -(h.b + h.w(1) * 0.5) / h.w(0);
    EXPECT_NEAR(x_cross, 1.5, 0.3);
}

TEST(SvmTrain, FlippedLabelsFlipPredictions) {
    const auto d = separable_blobs(60, 3, 2);
    std::vector<int> flipped(d.y.size());
    for (std::size_t i = 0; i < d.y.size(); ++i) flipped[i] = -d.y[i];
    SvmConfig cfg;
    cfg.epochs = 50;
    const auto h = train(d.X, d.y, cfg);
    const auto g = train(d.X, flipped, cfg);
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) EXPECT_EQ(predict(h, d.X.row(i)), -predict(g, d.X.row(i)));
    EXPECT_LT((h.w + g.w).norm(), 0.1 * h.w.norm());
}

TEST(SvmTrain, SingleClassRejected) {
    RowMatrix X(3, 1);
    X << 1, 2, 3;
    EXPECT_EQ(code_of([&] { train(X, {1, 1, 1}); }), ErrorCode::SingleClass);
}

TEST(SvmTrain, DeterministicUnderSeed) {
    const auto d = separable_blobs(40, 2, 9);
    SvmConfig cfg;
    cfg.rng_seed = 77;
    const auto a = train(d.X, d.y, cfg);
    const auto b = train(d.X, d.y, cfg);
    EXPECT_EQ(a.w, b.w);
    EXPECT_EQ(a.b, b.b);
}

TEST(SvmTrain, ObjectiveBeatsZeroHyperplane) {
    Rng rng(6);
    for (int trial = 0; trial < 10; ++trial) {
        RowMatrix X(50, 3);
        std::vector<int> y(50);
        for (Eigen::Index i = 0; i < 50; ++i) {
            for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
            y[static_cast<std::size_t>(i)] = X(i, 0) + 0.5 * rng.normal() > 0 ? 1 : -1;
        }
        SvmConfig cfg;
        cfg.rng_seed = static_cast<std::uint64_t>(trial);
        const auto h = train(X, y, cfg);
        const Hyperplane zero{Vector::Zero(3), 0.0};
        EXPECT_LE(objective(h, X, y, cfg.lambda), objective(zero, X, y, cfg.lambda));
        EXPECT_GT(h.w.norm(), 0.0);
        for (Eigen::Index i = 0; i < 50; ++i) {
            const Hyperplane scaled{h.w * 3.7, h.b * 3.7};
            EXPECT_EQ(predict(scaled, X.row(i)), predict(h, X.row(i)));
        }
    }
}

TEST(SvmPredict, Examples) {
    EXPECT_EQ(predict(plane({1, 0}, 0), point(2, 5)), 1);
    EXPECT_EQ(predict(plane({1, 0}, -2), point(2, 0)), 1);
    EXPECT_EQ(predict(plane({1, 0}, -3), point(2, 0)), -1);
    EXPECT_EQ(code_of([] { predict(plane({1, 0, 0}, 0), point(1, 1)); }), ErrorCode::DimensionMismatch);
}

TEST(SvmGeometry, DistanceAndMargin) {
    EXPECT_DOUBLE_EQ(point_distance(plane({3, 4}, 0), point(1, 1)), 1.4);
    EXPECT_DOUBLE_EQ(point_distance(plane({1, 1}, -2), point(1, 1)), 0.0);
    EXPECT_EQ(code_of([] { point_distance(plane({0, 0}, 1), point(1, 1)); }), ErrorCode::ZeroNorm);
    EXPECT_DOUBLE_EQ(margin(plane({2, 0}, 0)), 1.0);
    EXPECT_DOUBLE_EQ(margin(plane({0.3, 0.4}, 0)), 4.0);
    EXPECT_EQ(code_of([] { margin(plane({0, 0}, 0)); }), ErrorCode::ZeroNorm);
}

TEST(SvmKfold, SeparableDataScoresHigh) {
    const auto d = separable_blobs(100, 2, 1);
    EXPECT_GE(kfold_accuracy(d.X, d.y, 5, SvmConfig{}), 0.95);
}

TEST(SvmKfold, RandomLabelsNearChance) {
    Rng rng(10);
    RowMatrix X(200, 3);
    std::vector<int> y(200);
    for (Eigen::Index i = 0; i < 200; ++i) {
        for (Eigen::Index j = 0; j < 3; ++j) X(i, j) = rng.normal();
        y[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1 : -1;
    }
    const double acc = kfold_accuracy(X, y, 5, SvmConfig{});
    EXPECT_GE(acc, 0.3);
    EXPECT_LE(acc, 0.7);
}

TEST(SvmKfold, TooFewSamples) {
    RowMatrix X(4, 1);
    X << 0, 1, 2, 3;
    EXPECT_EQ(code_of([&] { kfold_accuracy(X, {1, -1, 1, -1}, 5, SvmConfig{}); }), ErrorCode::TooFewSamples);
}

TEST(SvmKfold, FoldsPartitionIndicesAndPreserveRatio) {
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 5 + rng.index(200);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.bernoulli(0.3) ? 1 : -1;
        const auto folds = stratified_folds(y, 5, static_cast<std::uint64_t>(trial));
        std::vector<int> seen(n, 0);
        for (const auto& f : folds) {
            for (std::size_t i : f) ++seen[i];
        }
        for (int s : seen) EXPECT_EQ(s, 1);
        const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        for (const auto& f : folds) {
            std::size_t fp = 0;
            for (std::size_t i : f) fp += y[i] == 1;
            EXPECT_LE(fp, pos / 5 + 1);
            EXPECT_GE(fp + 1, pos / 5);
        }
    }
}
