/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include "edupredict/common.hpp"

#include <nlohmann/json.hpp>

#include <vector>

namespace edupredict::metrics {

/// Binary confusion counts with class 1 as the positive class.
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;

    std::size_t total() const { return tp + tn + fp + fn; }
};

inline ConfusionMatrix confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.empty() || preds.size() != labels.size()) {
        throw Error(ErrorCode::LengthMismatch, "confusion: " + std::to_string(preds.size()) + " predictions vs " +
                                                   std::to_string(labels.size()) + " labels");
    }
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const bool p = preds[i] == 1;
        const bool l = labels[i] == 1;
        if (p && l) ++cm.tp;
        else if (!p && !l) ++cm.tn;
        else if (p) ++cm.fp;
        else ++cm.fn;
    }
    return cm;
}

struct Report {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    // Set when the metric's denominator was zero and 0 was reported.
    bool precision_undefined = false;
    bool recall_undefined = false;
    bool f1_undefined = false;
    ConfusionMatrix cm;
};

/// accuracy = (TP+TN)/N, precision = TP/(TP+FP), recall = TP/(TP+FN),
/// F1 = TP / (TP + (FP+FN)/2).
inline Report report(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw Error(ErrorCode::EmptyMatrix, "report: confusion matrix is empty");
    Report r;
    r.cm = cm;
    const auto tp = static_cast<double>(cm.tp);
    r.accuracy = static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
    auto ratio = [&](double denom, bool& undefined) {
        if (denom > 0.0) return tp / denom;
        undefined = true;
        return 0.0;
    };
    r.precision = ratio(tp + static_cast<double>(cm.fp), r.precision_undefined);
    r.recall = ratio(tp + static_cast<double>(cm.fn), r.recall_undefined);
    r.f1 = ratio(tp + 0.5 * static_cast<double>(cm.fp + cm.fn), r.f1_undefined);
    return r;
}

inline nlohmann::json to_json(const Report& r) {
    nlohmann::json j{{"accuracy", r.accuracy}, {"precision", r.precision}, {"recall", r.recall}, {"f1", r.f1},
                     {"tp", r.cm.tp},          {"tn", r.cm.tn},               {"fp", r.cm.fp},         {"fn", r.cm.fn}};
    nlohmann::json undefined = nlohmann::json::array();
    if (r.precision_undefined) undefined.push_back("precision");
    if (r.recall_undefined) undefined.push_back("recall");
    if (r.f1_undefined) undefined.push_back("f1");
    if (!undefined.empty()) j["undefined"] = undefined;
    return j;
}

}  // namespace edupredict::metrics
