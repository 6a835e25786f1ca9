/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"
#include "edupredict/records.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace edupredict::test_support {

/// One schema-complete record row with plausible defaults; `overrides` maps
/// column name to cell text.
inline std::vector<std::string> record_row(const std::map<std::string, std::string>& overrides = {}) {
    std::vector<std::string> cells;
    for (const auto& spec : records::kSchema) {
        const std::string name(spec.name);
        if (auto it = overrides.find(name); it != overrides.end()) {
            cells.push_back(it->second);
        } else if (name == "sit_vinculo_atual") {
            cells.push_back("MATRICULADO");
        } else if (name == "matricula") {
            cells.push_back("S1");
        } else if (name == "cod_hab") {
            cells.push_back("ADM");
        } else if (name == "disciplina" || name == "grupos") {
            cells.push_back("ADM0101");
        } else if (spec.numeric) {
            cells.push_back(name == "grau" ? "7.5" : "1");
        } else {
            cells.push_back("x");
        }
    }
    return cells;
}

inline std::string records_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream out;
    std::vector<std::string> header;
    for (const auto& spec : records::kSchema) header.emplace_back(spec.name);
    csv::write_row(out, header);
    for (const auto& r : rows) csv::write_row(out, r);
    return out.str();
}

inline records::RecordTable load_text(const std::string& text) {
    std::istringstream in(text);
    return records::load_records(in);
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        path_ = std::filesystem::temp_directory_path() /
                ("edupredict_" + tag + "_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

/// Rows of Gaussian noise plus, at column `leak`, a copy of the {0,1} label.
struct LabeledData {
    RowMatrix X;
    std::vector<int> y;
};

inline LabeledData label_leak(std::size_t n, std::size_t features, std::size_t leak, std::uint64_t seed) {
    Rng rng(seed);
    LabeledData d{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(features)), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        d.y[i] = rng.bernoulli(0.5) ? 1 : 0;
        for (std::size_t j = 0; j < features; ++j) {
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                j == leak ? static_cast<double>(d.y[i]) : rng.normal();
        }
    }
    return d;
}

/// {(0,0),(0,1)} labelled −1 against {(3,0),(3,1)} labelled +1.
inline LabeledData separable_square() {
    LabeledData d{RowMatrix(4, 2), {-1, -1, 1, 1}};
    d.X << 0, 0, 0, 1, 3, 0, 3, 1;
    return d;
}

/// Two Gaussian blobs centred at ∓2 on every axis, labels in {−1,+1}.
inline LabeledData separable_blobs(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    LabeledData d{RowMatrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim)), std::vector<int>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        d.y[i] = i % 2 ? 1 : -1;
        for (std::size_t j = 0; j < dim; ++j) {
            d.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 2.0 * d.y[i] + 0.3 * rng.normal();
        }
    }
    return d;
}

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace edupredict::test_support
