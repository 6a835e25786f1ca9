/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Sentence-embedding ingestion, cosine similarity, course-level
 *  similarity matrices, and small reference kernels for scaled dot-product
 *  and multi-head attention.
 */

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace edupredict::textsim {

using Eigen::MatrixXd;

struct SentenceEmbedding {
    std::string course_id;
    std::size_t sentence_index = 0;
    Vector vector;
};

/// Sentences of one course, ordered by sentence_index.
struct CourseEmbeddings {
    std::string course_id;
    std::vector<Vector> sentences;
};

/// Courses in ascending course_id order.
using Corpus = std::vector<CourseEmbeddings>;

struct LoadedEmbeddings {
    std::vector<SentenceEmbedding> sentences;
    Corpus courses;
};

inline Corpus group_by_course(const std::vector<SentenceEmbedding>& sentences) {
    std::map<std::string, std::vector<const SentenceEmbedding*>> groups;
    for (const auto& s : sentences) groups[s.course_id].push_back(&s);
    Corpus out;
    for (auto& [id, members] : groups) {
        std::stable_sort(members.begin(), members.end(),
                         [](const SentenceEmbedding* a, const SentenceEmbedding* b) { return a->sentence_index < b->sentence_index; });
        CourseEmbeddings c{id, {}};
        for (const auto* m : members) c.sentences.push_back(m->vector);
        out.push_back(std::move(c));
    }
    return out;
}

/// Reads the JSON-lines embedding file. Blank lines and objects carrying a
/// "comment" key (encoder header lines) are skipped.
inline LoadedEmbeddings load_embeddings(std::istream& in, const std::string& source = "<stream>") {
    LoadedEmbeddings out;
    std::optional<std::size_t> dim;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto bad = [&](const std::string& why) {
            return Error(ErrorCode::MalformedLine, source + ":" + std::to_string(line_no) + ": " + why);
        };
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw bad(e.what());
        }
        if (!j.is_object()) throw bad("expected a JSON object");
        if (j.contains("comment")) continue;
        SentenceEmbedding s;
        try {
            s.course_id = j.at("course_id").get<std::string>();
            const auto idx = j.at("sentence_index").get<long long>();
            if (idx < 0) throw bad("negative sentence_index");
            s.sentence_index = static_cast<std::size_t>(idx);
            const auto values = j.at("vector").get<std::vector<double>>();
            const auto declared = j.at("dim").get<long long>();
            if (declared < 0 || static_cast<std::size_t>(declared) != values.size()) {
                throw bad("dim " + std::to_string(declared) + " disagrees with vector length " + std::to_string(values.size()));
            }
            s.vector = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
        } catch (const nlohmann::json::exception& e) {
            throw bad(e.what());
        }
        if (s.course_id.empty()) throw bad("empty course_id");
        if (!s.vector.allFinite()) throw bad("vector contains NaN or infinity");
        if (!dim) dim = static_cast<std::size_t>(s.vector.size());
        if (static_cast<std::size_t>(s.vector.size()) != *dim) {
            throw Error(ErrorCode::DimensionInconsistent, source + ":" + std::to_string(line_no) + ": dimension " +
                                                              std::to_string(s.vector.size()) + ", expected " + std::to_string(*dim));
        }
        if (s.vector.squaredNorm() == 0.0) {
            warn(source + ":" + std::to_string(line_no) + ": zero vector for " + s.course_id + " sentence " +
                 std::to_string(s.sentence_index));
        }
        out.sentences.push_back(std::move(s));
    }
    out.courses = group_by_course(out.sentences);
    return out;
}

inline LoadedEmbeddings load_embeddings(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    return load_embeddings(in, path.string());
}

inline void write_embeddings(std::ostream& out, const std::vector<SentenceEmbedding>& sentences) {
    for (const auto& s : sentences) {
        nlohmann::json j = {{"course_id", s.course_id},
                            {"sentence_index", s.sentence_index},
                            {"dim", s.vector.size()},
                            {"vector", std::vector<double>(s.vector.data(), s.vector.data() + s.vector.size())}};
        out << j.dump() << '\n';
    }
}

/// t·e / (‖t‖‖e‖)
inline double cosine(const Eigen::Ref<const Vector>& t, const Eigen::Ref<const Vector>& e) {
    if (t.size() != e.size()) {
        throw Error(ErrorCode::DimensionMismatch, "cosine: dimensions " + std::to_string(t.size()) + " and " + std::to_string(e.size()));
    }
    const double nt = t.norm();
    const double ne = e.norm();
    if (!(nt > 0.0) || !(ne > 0.0)) throw Error(ErrorCode::ZeroVector, "cosine: zero-norm vector");
    return std::clamp(t.dot(e) / (nt * ne), -1.0, 1.0);
}

enum class Aggregation { CrossMean, MaxMatch };

/// Cross-pair mean: (1/|A||B|) Σ_a Σ_b cos(a, b). Pair cosines are summed
/// in a fixed (min, max) ordering so the result is bit-identical when the
/// arguments are swapped. MaxMatch averages each sentence's best match in
/// the other course, symmetrized over both directions.
inline double course_similarity(const CourseEmbeddings& A, const CourseEmbeddings& B,
                                Aggregation mode = Aggregation::CrossMean) {
    if (A.sentences.empty() || B.sentences.empty()) {
        throw Error(ErrorCode::EmptyCourse, "course_similarity: course '" + (A.sentences.empty() ? A.course_id : B.course_id) +
                                                "' has no sentences");
    }
    const bool swap = B.course_id < A.course_id;
    const CourseEmbeddings& first = swap ? B : A;
    const CourseEmbeddings& second = swap ? A : B;
    MatrixXd cos(static_cast<Eigen::Index>(first.sentences.size()), static_cast<Eigen::Index>(second.sentences.size()));
    for (std::size_t i = 0; i < first.sentences.size(); ++i) {
        for (std::size_t j = 0; j < second.sentences.size(); ++j) {
            cos(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cosine(first.sentences[i], second.sentences[j]);
        }
    }
    if (mode == Aggregation::CrossMean) {
        double sum = 0.0;
        for (Eigen::Index i = 0; i < cos.rows(); ++i) {
            for (Eigen::Index j = 0; j < cos.cols(); ++j) sum += cos(i, j);
        }
        return sum / static_cast<double>(cos.size());
    }
    double row_best = 0.0;
    for (Eigen::Index i = 0; i < cos.rows(); ++i) row_best += cos.row(i).maxCoeff();
    double col_best = 0.0;
    for (Eigen::Index j = 0; j < cos.cols(); ++j) col_best += cos.col(j).maxCoeff();
    return 0.5 * (row_best / static_cast<double>(cos.rows()) + col_best / static_cast<double>(cos.cols()));
}

struct SimilarityMatrix {
    std::vector<std::string> course_ids;
    MatrixXd values;
    /// Self-similarity before the diagonal is set to 1.
    Vector raw_diagonal;
};

/// Pairwise course similarity; the diagonal is exactly 1.
inline SimilarityMatrix similarity_matrix(const Corpus& corpus, Aggregation mode = Aggregation::CrossMean) {
    if (corpus.empty()) throw Error(ErrorCode::EmptyCourse, "similarity_matrix: no courses");
    const auto n = static_cast<Eigen::Index>(corpus.size());
    SimilarityMatrix out;
    out.values = MatrixXd::Identity(n, n);
    out.raw_diagonal.resize(n);
    for (const auto& c : corpus) out.course_ids.push_back(c.course_id);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.raw_diagonal(i) = course_similarity(corpus[static_cast<std::size_t>(i)], corpus[static_cast<std::size_t>(i)], mode);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double s = course_similarity(corpus[static_cast<std::size_t>(i)], corpus[static_cast<std::size_t>(j)], mode);
            out.values(i, j) = s;
            out.values(j, i) = s;
        }
    }
    return out;
}

/// Thousands digit of the first number in a course code ("COMP2310" → 2000).
inline std::optional<int> course_level(std::string_view course_id) {
    const auto pos = course_id.find_first_of("0123456789");
    if (pos == std::string_view::npos || pos + 4 > course_id.size()) return std::nullopt;
    for (std::size_t k = pos; k < pos + 4; ++k) {
        if (course_id[k] < '0' || course_id[k] > '9') return std::nullopt;
    }
    const int level = course_id[pos] - '0';
    if (level < 1) return std::nullopt;
    return level * 1000;
}

/// Submatrices restricted to the courses of each level.
inline std::map<int, SimilarityMatrix> level_submatrices(const SimilarityMatrix& m) {
    std::map<int, std::vector<Eigen::Index>> members;
    for (std::size_t i = 0; i < m.course_ids.size(); ++i) {
        if (auto level = course_level(m.course_ids[i])) members[*level].push_back(static_cast<Eigen::Index>(i));
    }
    std::map<int, SimilarityMatrix> out;
    for (const auto& [level, idx] : members) {
        SimilarityMatrix s;
        const auto k = static_cast<Eigen::Index>(idx.size());
        s.values.resize(k, k);
        s.raw_diagonal.resize(k);
        for (Eigen::Index a = 0; a < k; ++a) {
            s.course_ids.push_back(m.course_ids[static_cast<std::size_t>(idx[static_cast<std::size_t>(a)])]);
            s.raw_diagonal(a) = m.raw_diagonal(idx[static_cast<std::size_t>(a)]);
            for (Eigen::Index b = 0; b < k; ++b) s.values(a, b) = m.values(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
        }
        out.emplace(level, std::move(s));
    }
    return out;
}

struct RankedCourse {
    std::string course_id;
    double mean_similarity = 0.0;
};

/// Courses by descending mean off-diagonal similarity, ties by course_id.
inline std::vector<RankedCourse> average_linkage_rank(const SimilarityMatrix& m) {
    const auto n = m.values.rows();
    if (n < 2) throw Error(ErrorCode::TooFewCourses, "average_linkage_rank: needs at least 2 courses");
    std::vector<RankedCourse> out;
    for (Eigen::Index i = 0; i < n; ++i) {
        double sum = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j != i) sum += m.values(i, j);
        }
        out.push_back({m.course_ids[static_cast<std::size_t>(i)], sum / static_cast<double>(n - 1)});
    }
    std::sort(out.begin(), out.end(), [](const RankedCourse& a, const RankedCourse& b) {
        return a.mean_similarity > b.mean_similarity || (a.mean_similarity == b.mean_similarity && a.course_id < b.course_id);
    });
    return out;
}

inline void write_matrix_csv(std::ostream& out, const SimilarityMatrix& m) {
    std::vector<std::string> header{""};
    header.insert(header.end(), m.course_ids.begin(), m.course_ids.end());
    csv::write_row(out, header);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        std::vector<std::string> row{m.course_ids[static_cast<std::size_t>(i)]};
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) row.push_back(csv::format_double(m.values(i, j)));
        csv::write_row(out, row);
    }
}

/// Heat-map bundle {course_ids, values, min, max}; min and max cover the
/// off-diagonal cells when there are at least two courses.
inline nlohmann::json heatmap_json(const SimilarityMatrix& m) {
    nlohmann::json values = nlohmann::json::array();
    const auto n = m.values.rows();
    double lo = 1.0, hi = n > 1 ? -1.0 : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<double> row(static_cast<std::size_t>(n));
        for (Eigen::Index j = 0; j < n; ++j) {
            row[static_cast<std::size_t>(j)] = m.values(i, j);
            if (i != j) {
                lo = std::min(lo, m.values(i, j));
                hi = std::max(hi, m.values(i, j));
            }
        }
        values.push_back(row);
    }
    return {{"course_ids", m.course_ids},
            {"values", values},
            {"min", lo},
            {"max", hi},
            {"raw_diagonal", std::vector<double>(m.raw_diagonal.data(), m.raw_diagonal.data() + m.raw_diagonal.size())}};
}

// ---------------------------------------------------------------------------
// Attention reference kernels
// ---------------------------------------------------------------------------

/// Row-wise softmax with max subtraction.
inline MatrixXd softmax_rows(const MatrixXd& scores) {
    MatrixXd out(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        const double mx = scores.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (scores.row(i).array() - mx).exp().matrix();
        out.row(i) = e / e.sum();
    }
    return out;
}

/// softmax(QKᵀ / √d_k) V
inline MatrixXd scaled_dot_attention(const MatrixXd& Q, const MatrixXd& K, const MatrixXd& V) {
    if (Q.cols() != K.cols() || K.rows() != V.rows() || Q.cols() == 0 || Q.rows() == 0 || K.rows() == 0) {
        throw Error(ErrorCode::ShapeError, "attention: Q " + std::to_string(Q.rows()) + "x" + std::to_string(Q.cols()) + ", K " +
                                               std::to_string(K.rows()) + "x" + std::to_string(K.cols()) + ", V " +
                                               std::to_string(V.rows()) + "x" + std::to_string(V.cols()));
    }
    const MatrixXd scores = (Q * K.transpose()) / std::sqrt(static_cast<double>(K.cols()));
    return softmax_rows(scores) * V;
}

struct HeadProjection {
    MatrixXd W_Q, W_K, W_V;
};

/// Concat(head_1, …, head_h) W_O with head_i = Attention(Q W_Q, K W_K, V W_V).
inline MatrixXd multi_head(const MatrixXd& Q, const MatrixXd& K, const MatrixXd& V, const std::vector<HeadProjection>& heads,
                           const MatrixXd& W_O) {
    if (heads.empty()) throw Error(ErrorCode::ShapeError, "multi_head: no heads");
    std::vector<MatrixXd> outs;
    Eigen::Index width = 0;
    for (const auto& h : heads) {
        if (h.W_Q.rows() != Q.cols() || h.W_K.rows() != K.cols() || h.W_V.rows() != V.cols()) {
            throw Error(ErrorCode::ShapeError, "multi_head: projection input dimension mismatch");
        }
        outs.push_back(scaled_dot_attention(Q * h.W_Q, K * h.W_K, V * h.W_V));
        width += outs.back().cols();
    }
    if (width != W_O.rows()) {
        throw Error(ErrorCode::ShapeError, "multi_head: concatenated width " + std::to_string(width) + " vs W_O rows " +
                                               std::to_string(W_O.rows()));
    }
    MatrixXd concat(Q.rows(), width);
    Eigen::Index col = 0;
    for (const auto& o : outs) {
        concat.middleCols(col, o.cols()) = o;
        col += o.cols();
    }
    return concat * W_O;
}

}  // namespace edupredict::textsim
