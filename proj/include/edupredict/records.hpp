/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Academic-record ingestion: schema, cleaning, label encoding,
 *  z-score normalization and per-student sequence construction.
 */

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace edupredict::records {

struct ColumnSpec {
    std::string_view name;
    bool numeric;
};

/// The 32-column academic-record layout (Portuguese source names).
inline constexpr std::array<ColumnSpec, 32> kSchema = {{
    {"cod_curso", false},
    {"nome_curso", false},
    {"cod_hab", false},
    {"nome_hab", false},
    {"cod_enfase", false},
    {"nome_enfase", false},
    {"ano_curriculo", true},
    {"cod_curriculo", false},
    {"matricula", false},
    {"mat_ano", true},
    {"mat_sem", true},
    {"periodo", true},
    {"ano", true},
    {"semestre", true},
    {"grupos", false},
    {"disciplina", false},
    {"semestre_recomendado", true},
    {"semestre_do_aluno", true},
    {"no_creditos", true},
    {"turma", false},
    {"grau", true},
    {"sit_final", false},
    {"sit_vinculo_atual", false},
    {"nome_professor", false},
    {"cep", false},
    {"pontos_enem", true},
    {"diff", true},
    {"tentativas", true},
    {"cant", false},
    {"count", true},
    {"identificador", false},
    {"nome_disciplina", false},
}};

namespace col {
inline constexpr std::string_view kStudent = "matricula";
inline constexpr std::string_view kDegree = "cod_hab";
inline constexpr std::string_view kCourse = "disciplina";
inline constexpr std::string_view kGroup = "grupos";
inline constexpr std::string_view kSemester = "semestre";
inline constexpr std::string_view kCredits = "no_creditos";
inline constexpr std::string_view kGrade = "grau";
inline constexpr std::string_view kStatus = "sit_vinculo_atual";
inline constexpr std::string_view kIdentifier = "identificador";
}  // namespace col

inline std::optional<ColumnSpec> find_column(std::string_view name) {
    for (const auto& spec : kSchema) {
        if (spec.name == name) return spec;
    }
    return std::nullopt;
}

/// One academic record: raw cell text aligned with RecordTable::columns.
/// Numeric cells that failed to parse are stored as the empty string.
struct AcademicRecord {
    std::vector<std::string> cells;
    std::size_t line = 0;

    bool operator==(const AcademicRecord& other) const { return cells == other.cells; }
};

struct RecordTable {
    std::vector<std::string> columns;
    std::vector<AcademicRecord> rows;

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        return std::nullopt;
    }

    std::size_t index(std::string_view name) const {
        if (auto i = find(name)) return *i;
        throw Error(ErrorCode::HeaderMismatch, "no column '" + std::string(name) + "'");
    }

    const std::string& text(std::size_t row, std::string_view column) const {
        return rows.at(row).cells[index(column)];
    }

    std::optional<double> number(std::size_t row, std::string_view column) const {
        return csv::parse_double(text(row, column));
    }

    std::size_t size() const { return rows.size(); }
};

struct LoadOptions {
    char delimiter = ',';
    /// Tokens treated as missing in numeric columns, in addition to any
    /// non-numeric text.
    std::vector<std::string> missing_tokens = {"", "NA", "NULL", "null", "nan", "NaN", "-"};
};

inline RecordTable load_records(std::istream& in, const LoadOptions& opts = {}) {
    std::size_t line = 0;
    csv::Row header;
    if (!csv::read_row(in, opts.delimiter, line, header)) {
        std::string all;
        for (const auto& spec : kSchema) all += (all.empty() ? "" : ", ") + std::string(spec.name);
        throw Error(ErrorCode::HeaderMismatch, "empty file; missing columns: " + all);
    }

    std::vector<std::string> missing;
    for (const auto& spec : kSchema) {
        if (std::find(header.fields.begin(), header.fields.end(), spec.name) == header.fields.end()) {
            missing.emplace_back(spec.name);
        }
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
        throw Error(ErrorCode::HeaderMismatch, "missing columns: " + list);
    }

    RecordTable table;
    std::vector<std::size_t> source;  // schema order → header position
    std::vector<bool> numeric;
    for (const auto& spec : kSchema) {
        table.columns.emplace_back(spec.name);
        source.push_back(static_cast<std::size_t>(
            std::find(header.fields.begin(), header.fields.end(), spec.name) - header.fields.begin()));
        numeric.push_back(spec.numeric);
    }
    if (header.fields.size() > kSchema.size()) {
        warn("ignoring " + std::to_string(header.fields.size() - kSchema.size()) + " extra column(s)");
    }

    const std::size_t student = table.index(col::kStudent);
    csv::Row row;
    while (csv::read_row(in, opts.delimiter, line, row)) {
        if (row.fields.size() == 1 && row.fields[0].empty()) continue;
        if (row.fields.size() != header.fields.size()) {
            throw Error(ErrorCode::RowError, "line " + std::to_string(row.line) + ": expected " +
                                                 std::to_string(header.fields.size()) + " fields, got " +
                                                 std::to_string(row.fields.size()));
        }
        AcademicRecord rec;
        rec.line = row.line;
        rec.cells.reserve(kSchema.size());
        for (std::size_t c = 0; c < kSchema.size(); ++c) {
            std::string cell = std::move(row.fields[source[c]]);
            if (numeric[c]) {
                const bool sentinel =
                    std::find(opts.missing_tokens.begin(), opts.missing_tokens.end(), cell) != opts.missing_tokens.end();
                if (sentinel || !csv::parse_double(cell)) cell.clear();
            }
            rec.cells.push_back(std::move(cell));
        }
        if (rec.cells[student].empty()) {
            throw Error(ErrorCode::RowError, "line " + std::to_string(row.line) + ": empty student id");
        }
        table.rows.push_back(std::move(rec));
    }
    return table;
}

inline RecordTable load_records(const std::string& path, const LoadOptions& opts = {}) {
    auto in = csv::open_input(path);
    return load_records(in, opts);
}

inline void write_records(std::ostream& out, const RecordTable& table) {
    csv::write_row(out, table.columns);
    for (const auto& r : table.rows) csv::write_row(out, r.cells);
}

/// Partitions records by degree code, preserving input order within a bucket.
inline std::map<std::string, RecordTable> split_by_degree(const RecordTable& table) {
    std::map<std::string, RecordTable> buckets;
    if (table.rows.empty()) return buckets;
    const std::size_t degree = table.index(col::kDegree);
    for (const auto& r : table.rows) {
        auto& bucket = buckets[r.cells[degree]];
        if (bucket.columns.empty()) bucket.columns = table.columns;
        bucket.rows.push_back(r);
    }
    return buckets;
}

struct CleanReport {
    std::size_t duplicates_removed = 0;
    std::size_t outliers_removed = 0;
    std::vector<std::string> dropped_columns;
};

struct CleanResult {
    RecordTable table;
    CleanReport report;
};

/// Drops the redundant group column, exact duplicate rows (first occurrence
/// kept) and rows whose grade lies outside [0, 10].
inline CleanResult clean(const RecordTable& input) {
    CleanResult result;
    RecordTable& out = result.table;

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < input.columns.size(); ++c) {
        if (input.columns[c] == col::kGroup) {
            result.report.dropped_columns.push_back(input.columns[c]);
        } else {
            keep.push_back(c);
            out.columns.push_back(input.columns[c]);
        }
    }

    const auto grade = out.find(col::kGrade);
    std::set<std::vector<std::string>> seen;
    for (const auto& r : input.rows) {
        AcademicRecord rec;
        rec.line = r.line;
        rec.cells.reserve(keep.size());
        for (std::size_t c : keep) rec.cells.push_back(r.cells[c]);
        if (!seen.insert(rec.cells).second) {
            ++result.report.duplicates_removed;
            continue;
        }
        if (grade) {
            if (auto g = csv::parse_double(rec.cells[*grade]); g && (*g < 0.0 || *g > 10.0)) {
                ++result.report.outliers_removed;
                continue;
            }
        }
        out.rows.push_back(std::move(rec));
    }
    return result;
}

/// The enrolment-status vocabulary and which of its entries mean dropout.
struct StatusCatalog {
    std::vector<std::string> statuses = {
        "DESLIGADO",   "MATRICULA EM ABANDONO", "JUBILADO",   "MATRICULADO",
        "FORMADO",     "TRANCADO",              "TRANSFERIDO", "CONCLUIDO",
        "AFASTADO",    "MOBILIDADE ACADEMICA",  "REOPCAO",    "INTERCAMBIO",
    };
    std::vector<std::string> dropout = {"DESLIGADO", "MATRICULA EM ABANDONO", "JUBILADO"};
};

/// 0 for a dropout status, 1 for any other catalog status.
inline int map_dropout_status(std::string_view status, const StatusCatalog& catalog = {}) {
    if (std::find(catalog.statuses.begin(), catalog.statuses.end(), status) == catalog.statuses.end()) {
        throw Error(ErrorCode::UnknownStatus, "'" + std::string(status) + "' is not in the status catalog");
    }
    return std::find(catalog.dropout.begin(), catalog.dropout.end(), status) != catalog.dropout.end() ? 0 : 1;
}

/// Value ↔ integer mapping for one categorical column, classes sorted
/// lexicographically.
struct LabelEncoder {
    std::vector<std::string> classes;

    static LabelEncoder fit(std::vector<std::string> values) {
        std::sort(values.begin(), values.end());
        values.erase(std::unique(values.begin(), values.end()), values.end());
        return LabelEncoder{std::move(values)};
    }

    std::optional<int> encode(std::string_view value) const {
        auto it = std::lower_bound(classes.begin(), classes.end(), value);
        if (it == classes.end() || *it != value) return std::nullopt;
        return static_cast<int>(it - classes.begin());
    }

    const std::string& decode(int code) const { return classes.at(static_cast<std::size_t>(code)); }
};

using EncoderSet = std::map<std::string, LabelEncoder>;

/// Numeric table; missing cells are NaN.
struct FeatureTable {
    std::vector<std::string> column_names;
    RowMatrix values;
    std::string label_column = std::string(col::kStatus);
    std::string semester_column = std::string(col::kSemester);

    std::optional<std::size_t> find(std::string_view name) const {
        for (std::size_t i = 0; i < column_names.size(); ++i) {
            if (column_names[i] == name) return i;
        }
        return std::nullopt;
    }

    std::size_t index(std::string_view name) const {
        if (auto i = find(name)) return *i;
        throw Error(ErrorCode::HeaderMismatch, "no column '" + std::string(name) + "'");
    }

    std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
    std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }

    std::vector<int> labels() const {
        const std::size_t c = index(label_column);
        std::vector<int> out(rows());
        for (std::size_t r = 0; r < rows(); ++r) out[r] = static_cast<int>(values(static_cast<Eigen::Index>(r), c));
        return out;
    }

    std::size_t missing_count() const { return static_cast<std::size_t>(values.array().isNaN().count()); }

    FeatureTable select_rows(const std::vector<std::size_t>& which) const {
        FeatureTable out = *this;
        out.values.resize(static_cast<Eigen::Index>(which.size()), values.cols());
        for (std::size_t i = 0; i < which.size(); ++i) {
            out.values.row(static_cast<Eigen::Index>(i)) = values.row(static_cast<Eigen::Index>(which[i]));
        }
        return out;
    }
};

inline void write_feature_table(std::ostream& out, const FeatureTable& table) {
    csv::write_row(out, table.column_names);
    std::vector<std::string> fields(table.cols());
    for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
            fields[static_cast<std::size_t>(c)] = csv::format_double(table.values(r, c));
        }
        csv::write_row(out, fields);
    }
}

inline void write_feature_table(const std::string& path, const FeatureTable& table) {
    auto out = csv::open_output(path);
    write_feature_table(out, table);
}

inline FeatureTable read_feature_table(std::istream& in, char delimiter = ',') {
    auto rows = csv::read_all(in, delimiter);
    if (rows.empty()) throw Error(ErrorCode::HeaderMismatch, "feature table has no header");
    FeatureTable table;
    table.column_names = rows[0].fields;
    table.values.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(table.column_names.size()));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& f = rows[r].fields;
        if (f.size() != table.column_names.size()) {
            throw Error(ErrorCode::RowError, "line " + std::to_string(rows[r].line) + ": expected " +
                                                 std::to_string(table.column_names.size()) + " fields");
        }
        for (std::size_t c = 0; c < f.size(); ++c) {
            table.values(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(c)) =
                csv::parse_double(f[c]).value_or(kMissing);
        }
    }
    return table;
}

inline FeatureTable read_feature_table(const std::string& path, char delimiter = ',') {
    auto in = csv::open_input(path);
    return read_feature_table(in, delimiter);
}

struct EncodeResult {
    FeatureTable table;
    EncoderSet encoders;
};

/// Converts every column to numbers: categorical columns through a
/// lexicographic LabelEncoder (empty cells stay missing), the status column
/// through map_dropout_status, numeric columns parsed as-is.
inline EncodeResult encode_labels(const RecordTable& input, const StatusCatalog& catalog = {}) {
    EncodeResult result;
    FeatureTable& table = result.table;
    table.column_names = input.columns;
    const auto n_rows = static_cast<Eigen::Index>(input.rows.size());
    table.values.resize(n_rows, static_cast<Eigen::Index>(input.columns.size()));

    for (std::size_t c = 0; c < input.columns.size(); ++c) {
        const std::string& name = input.columns[c];
        const auto spec = find_column(name);
        const bool numeric = spec ? spec->numeric : false;
        const auto ci = static_cast<Eigen::Index>(c);

        if (name == col::kStatus) {
            for (Eigen::Index r = 0; r < n_rows; ++r) {
                table.values(r, ci) = map_dropout_status(input.rows[static_cast<std::size_t>(r)].cells[c], catalog);
            }
        } else if (numeric) {
            for (Eigen::Index r = 0; r < n_rows; ++r) {
                table.values(r, ci) =
                    csv::parse_double(input.rows[static_cast<std::size_t>(r)].cells[c]).value_or(kMissing);
            }
        } else {
            std::vector<std::string> values;
            for (const auto& r : input.rows) {
                if (!r.cells[c].empty()) values.push_back(r.cells[c]);
            }
            auto enc = LabelEncoder::fit(std::move(values));
            for (Eigen::Index r = 0; r < n_rows; ++r) {
                const auto& cell = input.rows[static_cast<std::size_t>(r)].cells[c];
                table.values(r, ci) = cell.empty() ? kMissing : static_cast<double>(*enc.encode(cell));
            }
            result.encoders.emplace(name, std::move(enc));
        }
    }
    return result;
}

struct ColumnStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct NormalizeResult {
    FeatureTable table;
    std::map<std::string, ColumnStats> stats;
};

/// Columns left untouched by z-scoring and excluded from the feature set.
inline std::vector<std::string> default_key_columns() {
    return {std::string(col::kStatus), std::string(col::kSemester), std::string(col::kStudent),
            std::string(col::kIdentifier)};
}

/// (x − μ)/σ per included column with population σ; σ = 0 maps to 0.
/// Missing cells are skipped and stay missing.
inline NormalizeResult zscore_normalize(const FeatureTable& input, const std::vector<std::string>& exclude) {
    NormalizeResult result{input, {}};
    for (std::size_t c = 0; c < input.cols(); ++c) {
        const std::string& name = input.column_names[c];
        if (std::find(exclude.begin(), exclude.end(), name) != exclude.end()) continue;
        auto column = result.table.values.col(static_cast<Eigen::Index>(c));
        double sum = 0.0;
        std::size_t n = 0;
        for (Eigen::Index r = 0; r < column.size(); ++r) {
            if (!is_missing(column(r))) {
                sum += column(r);
                ++n;
            }
        }
        const double mean = n ? sum / static_cast<double>(n) : 0.0;
        double ss = 0.0;
        for (Eigen::Index r = 0; r < column.size(); ++r) {
            if (!is_missing(column(r))) ss += (column(r) - mean) * (column(r) - mean);
        }
        const double sd = n ? std::sqrt(ss / static_cast<double>(n)) : 0.0;
        for (Eigen::Index r = 0; r < column.size(); ++r) {
            if (is_missing(column(r))) continue;
            column(r) = sd > 0.0 ? (column(r) - mean) / sd : 0.0;
        }
        result.stats.emplace(name, ColumnStats{mean, sd});
    }
    return result;
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

inline constexpr std::size_t kSemesters = 8;
inline constexpr std::size_t kSlotsPerSemester = 4;
inline constexpr std::size_t kSequenceLength = kSemesters * kSlotsPerSemester;

/// Fixed-length padded course history of one student. label: 0 dropout,
/// 1 enrolled.
struct StudentSequence {
    std::string student_id;
    int label = 1;
    std::vector<bool> mask;
    std::vector<std::vector<double>> steps;

    std::size_t real_steps() const { return static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true)); }
    std::size_t dim() const { return steps.empty() ? 0 : steps.front().size(); }
};

enum class OverfullPolicy { KeepHighestCredit, Reject };

struct SequenceOptions {
    std::string student_column = std::string(col::kStudent);
    std::string semester_column = std::string(col::kSemester);
    std::string course_column = std::string(col::kCourse);
    std::string credits_column = std::string(col::kCredits);
    std::string label_column = std::string(col::kStatus);
    /// Step features; empty selects every column not in default_key_columns().
    std::vector<std::string> feature_columns;
    std::size_t semesters = kSemesters;
    std::size_t slots = kSlotsPerSemester;
    OverfullPolicy overfull = OverfullPolicy::KeepHighestCredit;
};

struct SequenceBuildResult {
    std::vector<StudentSequence> sequences;
    std::size_t rows_used = 0;
    std::size_t rows_capped = 0;
    std::size_t warnings = 0;
};

inline std::vector<std::string> feature_columns(const FeatureTable& table) {
    const auto keys = default_key_columns();
    std::vector<std::string> out;
    for (const auto& name : table.column_names) {
        if (std::find(keys.begin(), keys.end(), name) == keys.end()) out.push_back(name);
    }
    return out;
}

/// Groups rows per student and semester into a packed, tail-padded sequence
/// of semesters × slots steps. Students appear in ascending id order.
/// `encoders`, when given, recovers the original student id strings.
inline SequenceBuildResult build_sequences(const FeatureTable& table, const SequenceOptions& opts = {},
                                           const EncoderSet* encoders = nullptr) {
    const std::size_t student = table.index(opts.student_column);
    const std::size_t semester = table.index(opts.semester_column);
    const std::size_t course = table.index(opts.course_column);
    const std::size_t credits = table.index(opts.credits_column);
    const std::size_t label = table.index(opts.label_column);
    const auto names = opts.feature_columns.empty() ? feature_columns(table) : opts.feature_columns;
    std::vector<std::size_t> features;
    for (const auto& n : names) features.push_back(table.index(n));

    const LabelEncoder* id_encoder = nullptr;
    if (encoders) {
        if (auto it = encoders->find(opts.student_column); it != encoders->end()) id_encoder = &it->second;
    }

    const auto& v = table.values;
    auto at = [&](std::size_t r, std::size_t c) { return v(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)); };

    std::map<double, std::map<double, std::vector<std::size_t>>> by_student;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        if (is_missing(at(r, student)) || is_missing(at(r, semester))) {
            throw Error(ErrorCode::RowError, "row " + std::to_string(r) + ": missing student or semester key");
        }
        by_student[at(r, student)][at(r, semester)].push_back(r);
    }

    const std::size_t length = opts.semesters * opts.slots;
    SequenceBuildResult result;
    for (auto& [sid, semesters] : by_student) {
        StudentSequence seq;
        if (id_encoder) {
            seq.student_id = id_encoder->decode(static_cast<int>(sid));
        } else {
            seq.student_id = csv::format_double(sid);
        }
        seq.mask.assign(length, false);
        seq.steps.assign(length, std::vector<double>(features.size(), 0.0));

        std::size_t pos = 0;
        std::size_t sem_index = 0;
        std::optional<int> seq_label;
        for (auto& [sem, rows] : semesters) {
            if (sem_index == opts.semesters) {
                result.rows_capped += rows.size();
                ++result.warnings;
                warn("student " + seq.student_id + ": semester " + csv::format_double(sem) + " beyond " +
                     std::to_string(opts.semesters) + " semesters dropped");
                continue;
            }
            ++sem_index;
            if (rows.size() > opts.slots) {
                if (opts.overfull == OverfullPolicy::Reject) {
                    throw Error(ErrorCode::OverfullSemester, "student " + seq.student_id + " has " +
                                                                 std::to_string(rows.size()) + " courses in semester " +
                                                                 csv::format_double(sem));
                }
                // Highest credits first, then course code ascending.
                std::stable_sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
                    if (at(a, credits) != at(b, credits)) return at(a, credits) > at(b, credits);
                    return at(a, course) < at(b, course);
                });
                result.rows_capped += rows.size() - opts.slots;
                ++result.warnings;
                warn("student " + seq.student_id + ": " + std::to_string(rows.size()) + " courses in semester " +
                     csv::format_double(sem) + ", keeping " + std::to_string(opts.slots));
                rows.resize(opts.slots);
            }
            std::stable_sort(rows.begin(), rows.end(),
                             [&](std::size_t a, std::size_t b) { return at(a, course) < at(b, course); });
            for (std::size_t r : rows) {
                for (std::size_t f = 0; f < features.size(); ++f) {
                    const double x = at(r, features[f]);
                    seq.steps[pos][f] = is_missing(x) ? 0.0 : x;
                }
                seq.mask[pos] = true;
                ++pos;
                const int row_label = static_cast<int>(at(r, label));
                if (seq_label && *seq_label != row_label) {
                    ++result.warnings;
                    warn("student " + seq.student_id + ": inconsistent status across rows, using latest");
                }
                seq_label = row_label;
            }
        }
        seq.label = seq_label.value_or(1);
        result.rows_used += pos;
        result.sequences.push_back(std::move(seq));
    }
    return result;
}

inline nlohmann::json to_json(const StudentSequence& seq) {
    return nlohmann::json{{"student_id", seq.student_id}, {"label", seq.label}, {"mask", seq.mask}, {"steps", seq.steps}};
}

inline StudentSequence sequence_from_json(const nlohmann::json& j) {
    StudentSequence seq;
    seq.student_id = j.at("student_id").get<std::string>();
    seq.label = j.at("label").get<int>();
    seq.mask = j.at("mask").get<std::vector<bool>>();
    seq.steps = j.at("steps").get<std::vector<std::vector<double>>>();
    if (seq.mask.size() != seq.steps.size()) {
        throw Error(ErrorCode::ShapeError, "student " + seq.student_id + ": mask and steps lengths differ");
    }
    return seq;
}

inline void write_sequences(std::ostream& out, const std::vector<StudentSequence>& seqs) {
    for (const auto& s : seqs) out << to_json(s).dump() << '\n';
}

inline void write_sequences(const std::string& path, const std::vector<StudentSequence>& seqs) {
    auto out = csv::open_output(path);
    write_sequences(out, seqs);
}

inline std::vector<StudentSequence> read_sequences(const std::string& path) {
    auto in = csv::open_input(path);
    std::vector<StudentSequence> seqs;
    std::string line;
    std::size_t number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (line.empty()) continue;
        try {
            seqs.push_back(sequence_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::MalformedLine, path + ":" + std::to_string(number) + ": " + e.what());
        }
    }
    return seqs;
}

inline nlohmann::json encoders_to_json(const EncoderSet& encoders) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [name, enc] : encoders) j[name] = enc.classes;
    return j;
}

inline EncoderSet encoders_from_json(const nlohmann::json& j) {
    EncoderSet out;
    for (auto it = j.begin(); it != j.end(); ++it) {
        out.emplace(it.key(), LabelEncoder{it.value().get<std::vector<std::string>>()});
    }
    return out;
}

}  // namespace edupredict::records
