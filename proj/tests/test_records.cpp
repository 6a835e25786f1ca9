/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#include "edupredict/records.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <cstring>
#include <sstream>

using namespace edupredict;
using namespace edupredict::records;
using edupredict::test_support::load_text;
using edupredict::test_support::record_row;
using edupredict::test_support::records_csv;

namespace {

template <typename F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::NoProgress;
}

FeatureTable single_column(const std::string& name, std::vector<double> values) {
    FeatureTable t;
    t.column_names = {name};
    t.values.resize(static_cast<Eigen::Index>(values.size()), 1);
    for (std::size_t i = 0; i < values.size(); ++i) t.values(static_cast<Eigen::Index>(i), 0) = values[i];
    return t;
}

/// Feature table with the key columns used by build_sequences plus one
/// feature column holding the row's credits.
struct SequenceFixture {
    std::vector<std::array<double, 5>> rows;  // student, semester, course, credits, label

    void add(double student, double semester, double course, double credits, double label = 1) {
        rows.push_back({student, semester, course, credits, label});
    }

    FeatureTable table() const {
        FeatureTable t;
        t.column_names = {"matricula", "semestre", "disciplina", "no_creditos", "sit_vinculo_atual"};
        t.values.resize(static_cast<Eigen::Index>(rows.size()), 5);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < 5; ++c) t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
        }
        return t;
    }
};

}  // namespace

TEST(LoadRecords, ThreeRowsGiveThreeRecords) {
    const auto t = load_text(records_csv({record_row(), record_row({{"matricula", "S2"}}), record_row({{"matricula", "S3"}})}));
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.columns.size(), 32u);
    EXPECT_EQ(t.text(1, "matricula"), "S2");
}

TEST(LoadRecords, OutOfRangeGradeIsKept) {
    const auto t = load_text(records_csv({record_row({{"grau", "11.0"}})}));
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(*t.number(0, "grau"), 11.0);
}

TEST(LoadRecords, UnparseableNumericBecomesMissing) {
    const auto t = load_text(records_csv({record_row({{"grau", "abc"}, {"pontos_enem", "NA"}})}));
    EXPECT_FALSE(t.number(0, "grau"));
    EXPECT_FALSE(t.number(0, "pontos_enem"));
}

TEST(LoadRecords, MissingColumnsAreNamed) {
    std::ostringstream out;
    std::vector<std::string> header, cells = record_row();
    std::vector<std::string> kept_cells;
    for (std::size_t i = 0; i < kSchema.size(); ++i) {
        if (kSchema[i].name == "cep" || kSchema[i].name == "turma") continue;
        header.emplace_back(kSchema[i].name);
        kept_cells.push_back(cells[i]);
    }
    csv::write_row(out, header);
    csv::write_row(out, kept_cells);
    try {
        load_text(out.str());
        FAIL() << "expected HeaderMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::HeaderMismatch);
        const std::string msg = e.what();
        EXPECT_NE(msg.find("turma"), std::string::npos);
        EXPECT_NE(msg.find("cep"), std::string::npos);
    }
}

TEST(LoadRecords, BrokenRowReportsLine) {
    std::string text = records_csv({record_row()});
    text += "only,three,fields\n";
    try {
        load_text(text);
        FAIL() << "expected RowError";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::RowError);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
}

TEST(LoadRecords, MissingFile) {
    EXPECT_EQ(code_of([] { load_records(std::string("/no/such/records.csv")); }), ErrorCode::MissingFile);
}

TEST(LoadRecords, ColumnOrderIsIrrelevant) {
    std::vector<std::string> header;
    for (const auto& s : kSchema) header.emplace_back(s.name);
    auto cells = record_row({{"matricula", "S9"}});
    std::reverse(header.begin(), header.end());
    std::reverse(cells.begin(), cells.end());
    std::ostringstream out;
    csv::write_row(out, header);
    csv::write_row(out, cells);
    const auto t = load_text(out.str());
    EXPECT_EQ(t.text(0, "matricula"), "S9");
}

TEST(SplitByDegree, PartitionsByDegreeCode) {
    const auto t = load_text(records_csv({record_row({{"cod_hab", "A"}, {"matricula", "1"}}),
                                          record_row({{"cod_hab", "A"}, {"matricula", "2"}}),
                                          record_row({{"cod_hab", "B"}, {"matricula", "3"}})}));
    const auto buckets = split_by_degree(t);
    ASSERT_EQ(buckets.size(), 2u);
    EXPECT_EQ(buckets.at("A").size(), 2u);
    EXPECT_EQ(buckets.at("B").size(), 1u);
    EXPECT_EQ(buckets.at("B").text(0, "matricula"), "3");
}

TEST(SplitByDegree, EmptyAndSingle) {
    EXPECT_TRUE(split_by_degree(RecordTable{}).empty());
    const auto t = load_text(records_csv({record_row(), record_row({{"matricula", "S2"}})}));
    const auto buckets = split_by_degree(t);
    ASSERT_EQ(buckets.size(), 1u);
    EXPECT_EQ(buckets.begin()->second.size(), 2u);
}

TEST(Clean, DuplicatesAndOutliers) {
    const auto t = load_text(records_csv({record_row(), record_row(), record_row({{"matricula", "S2"}, {"grau", "10.5"}})}));
    const auto r = clean(t);
    EXPECT_EQ(r.table.size(), 1u);
    EXPECT_EQ(r.report.duplicates_removed, 1u);
    EXPECT_EQ(r.report.outliers_removed, 1u);
    EXPECT_FALSE(r.table.find("grupos"));
}

TEST(Clean, AlreadyCleanInputIsUnchangedAndIdempotent) {
    const auto t = load_text(records_csv({record_row(), record_row({{"matricula", "S2"}, {"grau", "0"}}),
                                          record_row({{"matricula", "S3"}, {"grau", "10"}})}));
    const auto once = clean(t);
    EXPECT_EQ(once.table.size(), 3u);
    EXPECT_EQ(once.report.duplicates_removed, 0u);
    EXPECT_EQ(once.report.outliers_removed, 0u);
    const auto twice = clean(once.table);
    EXPECT_EQ(twice.table.columns, once.table.columns);
    EXPECT_EQ(twice.table.rows, once.table.rows);
    EXPECT_EQ(twice.report.duplicates_removed, 0u);
    EXPECT_EQ(twice.report.outliers_removed, 0u);
}

TEST(DropoutStatus, CatalogMapping) {
    const StatusCatalog catalog;
    EXPECT_EQ(catalog.statuses.size(), 12u);
    EXPECT_EQ(map_dropout_status("DESLIGADO"), 0);
    EXPECT_EQ(map_dropout_status("MATRICULA EM ABANDONO"), 0);
    EXPECT_EQ(map_dropout_status("JUBILADO"), 0);
    for (const auto& s : catalog.statuses) {
        const bool dropout = s == "DESLIGADO" || s == "MATRICULA EM ABANDONO" || s == "JUBILADO";
        EXPECT_EQ(map_dropout_status(s), dropout ? 0 : 1) << s;
    }
    EXPECT_EQ(code_of([] { map_dropout_status("GRADUATED?"); }), ErrorCode::UnknownStatus);
}

TEST(EncodeLabels, LexicographicCodes) {
    const auto t = load_text(records_csv({record_row({{"turma", "b"}, {"cep", "z"}}),
                                          record_row({{"turma", "a"}, {"matricula", "S2"}, {"cep", "z"}}),
                                          record_row({{"turma", "b"}, {"matricula", "S3"}, {"cep", "z"}})}));
    const auto enc = encode_labels(t);
    EXPECT_EQ(enc.encoders.at("turma").classes, (std::vector<std::string>{"a", "b"}));
    const auto c = static_cast<Eigen::Index>(enc.table.index("turma"));
    EXPECT_EQ(enc.table.values(0, c), 1.0);
    EXPECT_EQ(enc.table.values(1, c), 0.0);
    EXPECT_EQ(enc.table.values(2, c), 1.0);
    const auto cep = static_cast<Eigen::Index>(enc.table.index("cep"));
    for (Eigen::Index r = 0; r < 3; ++r) EXPECT_EQ(enc.table.values(r, cep), 0.0);
}

TEST(EncodeLabels, NumericPassThroughAndStatus) {
    const auto t = load_text(records_csv({record_row({{"grau", "6.25"}, {"sit_vinculo_atual", "JUBILADO"}})}));
    const auto enc = encode_labels(t);
    EXPECT_EQ(enc.table.values(0, static_cast<Eigen::Index>(enc.table.index("grau"))), 6.25);
    EXPECT_EQ(enc.table.labels(), std::vector<int>{0});
}

TEST(EncodeLabels, RoundTripsThroughInverseMapping) {
    const auto t = load_text(records_csv({record_row({{"nome_professor", "Ana"}}),
                                          record_row({{"nome_professor", "Bruno"}, {"matricula", "S2"}}),
                                          record_row({{"nome_professor", "Ana"}, {"matricula", "S3"}})}));
    const auto enc = encode_labels(t);
    const auto json = encoders_to_json(enc.encoders);
    const auto restored = encoders_from_json(json);
    for (const auto& [name, e] : restored) {
        const auto c = t.index(name);
        for (std::size_t r = 0; r < t.size(); ++r) {
            const double code = enc.table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
            if (t.rows[r].cells[c].empty()) {
                EXPECT_TRUE(is_missing(code));
            } else {
                EXPECT_EQ(e.decode(static_cast<int>(code)), t.rows[r].cells[c]);
            }
        }
    }
}

TEST(Zscore, HandExample) {
    const auto r = zscore_normalize(single_column("x", {1, 2, 3}), {});
    EXPECT_NEAR(r.table.values(0, 0), -1.2247, 1e-4);
    EXPECT_NEAR(r.table.values(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(r.table.values(2, 0), 1.2247, 1e-4);
    EXPECT_NEAR(r.stats.at("x").mean, 2.0, 1e-12);
    EXPECT_NEAR(r.stats.at("x").stddev, 0.8165, 1e-4);
}

TEST(Zscore, ConstantColumnMapsToZero) {
    const auto r = zscore_normalize(single_column("x", {5, 5}), {});
    EXPECT_EQ(r.table.values(0, 0), 0.0);
    EXPECT_EQ(r.table.values(1, 0), 0.0);
}

TEST(Zscore, ExcludedColumnIsBitwiseIdentical) {
    FeatureTable t;
    t.column_names = {"keep", "norm"};
    t.values.resize(3, 2);
    t.values << 0.1, 1, 0.7, 4, 1e-17, 9;
    const auto r = zscore_normalize(t, {"keep"});
    for (Eigen::Index i = 0; i < 3; ++i) EXPECT_EQ(std::memcmp(&r.table.values(i, 0), &t.values(i, 0), sizeof(double)), 0);
    EXPECT_EQ(r.stats.count("keep"), 0u);
}

TEST(Zscore, OutputHasZeroMeanUnitVariance) {
    Rng rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> v(37);
        for (auto& x : v) x = rng.normal(3.0, 7.0);
        const auto r = zscore_normalize(single_column("x", v), {});
        const auto col = r.table.values.col(0);
        const double mean = col.mean();
        const double sd = std::sqrt((col.array() - mean).square().mean());
        EXPECT_LT(std::abs(mean), 1e-9);
        EXPECT_LT(std::abs(sd - 1.0), 1e-9);
    }
}

TEST(BuildSequences, FullStudentHasAllMaskTrue) {
    SequenceFixture f;
    for (int s = 1; s <= 8; ++s) {
        for (int k = 0; k < 4; ++k) f.add(0, s, s * 10 + k, 4);
    }
    const auto r = build_sequences(f.table());
    ASSERT_EQ(r.sequences.size(), 1u);
    const auto& seq = r.sequences[0];
    EXPECT_EQ(seq.mask.size(), kSequenceLength);
    EXPECT_EQ(seq.real_steps(), 32u);
    EXPECT_EQ(r.rows_used, 32u);
}

TEST(BuildSequences, ShortStudentIsTailPadded) {
    SequenceFixture f;
    for (int k = 0; k < 6; ++k) f.add(3, 1 + k / 4, k, 2 + k);
    const auto r = build_sequences(f.table());
    ASSERT_EQ(r.sequences.size(), 1u);
    const auto& seq = r.sequences[0];
    for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(seq.mask[i], i < 6) << i;
    for (std::size_t i = 6; i < 32; ++i) {
        for (double x : seq.steps[i]) EXPECT_EQ(x, 0.0);
    }
    // Features exclude key columns: the remaining ones are course and credits.
    EXPECT_EQ(seq.dim(), 2u);
}

TEST(BuildSequences, OverfullSemesterKeepsHighestCredit) {
    SequenceFixture f;
    f.add(1, 1, 105, 2);
    f.add(1, 1, 104, 6);
    f.add(1, 1, 103, 4);
    f.add(1, 1, 102, 4);
    f.add(1, 1, 101, 2);
    const auto r = build_sequences(f.table());
    EXPECT_EQ(r.rows_capped, 1u);
    EXPECT_GE(r.warnings, 1u);
    const auto& seq = r.sequences[0];
    ASSERT_EQ(seq.real_steps(), 4u);
    // Kept: credits 6, 4, 4, then the tie at 2 goes to the lower course code.
    std::vector<double> courses;
    for (std::size_t i = 0; i < 4; ++i) courses.push_back(seq.steps[i][0]);
    EXPECT_EQ(courses, (std::vector<double>{101, 102, 103, 104}));

    SequenceOptions strict;
    strict.overfull = OverfullPolicy::Reject;
    EXPECT_EQ(code_of([&] { build_sequences(f.table(), strict); }), ErrorCode::OverfullSemester);
}

TEST(BuildSequences, MaskCountEqualsSurvivingRows) {
    Rng rng(21);
    SequenceFixture f;
    for (int s = 0; s < 40; ++s) {
        const int semesters = 1 + static_cast<int>(rng.index(10));
        for (int sem = 1; sem <= semesters; ++sem) {
            const int courses = 1 + static_cast<int>(rng.index(6));
            for (int k = 0; k < courses; ++k) f.add(s, sem, sem * 100 + k, static_cast<double>(rng.index(5)), s % 3 ? 1 : 0);
        }
    }
    const auto r = build_sequences(f.table());
    std::size_t total = 0;
    for (const auto& seq : r.sequences) {
        total += seq.real_steps();
        EXPECT_EQ(seq.label, static_cast<int>(std::stod(seq.student_id)) % 3 ? 1 : 0);
        // Real steps form a prefix.
        const auto first_pad = std::find(seq.mask.begin(), seq.mask.end(), false);
        EXPECT_TRUE(std::find(first_pad, seq.mask.end(), true) == seq.mask.end());
    }
    EXPECT_EQ(total, r.rows_used);
    EXPECT_EQ(r.rows_used + r.rows_capped, f.rows.size());
}

TEST(BuildSequences, EncoderRecoversStudentIds) {
    SequenceFixture f;
    f.add(0, 1, 1, 1);
    f.add(1, 1, 1, 1, 0);
    EncoderSet enc;
    enc["matricula"] = LabelEncoder::fit({"alice", "bob"});
    const auto r = build_sequences(f.table(), {}, &enc);
    ASSERT_EQ(r.sequences.size(), 2u);
    EXPECT_EQ(r.sequences[0].student_id, "alice");
    EXPECT_EQ(r.sequences[1].student_id, "bob");
    EXPECT_EQ(r.sequences[1].label, 0);
}

TEST(Sequences, JsonLinesRoundTrip) {
    SequenceFixture f;
    for (int k = 0; k < 7; ++k) f.add(k % 2, 1 + k / 4, k, 0.25 * k);
    const auto seqs = build_sequences(f.table()).sequences;
    edupredict::test_support::ScratchDir dir("seq");
    write_sequences(dir.file("s.jsonl"), seqs);
    const auto back = read_sequences(dir.file("s.jsonl"));
    ASSERT_EQ(back.size(), seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        EXPECT_EQ(back[i].student_id, seqs[i].student_id);
        EXPECT_EQ(back[i].label, seqs[i].label);
        EXPECT_EQ(back[i].mask, seqs[i].mask);
        EXPECT_EQ(back[i].steps, seqs[i].steps);
    }
}

TEST(FeatureTableIo, CsvRoundTripPreservesMissing) {
    FeatureTable t;
    t.column_names = {"a", "b"};
    t.values.resize(2, 2);
    t.values << 0.1, kMissing, -3.5, 1e-9;
    std::stringstream s;
    write_feature_table(s, t);
    const auto back = read_feature_table(s);
    EXPECT_EQ(back.column_names, t.column_names);
    EXPECT_EQ(back.values(0, 0), 0.1);
    EXPECT_TRUE(is_missing(back.values(0, 1)));
    EXPECT_EQ(back.values(1, 1), 1e-9);
}
