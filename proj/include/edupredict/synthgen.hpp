/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Synthetic academic-record generator with a known dropout rule.
 *
 *  Each student draws a latent ability a ~ N(6, 1.5) clipped to [0, 10];
 *  every grade is a + N(0, σ_g) clipped to [0, 10]. A student drops out when
 *  the mean grade of their final semester falls below the threshold θ, after
 *  which a small fraction of labels is flipped. When θ is not given it is
 *  placed at the class_balance quantile of the final-semester means, so the
 *  dropout share before flipping matches class_balance.
 */

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"
#include "edupredict/records.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace edupredict::synthgen {

struct GeneratorConfig {
    std::size_t n_students = 1000;
    std::size_t n_semesters = records::kSemesters;
    std::size_t courses_per_semester = records::kSlotsPerSemester;
    /// Dropout threshold on the final-semester mean grade; NaN derives it
    /// from class_balance.
    double threshold = kMissing;
    double grade_noise = 0.5;
    double flip_noise = 0.02;
    double missing_rate = 0.0;
    /// Target share of dropout students.
    double class_balance = 0.3;
    /// Share of students observed for fewer than n_semesters semesters.
    double short_fraction = 0.1;
    std::vector<std::string> degrees = {"ADM", "ARQ", "CSI"};
    std::uint64_t rng_seed = 0;

    void validate() const {
        auto rate = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!rate(flip_noise) || !rate(missing_rate) || !rate(class_balance) || !rate(short_fraction)) {
            throw Error(ErrorCode::InvalidConfig, "generator: rates must lie in [0, 1]");
        }
        if (!is_missing(threshold) && !(threshold > 0.0 && threshold < 10.0)) {
            throw Error(ErrorCode::InvalidConfig, "generator: threshold must lie in (0, 10)");
        }
        if (n_semesters < 1 || courses_per_semester < 1 || !(grade_noise >= 0.0) || degrees.empty()) {
            throw Error(ErrorCode::InvalidConfig, "generator: n_semesters, courses_per_semester >= 1, grade_noise >= 0, degrees non-empty");
        }
    }
};

struct StudentTruth {
    std::string student_id;
    double ability = 0.0;
    std::size_t semesters = 0;
    double final_semester_mean = 0.0;
    bool dropout = false;
    bool flipped = false;
};

struct GeneratedData {
    records::RecordTable table;
    std::vector<StudentTruth> truth;
    double threshold = 0.0;

    double dropout_fraction() const {
        if (truth.empty()) return 0.0;
        const auto d = std::count_if(truth.begin(), truth.end(), [](const StudentTruth& t) { return t.dropout; });
        return static_cast<double>(d) / static_cast<double>(truth.size());
    }
};

namespace detail {

inline std::string padded(const char* prefix, std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
    return buf;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace detail

inline GeneratedData generate(const GeneratorConfig& cfg) {
    cfg.validate();
    Rng rng(derive_seed(cfg.rng_seed, "synthgen"));
    Rng missing_rng(derive_seed(cfg.rng_seed, "synthgen.missing"));
    const records::StatusCatalog catalog;
    std::vector<std::string> stay;
    for (const auto& s : catalog.statuses) {
        if (std::find(catalog.dropout.begin(), catalog.dropout.end(), s) == catalog.dropout.end()) stay.push_back(s);
    }

    GeneratedData out;
    for (const auto& spec : records::kSchema) out.table.columns.emplace_back(spec.name);
    auto column = [&](std::string_view name) { return out.table.index(name); };

    struct Draft {
        std::vector<std::vector<double>> grades;  // [semester][slot]
        std::size_t degree = 0;
        std::size_t entry_year = 0;
        std::size_t entry_term = 1;
        double enem = 0.0;
    };
    std::vector<Draft> drafts(cfg.n_students);

    for (std::size_t s = 0; s < cfg.n_students; ++s) {
        StudentTruth t;
        t.student_id = detail::padded("S", s + 1, 6);
        t.ability = std::clamp(rng.normal(6.0, 1.5), 0.0, 10.0);
        t.semesters = cfg.n_semesters;
        if (cfg.n_semesters > 1 && rng.bernoulli(cfg.short_fraction)) t.semesters = 1 + rng.index(cfg.n_semesters - 1);
        Draft& d = drafts[s];
        d.degree = s % cfg.degrees.size();
        d.entry_year = 2012 + rng.index(5);
        d.entry_term = 1 + rng.index(2);
        d.enem = detail::round2(std::clamp(450.0 + 25.0 * t.ability + rng.normal(0.0, 40.0), 0.0, 1000.0));
        d.grades.resize(t.semesters);
        for (auto& sem : d.grades) {
            sem.resize(cfg.courses_per_semester);
            for (auto& g : sem) g = detail::round2(std::clamp(t.ability + rng.normal(0.0, cfg.grade_noise), 0.0, 10.0));
        }
        const auto& last = d.grades.back();
        double sum = 0.0;
        for (double g : last) sum += g;
        t.final_semester_mean = sum / static_cast<double>(last.size());
        out.truth.push_back(std::move(t));
    }

    if (is_missing(cfg.threshold)) {
        std::vector<double> means;
        for (const auto& t : out.truth) means.push_back(t.final_semester_mean);
        std::sort(means.begin(), means.end());
        const auto k = static_cast<std::size_t>(std::llround(cfg.class_balance * static_cast<double>(means.size())));
        if (means.empty()) {
            out.threshold = 5.0;
        } else if (k == 0) {
            out.threshold = std::max(means.front() - 1e-6, 1e-6);
        } else if (k >= means.size()) {
            out.threshold = means.back() + 1e-6;
        } else {
            out.threshold = 0.5 * (means[k - 1] + means[k]);
        }
    } else {
        out.threshold = cfg.threshold;
    }

    for (auto& t : out.truth) {
        t.dropout = t.final_semester_mean < out.threshold;
        if (rng.bernoulli(cfg.flip_noise)) {
            t.dropout = !t.dropout;
            t.flipped = true;
        }
    }

    const std::vector<std::string> maskable = {"ano_curriculo", "mat_ano", "mat_sem", "periodo", "ano",
                                               "semestre_recomendado", "semestre_do_aluno", "grau", "pontos_enem", "diff",
                                               "tentativas", "count", "turma", "cep", "nome_professor"};
    std::vector<std::size_t> maskable_idx;
    for (const auto& m : maskable) maskable_idx.push_back(column(m));

    std::size_t row_id = 0;
    for (std::size_t s = 0; s < cfg.n_students; ++s) {
        const StudentTruth& t = out.truth[s];
        const Draft& d = drafts[s];
        const std::string& degree = cfg.degrees[d.degree];
        const std::string status =
            t.dropout ? catalog.dropout[rng.index(catalog.dropout.size())] : stay[rng.index(stay.size())];
        const std::string cep = detail::padded("", 10000000 + rng.index(89999999), 8);
        const std::size_t total_courses = t.semesters * cfg.courses_per_semester;
        for (std::size_t sem = 0; sem < t.semesters; ++sem) {
            const std::size_t term_index = (d.entry_term - 1) + sem;
            const std::size_t year = d.entry_year + term_index / 2;
            const std::size_t term = term_index % 2 + 1;
            for (std::size_t slot = 0; slot < cfg.courses_per_semester; ++slot) {
                const double grade = d.grades[sem][slot];
                const std::string course = degree + detail::padded("", (sem + 1) * 100 + slot + 1, 4);
                std::vector<std::string> cells(out.table.columns.size());
                auto set = [&](std::string_view name, std::string value) { cells[column(name)] = std::move(value); };
                auto setn = [&](std::string_view name, double value) { cells[column(name)] = csv::format_double(value); };
                set("cod_curso", "C" + degree);
                set("nome_curso", "Curso " + degree);
                set("cod_hab", degree);
                set("nome_hab", "Habilitacao " + degree);
                set("cod_enfase", "E0");
                set("nome_enfase", "Geral");
                setn("ano_curriculo", 2010);
                set("cod_curriculo", degree + "-2010");
                set("matricula", t.student_id);
                setn("mat_ano", static_cast<double>(d.entry_year));
                setn("mat_sem", static_cast<double>(d.entry_term));
                setn("periodo", static_cast<double>(year * 10 + term));
                setn("ano", static_cast<double>(year));
                setn("semestre", static_cast<double>(sem + 1));
                set("grupos", course);
                set("disciplina", course);
                setn("semestre_recomendado", static_cast<double>(sem + 1));
                setn("semestre_do_aluno", static_cast<double>(sem + 1));
                setn("no_creditos", static_cast<double>(2 + 2 * ((sem + slot) % 3)));
                set("turma", "T" + std::to_string(1 + rng.index(3)));
                setn("grau", grade);
                set("sit_final", grade >= 5.0 ? "APROVADO" : "REPROVADO");
                set("sit_vinculo_atual", status);
                set("nome_professor", "Professor " + std::to_string(1 + rng.index(20)));
                set("cep", cep);
                setn("pontos_enem", d.enem);
                setn("diff", detail::round2(grade - 5.0));
                setn("tentativas", grade >= 5.0 ? 1.0 : static_cast<double>(1 + rng.index(2)));
                set("cant", rng.bernoulli(0.5) ? "S" : "N");
                setn("count", static_cast<double>(total_courses));
                set("identificador", detail::padded("R", ++row_id, 8));
                set("nome_disciplina", "Disciplina " + course);
                if (cfg.missing_rate > 0.0) {
                    for (std::size_t c : maskable_idx) {
                        if (missing_rng.bernoulli(cfg.missing_rate)) cells[c].clear();
                    }
                }
                out.table.rows.push_back({std::move(cells), row_id + 1});
            }
        }
    }
    return out;
}

inline nlohmann::json config_to_json(const GeneratorConfig& c) {
    return {{"n_students", c.n_students},
            {"n_semesters", c.n_semesters},
            {"courses_per_semester", c.courses_per_semester},
            {"threshold", is_missing(c.threshold) ? nlohmann::json(nullptr) : nlohmann::json(c.threshold)},
            {"grade_noise", c.grade_noise},
            {"flip_noise", c.flip_noise},
            {"missing_rate", c.missing_rate},
            {"class_balance", c.class_balance},
            {"short_fraction", c.short_fraction},
            {"degrees", c.degrees},
            {"rng_seed", c.rng_seed}};
}

/// Sidecar ground truth: resolved threshold plus one entry per student.
/// "label" follows the records convention (0 dropout, 1 enrolled).
inline nlohmann::json truth_json(const GeneratedData& data, const GeneratorConfig& cfg) {
    nlohmann::json students = nlohmann::json::array();
    for (const auto& t : data.truth) {
        students.push_back({{"student_id", t.student_id},
                            {"ability", t.ability},
                            {"semesters", t.semesters},
                            {"final_semester_mean", t.final_semester_mean},
                            {"dropout", t.dropout},
                            {"flipped", t.flipped},
                            {"label", t.dropout ? 0 : 1}});
    }
    return {{"config", config_to_json(cfg)},
            {"threshold", data.threshold},
            {"dropout_fraction", data.dropout_fraction()},
            {"students", students}};
}

}  // namespace edupredict::synthgen
