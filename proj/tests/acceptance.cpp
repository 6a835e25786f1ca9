/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */

// Standalone acceptance runner: one PASS/FAIL line per criterion, nonzero
// exit status when any criterion fails.

#include "edupredict/balance.hpp"
#include "edupredict/cli.hpp"
#include "edupredict/ga_select.hpp"
#include "edupredict/lstm_net.hpp"
#include "edupredict/metrics.hpp"
#include "edupredict/prereq.hpp"
#include "edupredict/svm.hpp"
#include "edupredict/textsim.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"
#include "support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

using namespace edupredict;
namespace ts = edupredict::test_support;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) { return std::chrono::duration<double>(Clock::now() - start).count(); }

struct Outcome {
    bool pass = false;
    std::string detail;
};

Outcome gradient_oracle() {
    const auto start = Clock::now();
    double worst = 0.0;
    std::string where;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto r = ts::check_gradients(ts::toy_config(seed));
        if (r.worst_relative_error > worst) {
            worst = r.worst_relative_error;
            where = r.worst_tensor;
        }
    }
    const double t = seconds_since(start);
    std::ostringstream s;
    s << "100 nets, worst relative error " << worst << " (" << where << "), " << t << " s";
    return {worst < 1e-4 && t < 60.0, s.str()};
}

Outcome metrics_exactness() {
    const auto r = metrics::report({50, 30, 10, 10});
    const bool ok = std::abs(r.accuracy - 0.8) < 1e-4 && std::abs(r.precision - 0.8333) < 1e-4 && std::abs(r.recall - 0.8333) < 1e-4 &&
                    std::abs(r.f1 - 0.8333) < 1e-4;
    std::ostringstream s;
    s << "acc " << r.accuracy << ", precision " << r.precision << ", recall " << r.recall << ", f1 " << r.f1;
    return {ok, s.str()};
}

std::vector<std::string> pipeline_args(const std::filesystem::path& dir) {
    return {"edupredict",          "pipeline",           "out_dir=" + dir.string(), "seed=7",
            "gen.n_students=2000", "gen.grade_noise=0.5", "gen.flip_noise=0.02",     "gen.missing_rate=0.01",
            "ga.population=40",    "ga.generations=15",  "lstm.epochs=30"};
}

int run_pipeline(const std::filesystem::path& dir) {
    const auto args = pipeline_args(dir);
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
}

Outcome end_to_end() {
    ts::ScratchDir first("acceptance_pipeline_a");
    ts::ScratchDir second("acceptance_pipeline_b");
    const auto start = Clock::now();
    const int rc = run_pipeline(first.path());
    const double t = seconds_since(start);
    if (rc != 0) return {false, "pipeline exited with " + std::to_string(rc)};
    const int rc2 = run_pipeline(second.path());
    bool identical = rc2 == 0;
    for (const char* name : {"selection.json", "model.json", "metrics.json", "predictions.csv"}) {
        identical = identical && ts::slurp(first.file(name)) == ts::slurp(second.file(name));
    }
    const auto m = nlohmann::json::parse(ts::slurp(first.file("metrics.json")));
    const double acc = m.at("accuracy").get<double>();
    std::ostringstream s;
    s << "test accuracy " << acc << ", " << t << " s per run, rerun " << (identical ? "identical" : "DIFFERS");
    return {acc >= 0.90 && t < 600.0 && identical, s.str()};
}

Outcome ga_leak() {
    std::size_t found = 0;
    bool monotone = true;
    for (std::uint64_t run = 0; run < 20; ++run) {
        const std::size_t leak = run % 10;
        const auto d = ts::label_leak(150, 10, leak, 100 + run);
        ga::GaConfig cfg;
        cfg.population_size = 16;
        cfg.generations = 6;
        cfg.rng_seed = run;
        const auto r = ga::evolve(d.X, d.y, cfg);
        found += r.best.bits[leak] ? 1 : 0;
        for (std::size_t g = 1; g < r.history.size(); ++g) monotone = monotone && r.history[g].best_ever >= r.history[g - 1].best_ever;
    }
    std::ostringstream s;
    s << "leak selected in " << found << "/20 runs, best-ever " << (monotone ? "non-decreasing" : "DECREASED");
    return {found >= 19 && monotone, s.str()};
}

Outcome svm_checks() {
    const auto d = ts::separable_square();
    const auto h = svm::train(d.X, d.y);
    std::size_t correct = 0;
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) correct += svm::predict(h, d.X.row(i)) == d.y[static_cast<std::size_t>(i)];
    bool covered = true;
    Rng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 10 + rng.index(200);
        std::vector<int> y(n);
        for (auto& v : y) v = rng.bernoulli(0.3) ? 1 : -1;
        const auto folds = svm::stratified_folds(y, 5, static_cast<std::uint64_t>(trial));
        std::vector<int> seen(n, 0);
        for (const auto& f : folds) {
            for (auto i : f) ++seen[i];
        }
        covered = covered && folds.size() == 5 && std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; });
    }
    std::ostringstream s;
    s << "train accuracy " << correct << "/" << d.X.rows() << ", 5-fold coverage " << (covered ? "exact" : "BROKEN");
    return {correct == static_cast<std::size_t>(d.X.rows()) && covered, s.str()};
}

Outcome refd_oracle() {
    Rng rng(50);
    std::size_t pairs = 0, mismatches = 0;
    double worst_skew = 0.0;
    for (int graph = 0; graph < 50; ++graph) {
        const auto g = ts::random_graph(rng, 10);
        const auto kg = g.build();
        for (const auto& a : g.concepts()) {
            for (const auto& b : g.concepts()) {
                const auto expected = ts::brute_force_refd(g, a, b, false);
                double got = 0.0;
                bool threw = false;
                try {
                    got = prereq::refd(kg, a, b);
                } catch (const Error&) {
                    threw = true;
                }
                if (threw != !expected.has_value() || (expected && got != *expected)) {
                    ++mismatches;
                    continue;
                }
                if (!expected) continue;
                worst_skew = std::max(worst_skew, std::abs(got + prereq::refd(kg, b, a)));
                ++pairs;
            }
        }
    }
    std::ostringstream s;
    s << pairs << " defined pairs on 50 graphs, " << mismatches << " mismatches, worst antisymmetry " << worst_skew;
    return {mismatches == 0 && worst_skew <= 1e-12 && pairs > 0, s.str()};
}

Outcome similarity_invariants() {
    Rng rng(20);
    double skew = 0.0, oracle_gap = 0.0;
    bool diag = true, range = true;
    for (int corpus_id = 0; corpus_id < 20; ++corpus_id) {
        const auto corpus = ts::random_corpus(rng, 2 + rng.index(7), 4 + rng.index(12));
        const auto m = textsim::similarity_matrix(corpus);
        for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
            diag = diag && m.values(i, i) == 1.0;
            for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
                skew = std::max(skew, std::abs(m.values(i, j) - m.values(j, i)));
                range = range && m.values(i, j) >= -1.0 && m.values(i, j) <= 1.0;
                if (i != j) {
                    const double o = ts::brute_force_course_similarity(corpus[static_cast<std::size_t>(i)], corpus[static_cast<std::size_t>(j)]);
                    oracle_gap = std::max(oracle_gap, std::abs(m.values(i, j) - o));
                }
            }
        }
    }
    std::ostringstream s;
    s << "skew " << skew << ", diagonal " << (diag ? "exact" : "BROKEN") << ", range " << (range ? "ok" : "BROKEN")
      << ", brute-force gap " << oracle_gap;
    return {skew <= 1e-9 && diag && range && oracle_gap <= 1e-12, s.str()};
}

Outcome attention_kernels() {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(2, 2);
    const auto toy = textsim::scaled_dot_attention(I, I, I);
    const bool toy_ok = std::abs(toy(0, 0) - 0.6698) < 1e-4 && std::abs(toy(0, 1) - 0.3302) < 1e-4;
    Rng rng(17);
    double row_gap = 0.0;
    bool bitwise = true;
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::Index n = 1 + static_cast<Eigen::Index>(rng.index(6)), m = 1 + static_cast<Eigen::Index>(rng.index(6));
        const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.index(8));
        Eigen::MatrixXd Q(n, d), K(m, d), V(m, d);
        for (auto* x : {&Q, &K, &V}) {
            for (Eigen::Index i = 0; i < x->size(); ++i) x->data()[i] = 4.0 * rng.normal();
        }
        const auto p = textsim::softmax_rows(Q * K.transpose() / std::sqrt(static_cast<double>(d)));
        for (Eigen::Index i = 0; i < p.rows(); ++i) row_gap = std::max(row_gap, std::abs(p.row(i).sum() - 1.0));
        const Eigen::MatrixXd Id = Eigen::MatrixXd::Identity(d, d);
        const auto mh = textsim::multi_head(Q, K, V, {{Id, Id, Id}}, Id);
        bitwise = bitwise && (mh.array() == textsim::scaled_dot_attention(Q, K, V).array()).all();
    }
    std::ostringstream s;
    s << "toy row (" << toy(0, 0) << ", " << toy(0, 1) << "), worst row-sum gap " << row_gap << ", single head "
      << (bitwise ? "bit-identical" : "DIFFERS");
    return {toy_ok && row_gap <= 1e-12 && bitwise, s.str()};
}

double segment_distance(const Eigen::RowVectorXd& p, const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
    const Eigen::RowVectorXd d = b - a;
    const double len2 = d.squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (p - (a + t * d)).norm();
}

Outcome smote_geometry() {
    Rng rng(31);
    double worst_distance = 0.0, worst_fraction_gap = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::Index n = 80;
        RowMatrix X(n, 3);
        for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
        std::vector<int> y(static_cast<std::size_t>(n), 1);
        std::vector<Eigen::Index> minority;
        for (Eigen::Index i = 0; i < n; i += 6) {
            y[static_cast<std::size_t>(i)] = 0;
            minority.push_back(i);
        }
        balance::SmoteConfig cfg;
        cfg.target_minority_fraction = 0.3 + 0.02 * trial;
        cfg.rng_seed = static_cast<std::uint64_t>(trial);
        const auto r = balance::smote(X, y, cfg);
        for (Eigen::Index s = n; s < r.X.rows(); ++s) {
            double best = 1e300;
            for (auto a : minority) {
                for (auto b : minority) {
                    if (a < b) best = std::min(best, segment_distance(r.X.row(s), X.row(a), X.row(b)));
                }
            }
            worst_distance = std::max(worst_distance, best);
        }
        const double frac = static_cast<double>(std::count(r.y.begin(), r.y.end(), 0)) / static_cast<double>(r.y.size());
        worst_fraction_gap = std::max(worst_fraction_gap, std::abs(frac - cfg.target_minority_fraction));
    }
    std::ostringstream s;
    s << "worst segment distance " << worst_distance << ", worst minority-fraction gap " << worst_fraction_gap;
    return {worst_distance < 1e-9 && worst_fraction_gap <= 0.01, s.str()};
}

Outcome clipping() {
    Rng rng(41);
    const auto net = lstm::make_network(ts::toy_config(1));
    double worst = 0.0;
    for (int trial = 0; trial < 500; ++trial) {
        auto g = net.params.zeros_like();
        for (auto& [name, m] : g.tensors()) {
            for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = rng.normal();
        }
        const double target = rng.uniform(0.0, 10.0);
        const double n = lstm::global_norm(g);
        for (auto& [name, m] : g.tensors()) *m *= target / n;
        worst = std::max(worst, lstm::global_norm(lstm::clip(g, 1.01)));
    }
    std::ostringstream s;
    s << "500 gradient sets, worst post-clip norm " << worst;
    return {worst <= 1.01 + 1e-12, s.str()};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"gradient-oracle", gradient_oracle},       {"metrics-exactness", metrics_exactness}, {"end-to-end-pipeline", end_to_end},
        {"ga-leak", ga_leak},                       {"svm", svm_checks},                      {"refd-oracle", refd_oracle},
        {"similarity-invariants", similarity_invariants}, {"attention-kernels", attention_kernels}, {"smote", smote_geometry},
        {"clipping", clipping},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
