/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Command-line front end: flat key=value configuration, one
 *  subcommand per pipeline stage, and the chained `pipeline` run.
 *
 *  Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure
 *  (missing files, malformed inputs, numerical failures).
 */

#include "edupredict/balance.hpp"
#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"
#include "edupredict/ga_select.hpp"
#include "edupredict/impute.hpp"
#include "edupredict/lstm_net.hpp"
#include "edupredict/metrics.hpp"
#include "edupredict/prereq.hpp"
#include "edupredict/records.hpp"
#include "edupredict/svm.hpp"
#include "edupredict/synthgen.hpp"
#include "edupredict/textsim.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace edupredict::cli {

namespace fs = std::filesystem;

struct KeySpec {
    const char* key;
    const char* value;
    const char* help;
};

/// Every accepted configuration key with its default.
inline const std::vector<KeySpec>& known_keys() {
    static const std::vector<KeySpec> keys = {
        {"seed", "42", "root seed; every stage derives its own stream from it"},
        {"input", "", "primary input file"},
        {"output", "", "primary output file"},
        {"out_dir", "", "pipeline working directory"},
        {"truth", "", "generate: ground-truth JSON (default <output>.truth.json)"},
        {"encoders", "", "preprocess/sequences: label-encoder JSON"},
        {"stats", "", "normalize: column statistics JSON"},
        {"test_output", "", "split: test-partition feature CSV"},
        {"selection", "", "sequences: feature-selection JSON from `select`"},
        {"model", "", "train/eval: network checkpoint JSON"},
        {"curves", "", "train: per-epoch curves CSV"},
        {"validation", "", "train: optional validation sequences JSONL"},
        {"predictions", "", "eval: optional per-student predictions CSV"},
        {"heatmap", "", "similarity: heat-map JSON (default <output>.heatmap.json)"},
        {"kg", "", "prereq: knowledge-graph TSV"},
        {"concepts", "", "prereq: course concepts JSON"},
        {"edges", "", "prereq: edge-list CSV (default <output>.edges.csv)"},

        {"gen.n_students", "1000", "students to generate"},
        {"gen.n_semesters", "8", "semesters per full-length student"},
        {"gen.courses_per_semester", "4", "courses per semester"},
        {"gen.threshold", "", "dropout threshold on final-semester mean; empty derives it from gen.class_balance"},
        {"gen.grade_noise", "0.5", "grade noise standard deviation"},
        {"gen.flip_noise", "0.02", "label flip probability"},
        {"gen.missing_rate", "0", "probability that a maskable cell is blanked"},
        {"gen.class_balance", "0.3", "target dropout share"},
        {"gen.short_fraction", "0.1", "share of students with fewer semesters"},
        {"gen.degrees", "ADM,ARQ,CSI", "comma-separated degree codes"},

        {"records.delimiter", ",", "input CSV delimiter"},
        {"records.degree", "", "keep only this degree code (empty keeps all)"},

        {"impute.n_trees", "20", "trees per forest"},
        {"impute.max_depth", "10", "tree depth limit"},
        {"impute.min_leaf", "2", "minimum rows per leaf"},
        {"impute.feature_subsample", "0.3333333333333333", "fraction of predictors tried per split"},
        {"impute.max_train_rows", "5000", "row cap per forest (0 = all rows)"},

        {"split.test_fraction", "0.2", "student-level held-out share"},

        {"smote.k", "5", "SMOTE neighbours"},
        {"smote.target", "0.5", "minority share after oversampling"},

        {"ga.population", "1000", "GA population size"},
        {"ga.generations", "100", "GA generations"},
        {"ga.crossover_rate", "0.75", "crossover probability"},
        {"ga.mutation_rate", "0.002", "per-bit mutation probability"},
        {"ga.folds", "5", "cross-validation folds for fitness"},
        {"ga.metric", "accuracy", "fitness metric: accuracy | f1"},
        {"ga.max_rows", "4000", "stratified row cap for fitness (0 = all rows)"},
        {"ga.threads", "1", "fitness evaluation threads"},
        {"svm.lambda", "0.01", "SVM regularization strength"},
        {"svm.epochs", "20", "SVM epochs"},
        {"svm.initial_step", "1", "SVM first step size"},

        {"seq.overfull", "keep_highest_credit", "semester overflow: keep_highest_credit | reject"},

        {"lstm.layers", "2", "stacked LSTM layers"},
        {"lstm.hidden", "50", "LSTM hidden units"},
        {"lstm.fc_hidden", "128", "fully connected layer width"},
        {"lstm.dropout", "0.7", "inter-layer dropout rate"},
        {"lstm.clip", "1.01", "global gradient-norm threshold"},
        {"lstm.fc2_activation", "relu", "second dense activation: relu | sigmoid | tanh | identity"},
        {"lstm.output_bias", "0.5", "initial output bias"},
        {"lstm.learning_rate", "0.001", "Adam learning rate"},
        {"lstm.beta1", "0.9", "Adam beta1"},
        {"lstm.beta2", "0.999", "Adam beta2"},
        {"lstm.epsilon", "1e-8", "Adam epsilon"},
        {"lstm.epochs", "30", "training epochs"},
        {"lstm.batch_size", "32", "mini-batch size"},

        {"sim.aggregation", "mean", "course aggregation: mean | max"},

        {"prereq.category_predicates", prereq::kDefaultCategoryPredicate, "comma-separated hierarchical predicates"},
        {"prereq.weighting", "equal", "candidate weighting: equal | semantic"},
        {"prereq.indicator", "outgoing", "reference test: outgoing | either"},
        {"prereq.hops", "1", "neighbour hop bound"},
        {"prereq.threshold", "8", "strong-direction threshold"},
        {"prereq.confidence_weighted", "false", "weight pairs by extraction confidence"},
        {"prereq.skip_degenerate", "false", "skip concept pairs without candidates"},
        {"prereq.pairs", "", "course pairs A:B,C:D (empty scores every pair)"},
    };
    return keys;
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

inline std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class Config {
public:
    Config() {
        for (const auto& k : known_keys()) values_[k.key] = k.value;
    }

    void set(const std::string& key, const std::string& value) {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorCode::InvalidConfig, "unknown configuration key '" + key + "'");
        it->second = value;
    }

    /// Applies "key=value"; whitespace around both sides is ignored.
    void assign(const std::string& entry) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::InvalidConfig, "expected key=value, got '" + entry + "'");
        set(trim(entry.substr(0, eq)), trim(entry.substr(eq + 1)));
    }

    /// Flat key=value lines; blank lines and '#' comments are skipped.
    void load(std::istream& in, const std::string& source) {
        std::string line;
        std::size_t n = 0;
        while (std::getline(in, line)) {
            ++n;
            const auto t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            try {
                assign(t);
            } catch (const Error& e) {
                throw Error(ErrorCode::InvalidConfig, source + ":" + std::to_string(n) + ": " + e.what());
            }
        }
    }

    void load_file(const std::string& path) {
        auto in = csv::open_input(path);
        load(in, path);
    }

    const std::string& str(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorCode::InvalidConfig, "unknown configuration key '" + key + "'");
        return it->second;
    }

    double real(const std::string& key) const {
        const auto v = csv::parse_double(str(key));
        if (!v) throw Error(ErrorCode::InvalidConfig, key + ": expected a number, got '" + str(key) + "'");
        return *v;
    }

    std::size_t count(const std::string& key) const {
        const std::string& s = str(key);
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || p != s.data() + s.size()) {
            throw Error(ErrorCode::InvalidConfig, key + ": expected a non-negative integer, got '" + s + "'");
        }
        return v;
    }

    std::uint64_t u64(const std::string& key) const { return static_cast<std::uint64_t>(count(key)); }

    bool flag(const std::string& key) const {
        const std::string& s = str(key);
        if (s == "true" || s == "1" || s == "yes") return true;
        if (s == "false" || s == "0" || s == "no") return false;
        throw Error(ErrorCode::InvalidConfig, key + ": expected true or false, got '" + s + "'");
    }

    /// Required path: an empty value is a configuration error.
    std::string path(const std::string& key) const {
        const std::string& s = str(key);
        if (s.empty()) throw Error(ErrorCode::InvalidConfig, "missing required setting '" + key + "'");
        return s;
    }

    std::string path_or(const std::string& key, const std::string& fallback) const {
        const std::string& s = str(key);
        return s.empty() ? fallback : s;
    }

    std::uint64_t stage_seed(std::string_view stage) const { return derive_seed(u64("seed"), stage); }

    std::string dump() const {
        std::string out;
        for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Config → module settings
// ---------------------------------------------------------------------------

inline synthgen::GeneratorConfig generator_config(const Config& c) {
    synthgen::GeneratorConfig g;
    g.n_students = c.count("gen.n_students");
    g.n_semesters = c.count("gen.n_semesters");
    g.courses_per_semester = c.count("gen.courses_per_semester");
    g.threshold = c.str("gen.threshold").empty() ? kMissing : c.real("gen.threshold");
    g.grade_noise = c.real("gen.grade_noise");
    g.flip_noise = c.real("gen.flip_noise");
    g.missing_rate = c.real("gen.missing_rate");
    g.class_balance = c.real("gen.class_balance");
    g.short_fraction = c.real("gen.short_fraction");
    g.degrees = split_list(c.str("gen.degrees"));
    g.rng_seed = c.stage_seed("synthgen");
    g.validate();
    return g;
}

inline records::LoadOptions load_options(const Config& c) {
    records::LoadOptions o;
    const std::string& d = c.str("records.delimiter");
    if (d == "\\t" || d == "tab") {
        o.delimiter = '\t';
    } else if (d.size() == 1) {
        o.delimiter = d[0];
    } else {
        throw Error(ErrorCode::InvalidConfig, "records.delimiter must be a single character or 'tab'");
    }
    return o;
}

inline impute::ForestConfig forest_config(const Config& c) {
    impute::ForestConfig f;
    f.n_trees = c.count("impute.n_trees");
    f.max_depth = c.count("impute.max_depth");
    f.min_leaf = c.count("impute.min_leaf");
    f.feature_subsample = c.real("impute.feature_subsample");
    f.max_train_rows = c.count("impute.max_train_rows");
    f.rng_seed = c.stage_seed("impute");
    f.validate();
    return f;
}

inline balance::SmoteConfig smote_config(const Config& c) {
    return {c.count("smote.k"), c.real("smote.target"), c.stage_seed("balance")};
}

inline ga::GaConfig ga_config(const Config& c) {
    ga::GaConfig g;
    g.population_size = c.count("ga.population");
    g.generations = c.count("ga.generations");
    g.crossover_rate = c.real("ga.crossover_rate");
    g.mutation_rate = c.real("ga.mutation_rate");
    g.folds = c.count("ga.folds");
    const std::string& metric = c.str("ga.metric");
    if (metric == "accuracy") {
        g.metric = svm::FoldMetric::Accuracy;
    } else if (metric == "f1") {
        g.metric = svm::FoldMetric::F1;
    } else {
        throw Error(ErrorCode::InvalidConfig, "ga.metric must be accuracy or f1");
    }
    g.max_rows = c.count("ga.max_rows");
    g.threads = c.count("ga.threads");
    g.rng_seed = c.stage_seed("ga_select");
    g.svm.lambda = c.real("svm.lambda");
    g.svm.epochs = c.count("svm.epochs");
    g.svm.initial_step = c.real("svm.initial_step");
    g.svm.rng_seed = derive_seed(g.rng_seed, "svm");
    if (!(g.svm.lambda > 0.0) || g.svm.epochs < 1) throw Error(ErrorCode::InvalidConfig, "svm.lambda > 0 and svm.epochs >= 1");
    g.validate();
    return g;
}

inline lstm::NetworkConfig network_config(const Config& c, std::size_t input_dim) {
    lstm::NetworkConfig n;
    n.input_dim = input_dim;
    n.lstm_layers = c.count("lstm.layers");
    n.hidden = c.count("lstm.hidden");
    n.fc_hidden = c.count("lstm.fc_hidden");
    n.dropout_p = c.real("lstm.dropout");
    n.clip_threshold = c.real("lstm.clip");
    n.fc2_activation = lstm::activation_from_string(c.str("lstm.fc2_activation"));
    n.output_bias_init = c.real("lstm.output_bias");
    n.learning_rate = c.real("lstm.learning_rate");
    n.beta1 = c.real("lstm.beta1");
    n.beta2 = c.real("lstm.beta2");
    n.epsilon = c.real("lstm.epsilon");
    n.epochs = c.count("lstm.epochs");
    n.batch_size = c.count("lstm.batch_size");
    n.rng_seed = c.stage_seed("lstm_net");
    n.validate();
    return n;
}

inline prereq::ScoreOptions score_options(const Config& c) {
    prereq::ScoreOptions o;
    const std::string& w = c.str("prereq.weighting");
    if (w == "equal") {
        o.refd.weighting = prereq::Weighting::Equal;
    } else if (w == "semantic") {
        o.refd.weighting = prereq::Weighting::Semantic;
    } else {
        throw Error(ErrorCode::InvalidConfig, "prereq.weighting must be equal or semantic");
    }
    const std::string& i = c.str("prereq.indicator");
    if (i == "outgoing") {
        o.refd.indicator = prereq::Indicator::Outgoing;
    } else if (i == "either") {
        o.refd.indicator = prereq::Indicator::EitherDirection;
    } else {
        throw Error(ErrorCode::InvalidConfig, "prereq.indicator must be outgoing or either");
    }
    o.refd.hops = c.count("prereq.hops");
    if (o.refd.hops < 1) throw Error(ErrorCode::InvalidConfig, "prereq.hops must be >= 1");
    o.confidence_weighted = c.flag("prereq.confidence_weighted");
    o.skip_degenerate = c.flag("prereq.skip_degenerate");
    return o;
}

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

inline void write_json(const std::string& path, const nlohmann::json& j) {
    auto out = csv::open_output(path);
    out << j.dump(2) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

inline nlohmann::json read_json(const std::string& path) {
    auto in = csv::open_input(path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, path + ": " + e.what());
    }
}

inline void write_features(const std::string& path, const records::FeatureTable& t) { records::write_feature_table(path, t); }

inline records::FeatureTable read_features(const std::string& path) { return records::read_feature_table(path); }

// ---------------------------------------------------------------------------
// Stages
// ---------------------------------------------------------------------------

inline void run_generate(const Config& c) {
    const auto gcfg = generator_config(c);
    const auto data = synthgen::generate(gcfg);
    const std::string out = c.path("output");
    {
        auto f = csv::open_output(out);
        records::write_records(f, data.table);
    }
    write_json(c.path_or("truth", out + ".truth.json"), synthgen::truth_json(data, gcfg));
    info("generated " + std::to_string(data.table.size()) + " records for " + std::to_string(data.truth.size()) + " students");
}

inline void run_preprocess(const Config& c) {
    auto table = records::load_records(c.path("input"), load_options(c));
    if (const std::string& degree = c.str("records.degree"); !degree.empty()) {
        auto parts = records::split_by_degree(table);
        auto it = parts.find(degree);
        if (it == parts.end()) throw Error(ErrorCode::TooFewSamples, "no records for degree '" + degree + "'");
        table = std::move(it->second);
    }
    const auto cleaned = records::clean(table);
    info("clean: " + std::to_string(cleaned.report.duplicates_removed) + " duplicates, " +
         std::to_string(cleaned.report.outliers_removed) + " out-of-range grades removed");
    const auto encoded = records::encode_labels(cleaned.table);
    const std::string out = c.path("output");
    write_features(out, encoded.table);
    write_json(c.path_or("encoders", out + ".encoders.json"), records::encoders_to_json(encoded.encoders));
}

inline void run_impute(const Config& c) {
    const auto table = read_features(c.path("input"));
    const auto filled = impute::impute(table, forest_config(c));
    write_features(c.path("output"), filled);
}

inline void run_normalize(const Config& c) {
    const auto table = read_features(c.path("input"));
    const auto result = records::zscore_normalize(table, records::default_key_columns());
    const std::string out = c.path("output");
    write_features(out, result.table);
    nlohmann::json stats = nlohmann::json::object();
    for (const auto& [name, s] : result.stats) stats[name] = {{"mean", s.mean}, {"stddev", s.stddev}};
    write_json(c.path_or("stats", out + ".stats.json"), stats);
}

/// Student-level stratified partition: every row of a student lands on the
/// same side. Returns (train rows, test rows).
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_students(const records::FeatureTable& t, double test_fraction,
                                                                                    std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw Error(ErrorCode::InvalidConfig, "split.test_fraction must lie in (0, 1)");
    const std::size_t student = t.index(records::col::kStudent);
    const std::size_t label = t.index(t.label_column);
    std::map<double, std::vector<std::size_t>> rows_of;
    std::map<double, int> label_of;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double id = t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(student));
        rows_of[id].push_back(r);
        label_of[id] = static_cast<int>(t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(label)));
    }
    std::map<int, std::vector<double>> by_class;
    for (const auto& [id, l] : label_of) by_class[l].push_back(id);
    Rng rng(seed);
    std::set<double> test_ids;
    for (auto& [l, ids] : by_class) {
        rng.shuffle(ids.begin(), ids.end());
        const auto take = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(ids.size())));
        test_ids.insert(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(std::min(take, ids.size())));
    }
    std::vector<std::size_t> train, test;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const double id = t.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(student));
        (test_ids.count(id) ? test : train).push_back(r);
    }
    return {train, test};
}

inline void run_split(const Config& c) {
    const auto table = read_features(c.path("input"));
    const auto [train, test] = split_students(table, c.real("split.test_fraction"), c.stage_seed("split"));
    write_features(c.path("output"), table.select_rows(train));
    write_features(c.path("test_output"), table.select_rows(test));
}

/// Feature columns (non-key) of a table as a dense matrix plus labels.
inline std::pair<RowMatrix, std::vector<int>> design_matrix(const records::FeatureTable& t, const std::vector<std::string>& features) {
    RowMatrix X(static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(features.size()));
    for (std::size_t j = 0; j < features.size(); ++j) {
        X.col(static_cast<Eigen::Index>(j)) = t.values.col(static_cast<Eigen::Index>(t.index(features[j])));
    }
    if (!X.allFinite()) throw Error(ErrorCode::InvalidConfig, "feature matrix has missing values; run impute first");
    return {std::move(X), t.labels()};
}

inline void run_balance(const Config& c) {
    const auto table = read_features(c.path("input"));
    const auto features = records::feature_columns(table);
    auto [X, y] = design_matrix(table, features);
    const auto result = balance::smote(X, y, smote_config(c));
    records::FeatureTable out;
    out.column_names = features;
    out.column_names.push_back(table.label_column);
    out.values.resize(result.X.rows(), result.X.cols() + 1);
    out.values.leftCols(result.X.cols()) = result.X;
    for (Eigen::Index r = 0; r < result.X.rows(); ++r) out.values(r, result.X.cols()) = result.y[static_cast<std::size_t>(r)];
    write_features(c.path("output"), out);
    info("smote: " + std::to_string(result.synthetic) + " synthetic rows");
}

inline void run_select(const Config& c) {
    const auto table = read_features(c.path("input"));
    const auto features = records::feature_columns(table);
    auto [X, y] = design_matrix(table, features);
    const auto result = ga::evolve(X, y, ga_config(c));
    std::vector<std::string> chosen;
    for (std::size_t j = 0; j < features.size(); ++j) {
        if (result.best.bits[j]) chosen.push_back(features[j]);
    }
    nlohmann::json j = ga::to_json(result);
    j["candidates"] = features;
    j["features"] = chosen;
    write_json(c.path("output"), j);
}

inline std::vector<std::string> selected_features(const Config& c, const records::FeatureTable& table) {
    const std::string& sel = c.str("selection");
    if (sel.empty()) return records::feature_columns(table);
    return read_json(sel).at("features").get<std::vector<std::string>>();
}

inline void run_sequences(const Config& c) {
    const auto table = read_features(c.path("input"));
    records::SequenceOptions opts;
    opts.feature_columns = selected_features(c, table);
    const std::string& policy = c.str("seq.overfull");
    if (policy == "keep_highest_credit") {
        opts.overfull = records::OverfullPolicy::KeepHighestCredit;
    } else if (policy == "reject") {
        opts.overfull = records::OverfullPolicy::Reject;
    } else {
        throw Error(ErrorCode::InvalidConfig, "seq.overfull must be keep_highest_credit or reject");
    }
    std::optional<records::EncoderSet> encoders;
    if (const std::string& e = c.str("encoders"); !e.empty()) encoders = records::encoders_from_json(read_json(e));
    const auto built = records::build_sequences(table, opts, encoders ? &*encoders : nullptr);
    records::write_sequences(c.path("output"), built.sequences);
}

/// Cross-validated SVM score of a feature table, optionally restricted to a
/// selection; printed to stdout unless `output` is set.
inline void run_svm_eval(const Config& c) {
    const auto table = read_features(c.path("input"));
    auto [X, y] = design_matrix(table, selected_features(c, table));
    const auto g = ga_config(c);
    const double score = svm::kfold_score(X, svm::to_signed(y), g.folds, g.svm, g.metric);
    const nlohmann::json j = {{"metric", c.str("ga.metric")}, {"folds", g.folds}, {"score", score}};
    if (c.str("output").empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        write_json(c.path("output"), j);
    }
}

inline void write_curves(const std::string& path, const lstm::TrainCurves& curves, bool with_validation) {
    auto out = csv::open_output(path);
    std::vector<std::string> header{"epoch", "loss", "accuracy"};
    if (with_validation) {
        header.push_back("val_loss");
        header.push_back("val_accuracy");
    }
    csv::write_row(out, header);
    for (const auto& e : curves.epochs) {
        std::vector<std::string> row{std::to_string(e.epoch), csv::format_double(e.train_loss), csv::format_double(e.train_accuracy)};
        if (with_validation) {
            row.push_back(csv::format_double(e.val_loss));
            row.push_back(csv::format_double(e.val_accuracy));
        }
        csv::write_row(out, row);
    }
}

inline void run_train(const Config& c) {
    const auto train_set = records::read_sequences(c.path("input"));
    if (train_set.empty()) throw Error(ErrorCode::TooFewSamples, "no training sequences in " + c.path("input"));
    std::vector<records::StudentSequence> val_set;
    if (const std::string& v = c.str("validation"); !v.empty()) val_set = records::read_sequences(v);
    auto net = lstm::make_network(network_config(c, train_set.front().dim()));
    const auto curves = lstm::train(net, train_set, val_set);
    const std::string model = c.str("model").empty() ? c.path("output") : c.str("model");
    write_json(model, lstm::to_json(net));
    write_curves(c.path_or("curves", model + ".curves.csv"), curves, !val_set.empty());
}

inline void run_eval(const Config& c) {
    const auto net = lstm::network_from_json(read_json(c.path("model")));
    const auto data = records::read_sequences(c.path("input"));
    const auto stats = lstm::evaluate(net, data);
    std::vector<int> preds, labels;
    for (std::size_t i = 0; i < data.size(); ++i) {
        preds.push_back(stats.predictions[i] >= 0.5 ? 1 : 0);
        labels.push_back(data[i].label);
    }
    const auto rep = metrics::report(metrics::confusion(preds, labels));
    nlohmann::json j = metrics::to_json(rep);
    j["loss"] = stats.loss;
    j["samples"] = data.size();
    write_json(c.path("output"), j);
    if (const std::string& p = c.str("predictions"); !p.empty()) {
        auto out = csv::open_output(p);
        csv::write_row(out, {"student_id", "label", "prediction", "class"});
        for (std::size_t i = 0; i < data.size(); ++i) {
            csv::write_row(out, {data[i].student_id, std::to_string(labels[i]), csv::format_double(stats.predictions[i]),
                                 std::to_string(preds[i])});
        }
    }
}

inline void run_similarity(const Config& c) {
    const auto loaded = textsim::load_embeddings(fs::path(c.path("input")));
    const std::string& agg = c.str("sim.aggregation");
    textsim::Aggregation mode;
    if (agg == "mean") {
        mode = textsim::Aggregation::CrossMean;
    } else if (agg == "max") {
        mode = textsim::Aggregation::MaxMatch;
    } else {
        throw Error(ErrorCode::InvalidConfig, "sim.aggregation must be mean or max");
    }
    const auto m = textsim::similarity_matrix(loaded.courses, mode);
    const std::string out = c.path("output");
    {
        auto f = csv::open_output(out);
        textsim::write_matrix_csv(f, m);
    }
    nlohmann::json heat = textsim::heatmap_json(m);
    nlohmann::json levels = nlohmann::json::object();
    for (const auto& [level, sub] : textsim::level_submatrices(m)) levels[std::to_string(level)] = textsim::heatmap_json(sub);
    heat["levels"] = levels;
    if (m.course_ids.size() >= 2) {
        nlohmann::json rank = nlohmann::json::array();
        for (const auto& r : textsim::average_linkage_rank(m)) rank.push_back({{"course_id", r.course_id}, {"mean", r.mean_similarity}});
        heat["average_linkage_rank"] = rank;
    }
    write_json(c.path_or("heatmap", out + ".heatmap.json"), heat);
}

inline void run_prereq(const Config& c) {
    const auto preds = split_list(c.str("prereq.category_predicates"));
    const auto kg = prereq::load_kg(fs::path(c.path("kg")), std::set<std::string>(preds.begin(), preds.end()));
    const auto courses = prereq::load_concepts(fs::path(c.path("concepts")));
    std::map<std::string, const prereq::CourseConcepts*> by_id;
    for (const auto& cc : courses) by_id[cc.course_id] = &cc;

    std::vector<std::pair<std::string, std::string>> pairs;
    if (const std::string& p = c.str("prereq.pairs"); !p.empty()) {
        for (const auto& item : split_list(p)) {
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw Error(ErrorCode::InvalidConfig, "prereq.pairs entries look like A:B");
            pairs.emplace_back(item.substr(0, colon), item.substr(colon + 1));
        }
    } else {
        for (std::size_t i = 0; i < courses.size(); ++i) {
            for (std::size_t j = i + 1; j < courses.size(); ++j) pairs.emplace_back(courses[i].course_id, courses[j].course_id);
        }
    }

    const auto opts = score_options(c);
    const double threshold = c.real("prereq.threshold");
    nlohmann::json results = nlohmann::json::array();
    const std::string out = c.path("output");
    auto edges = csv::open_output(c.path_or("edges", out + ".edges.csv"));
    csv::write_row(edges, {"course_a", "course_b", "score", "direction"});
    for (const auto& [a, b] : pairs) {
        if (!by_id.count(a) || !by_id.count(b)) throw Error(ErrorCode::EmptyCandidates, "no concepts listed for course pair " + a + ":" + b);
        const auto s = prereq::course_prereq_score(kg, *by_id[a], *by_id[b], opts);
        const auto d = prereq::classify_direction(s.score, threshold);
        results.push_back(prereq::to_json(a, b, s, d));
        csv::write_row(edges, {a, b, csv::format_double(s.score), prereq::to_string(d)});
    }
    write_json(out, results);
}

/// Chains every dropout-prediction stage, persisting each artifact in
/// out_dir so any stage can be rerun on its own.
inline void run_pipeline(const Config& base) {
    const fs::path dir = base.path("out_dir");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    auto at = [&](const char* name) { return (dir / name).string(); };
    {
        auto f = csv::open_output(at("resolved.cfg"));
        f << base.dump();
    }
    auto stage = [&](std::initializer_list<std::pair<const char*, std::string>> paths) {
        Config c = base;
        for (const auto& k : {"input", "output", "test_output", "selection", "model", "curves", "validation", "predictions",
                              "encoders", "stats"}) {
            c.set(k, "");
        }
        for (const auto& [k, v] : paths) c.set(k, v);
        return c;
    };
    std::string records_path = base.str("input");
    if (records_path.empty()) {
        records_path = at("records.csv");
        run_generate(stage({{"output", records_path}, {"truth", at("records.truth.json")}}));
    }
    info("pipeline: preprocess");
    run_preprocess(stage({{"input", records_path}, {"output", at("features.csv")}, {"encoders", at("encoders.json")}}));
    info("pipeline: impute");
    run_impute(stage({{"input", at("features.csv")}, {"output", at("imputed.csv")}}));
    info("pipeline: normalize");
    run_normalize(stage({{"input", at("imputed.csv")}, {"output", at("normalized.csv")}, {"stats", at("normalize_stats.json")}}));
    info("pipeline: split");
    run_split(stage({{"input", at("normalized.csv")}, {"output", at("train_rows.csv")}, {"test_output", at("test_rows.csv")}}));
    info("pipeline: balance");
    run_balance(stage({{"input", at("train_rows.csv")}, {"output", at("balanced.csv")}}));
    info("pipeline: select");
    run_select(stage({{"input", at("balanced.csv")}, {"output", at("selection.json")}}));
    info("pipeline: sequences");
    run_sequences(stage({{"input", at("train_rows.csv")}, {"output", at("train.jsonl")}, {"selection", at("selection.json")},
                         {"encoders", at("encoders.json")}}));
    run_sequences(stage({{"input", at("test_rows.csv")}, {"output", at("test.jsonl")}, {"selection", at("selection.json")},
                         {"encoders", at("encoders.json")}}));
    info("pipeline: train");
    run_train(stage({{"input", at("train.jsonl")}, {"model", at("model.json")}, {"curves", at("curves.csv")}}));
    info("pipeline: eval");
    run_eval(stage({{"input", at("test.jsonl")}, {"model", at("model.json")}, {"output", at("metrics.json")},
                    {"predictions", at("predictions.csv")}}));
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct Subcommand {
    const char* name;
    const char* help;
    void (*run)(const Config&);
};

inline const std::vector<Subcommand>& subcommands() {
    static const std::vector<Subcommand> list = {
        {"generate", "write a synthetic records CSV and its ground truth", run_generate},
        {"preprocess", "load, clean and encode a records CSV into a feature table", run_preprocess},
        {"impute", "fill missing feature cells with random-forest regression", run_impute},
        {"normalize", "z-score feature columns", run_normalize},
        {"split", "student-level stratified train/test partition", run_split},
        {"balance", "SMOTE-oversample the minority class", run_balance},
        {"select", "GA feature selection with SVM cross-validation fitness", run_select},
        {"sequences", "build padded per-student sequences", run_sequences},
        {"train", "train the LSTM classifier", run_train},
        {"eval", "evaluate a trained model", run_eval},
        {"svm-eval", "cross-validated linear SVM score of a feature table", run_svm_eval},
        {"similarity", "course similarity matrix from sentence embeddings", run_similarity},
        {"prereq", "course prerequisite scores over a knowledge graph", run_prereq},
        {"pipeline", "generate/preprocess through eval in one run", run_pipeline},
    };
    return list;
}

inline std::string usage() {
    std::string s = "usage: edupredict <subcommand> [--config FILE] [--set KEY=VALUE ...] [KEY=VALUE ...]\n\nsubcommands:\n";
    for (const auto& sc : subcommands()) {
        std::string name = sc.name;
        name.resize(12, ' ');
        s += "  " + name + sc.help + "\n";
    }
    s += "\nRun `edupredict <subcommand> --help` for options and `edupredict keys` for every configuration key.\n";
    return s;
}

inline std::string keys_help() {
    std::string s;
    for (const auto& k : known_keys()) s += std::string(k.key) + " (default '" + k.value + "'): " + k.help + "\n";
    return s;
}

inline int exit_code_for(ErrorCode code) {
    return code == ErrorCode::InvalidConfig || code == ErrorCode::UnknownSubcommand ? 1 : 2;
}

/// Parses argv, resolves the configuration and runs one subcommand.
inline int dispatch(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    if (argc < 2) {
        err << usage();
        return 1;
    }
    const std::string name = argv[1];
    if (name == "--help" || name == "-h" || name == "help") {
        out << usage();
        return 0;
    }
    if (name == "keys") {
        out << keys_help();
        return 0;
    }
    const auto& list = subcommands();
    const auto it = std::find_if(list.begin(), list.end(), [&](const Subcommand& s) { return name == s.name; });
    if (it == list.end()) {
        err << "edupredict: unknown subcommand '" << name << "'\n\n" << usage();
        return 1;
    }

    CLI::App app{it->help, std::string("edupredict ") + it->name};
    std::string config_file;
    std::vector<std::string> sets;
    std::vector<std::string> positional;
    app.add_option("--config,-c", config_file, "key=value configuration file");
    app.add_option("--set,-s", sets, "override one key (KEY=VALUE), repeatable");
    app.add_option("assignments", positional, "KEY=VALUE overrides");
    try {
        std::vector<std::string> rest(argv + 2, argv + argc);
        std::reverse(rest.begin(), rest.end());
        app.parse(rest);
    } catch (const CLI::CallForHelp&) {
        out << app.help() << "\nConfiguration keys:\n" << keys_help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "edupredict " << it->name << ": " << e.what() << "\n";
        return 1;
    }

    Config cfg;
    try {
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const auto& s : sets) cfg.assign(s);
        for (const auto& s : positional) cfg.assign(s);
    } catch (const Error& e) {
        err << "edupredict " << it->name << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    }
    if (log_level() >= LogLevel::Warn) {
        std::istringstream lines(cfg.dump());
        for (std::string line; std::getline(lines, line);) err << "[edupredict config] " << line << '\n';
    }

    try {
        it->run(cfg);
    } catch (const Error& e) {
        err << "edupredict " << it->name << ": " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "edupredict " << it->name << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace edupredict::cli
