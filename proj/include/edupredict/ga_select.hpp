/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Genetic-algorithm feature selection with SVM cross-validation
 *  fitness: binary chromosomes, roulette-wheel selection, one-child uniform
 *  crossover and per-bit mutation.
 */

#include "edupredict/common.hpp"
#include "edupredict/svm.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

namespace edupredict::ga {

/// Feature mask; a set bit keeps the feature. Never empty after repair.
struct Chromosome {
    std::vector<bool> bits;

    std::size_t size() const { return bits.size(); }
    std::size_t count() const { return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true)); }

    std::string key() const {
        std::string k(bits.size(), '0');
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i]) k[i] = '1';
        }
        return k;
    }

    std::vector<std::size_t> selected() const {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            if (bits[i]) out.push_back(i);
        }
        return out;
    }

    bool operator==(const Chromosome&) const = default;
};

struct GaConfig {
    std::size_t population_size = 1000;
    std::size_t generations = 100;
    double crossover_rate = 0.75;
    double mutation_rate = 0.002;
    std::uint64_t rng_seed = 0;
    std::size_t folds = 5;
    svm::SvmConfig svm{};
    svm::FoldMetric metric = svm::FoldMetric::Accuracy;
    /// Stratified row cap applied once before evolution; 0 keeps all rows.
    std::size_t max_rows = 0;
    std::size_t threads = 1;

    void validate() const {
        if (population_size < 1) throw Error(ErrorCode::InvalidConfig, "ga: population_size must be >= 1");
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0) || !(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
            throw Error(ErrorCode::InvalidConfig, "ga: rates must lie in [0, 1]");
        }
    }
};

/// Sets one uniformly chosen bit when the chromosome is empty.
inline void repair(Chromosome& c, Rng& rng) {
    if (c.size() > 0 && c.count() == 0) c.bits[rng.index(c.size())] = true;
}

inline std::vector<Chromosome> init_population(std::size_t n_features, std::size_t size, Rng& rng) {
    if (n_features < 1) throw Error(ErrorCode::InvalidConfig, "ga: need at least one feature");
    std::vector<Chromosome> pop(size);
    for (auto& c : pop) {
        c.bits.resize(n_features);
        for (std::size_t i = 0; i < n_features; ++i) c.bits[i] = rng.bernoulli(0.5);
        repair(c, rng);
    }
    return pop;
}

/// φᵢ = fᵢ / Σf
inline std::vector<double> selection_probabilities(const std::vector<double>& fitness) {
    double total = 0.0;
    for (double f : fitness) {
        if (!(f > 0.0)) throw Error(ErrorCode::NonpositiveFitness, "ga: roulette selection needs positive fitness");
        total += f;
    }
    std::vector<double> p(fitness.size());
    for (std::size_t i = 0; i < fitness.size(); ++i) p[i] = fitness[i] / total;
    return p;
}

/// Roulette wheel: index i with probability fᵢ / Σf, by inverting the
/// cumulative sum.
inline std::size_t select_index(const std::vector<double>& fitness, Rng& rng) {
    if (fitness.empty()) throw Error(ErrorCode::NonpositiveFitness, "ga: empty population");
    std::vector<double> cumulative(fitness.size());
    double total = 0.0;
    for (std::size_t i = 0; i < fitness.size(); ++i) {
        if (!(fitness[i] > 0.0)) throw Error(ErrorCode::NonpositiveFitness, "ga: roulette selection needs positive fitness");
        total += fitness[i];
        cumulative[i] = total;
    }
    const double target = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()), fitness.size() - 1);
}

inline const Chromosome& select(const std::vector<Chromosome>& population, const std::vector<double>& fitness, Rng& rng) {
    if (population.size() != fitness.size()) throw Error(ErrorCode::LengthMismatch, "ga: population/fitness size");
    return population[select_index(fitness, rng)];
}

/// Uniform crossover without the repair step. With probability `rate`
/// each gene comes from p1 or p2 with equal odds; otherwise the child is p1.
inline Chromosome uniform_crossover(const Chromosome& p1, const Chromosome& p2, double rate, Rng& rng) {
    if (p1.size() != p2.size()) throw Error(ErrorCode::LengthMismatch, "ga: parents differ in length");
    Chromosome child = p1;
    if (!rng.bernoulli(rate)) return child;
    for (std::size_t i = 0; i < child.size(); ++i) child.bits[i] = rng.bernoulli(0.5) ? p1.bits[i] : p2.bits[i];
    return child;
}

inline Chromosome crossover(const Chromosome& p1, const Chromosome& p2, double rate, Rng& rng) {
    Chromosome child = uniform_crossover(p1, p2, rate, rng);
    repair(child, rng);
    return child;
}

/// Per-bit flips with probability `rate`, without repair.
inline Chromosome flip_bits(Chromosome c, double rate, Rng& rng) {
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (rng.bernoulli(rate)) c.bits[i] = !c.bits[i];
    }
    return c;
}

inline Chromosome mutate(const Chromosome& c, double rate, Rng& rng) {
    Chromosome out = flip_bits(c, rate, rng);
    repair(out, rng);
    return out;
}

/// SVM k-fold score of the column-masked data, memoized by bit pattern.
/// Safe for concurrent use.
class FitnessEvaluator {
public:
    FitnessEvaluator(RowMatrix X, std::vector<int> y_signed, std::size_t folds, svm::SvmConfig svm_cfg,
                     svm::FoldMetric metric = svm::FoldMetric::Accuracy)
        : X_(std::move(X)), y_(std::move(y_signed)), folds_(folds), svm_(svm_cfg), metric_(metric) {}

    /// Scores are floored at kFloor so roulette weights stay positive.
    static constexpr double kFloor = 1e-6;

    double operator()(const Chromosome& c) {
        if (c.size() != static_cast<std::size_t>(X_.cols())) {
            throw Error(ErrorCode::LengthMismatch, "ga: chromosome length differs from feature count");
        }
        if (c.count() == 0) throw Error(ErrorCode::InvalidConfig, "ga: chromosome selects no feature");
        const std::string key = c.key();
        {
            std::lock_guard lock(mutex_);
            if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        }
        const auto cols = c.selected();
        RowMatrix masked(X_.rows(), static_cast<Eigen::Index>(cols.size()));
        for (std::size_t j = 0; j < cols.size(); ++j) masked.col(static_cast<Eigen::Index>(j)) = X_.col(static_cast<Eigen::Index>(cols[j]));
        const double score = std::max(kFloor, svm::kfold_score(masked, y_, folds_, svm_, metric_));
        std::lock_guard lock(mutex_);
        auto [it, inserted] = cache_.emplace(key, score);
        if (inserted) ++evaluations_;
        return it->second;
    }

    std::size_t evaluations() const {
        std::lock_guard lock(mutex_);
        return evaluations_;
    }

    std::size_t features() const { return static_cast<std::size_t>(X_.cols()); }

private:
    RowMatrix X_;
    std::vector<int> y_;
    std::size_t folds_;
    svm::SvmConfig svm_;
    svm::FoldMetric metric_;
    mutable std::mutex mutex_;
    std::map<std::string, double> cache_;
    std::size_t evaluations_ = 0;
};

inline std::vector<double> evaluate_population(const std::vector<Chromosome>& pop, FitnessEvaluator& fitness,
                                               std::size_t threads) {
    std::vector<double> out(pop.size());
    if (threads <= 1 || pop.size() < 2) {
        for (std::size_t i = 0; i < pop.size(); ++i) out[i] = fitness(pop[i]);
        return out;
    }
    std::vector<std::thread> workers;
    const std::size_t n = std::min(threads, pop.size());
    for (std::size_t w = 0; w < n; ++w) {
        workers.emplace_back([&, w] {
            for (std::size_t i = w; i < pop.size(); i += n) out[i] = fitness(pop[i]);
        });
    }
    for (auto& t : workers) t.join();
    return out;
}

struct GenerationStats {
    std::size_t generation = 0;
    double best_ever = 0.0;
    double best = 0.0;
    double mean = 0.0;
};

struct GaResult {
    Chromosome best;
    double best_fitness = 0.0;
    std::vector<GenerationStats> history;
    std::size_t evaluations = 0;
};

/// Row indices of a per-class proportional subsample of at most max_rows.
inline std::vector<std::size_t> stratified_subsample(const std::vector<int>& y, std::size_t max_rows, std::uint64_t seed) {
    std::vector<std::size_t> all(y.size());
    std::iota(all.begin(), all.end(), 0);
    if (max_rows == 0 || y.size() <= max_rows) return all;
    Rng rng(seed);
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < y.size(); ++i) by_class[y[i]].push_back(i);
    std::vector<std::size_t> out;
    for (auto& [label, members] : by_class) {
        rng.shuffle(members.begin(), members.end());
        const auto take = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(members.size()) * static_cast<double>(max_rows) /
                                                     static_cast<double>(y.size()))));
        members.resize(std::min(take, members.size()));
        out.insert(out.end(), members.begin(), members.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Runs the generational loop: the initial population is evaluated, then
/// each generation breeds population_size children (two roulette parents
/// drawn with replacement → crossover → mutation) and evaluates them.
/// No elitism; the best-ever individual is tracked outside the population.
/// `y` holds {0,1} or {−1,+1} labels.
inline GaResult evolve(const RowMatrix& X, const std::vector<int>& y, const GaConfig& cfg) {
    cfg.validate();
    if (static_cast<std::size_t>(X.rows()) != y.size()) throw Error(ErrorCode::DimensionMismatch, "ga: X rows and labels differ");
    const auto signed_y = svm::to_signed(y);
    const auto rows = stratified_subsample(signed_y, cfg.max_rows, derive_seed(cfg.rng_seed, "subsample"));

    std::vector<int> sub_y;
    for (std::size_t r : rows) sub_y.push_back(signed_y[r]);
    FitnessEvaluator fitness(svm::take_rows(X, rows), std::move(sub_y), cfg.folds, cfg.svm, cfg.metric);

    Rng rng(derive_seed(cfg.rng_seed, "ga"));
    auto population = init_population(static_cast<std::size_t>(X.cols()), cfg.population_size, rng);
    auto scores = evaluate_population(population, fitness, cfg.threads);

    GaResult result;
    auto track = [&](const std::vector<Chromosome>& pop, const std::vector<double>& f) {
        const auto best = static_cast<std::size_t>(std::max_element(f.begin(), f.end()) - f.begin());
        if (result.best.size() == 0 || f[best] > result.best_fitness) {
            result.best = pop[best];
            result.best_fitness = f[best];
        }
        return f[best];
    };
    track(population, scores);

    for (std::size_t g = 1; g <= cfg.generations; ++g) {
        std::vector<Chromosome> next;
        next.reserve(cfg.population_size);
        while (next.size() < cfg.population_size) {
            const Chromosome& p1 = select(population, scores, rng);
            const Chromosome& p2 = select(population, scores, rng);
            next.push_back(mutate(crossover(p1, p2, cfg.crossover_rate, rng), cfg.mutation_rate, rng));
        }
        population = std::move(next);
        scores = evaluate_population(population, fitness, cfg.threads);
        const double gen_best = track(population, scores);
        const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        result.history.push_back({g, result.best_fitness, gen_best, mean});
        info("ga generation " + std::to_string(g) + ": best-ever " + std::to_string(result.best_fitness) + ", mean " +
             std::to_string(mean));
    }
    result.evaluations = fitness.evaluations();
    return result;
}

inline nlohmann::json to_json(const GaResult& r) {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : r.history) {
        history.push_back({{"generation", h.generation}, {"best_ever", h.best_ever}, {"best", h.best}, {"mean", h.mean}});
    }
    std::vector<int> bits;
    for (bool b : r.best.bits) bits.push_back(b ? 1 : 0);
    return {{"bits", bits}, {"fitness", r.best_fitness}, {"history", history}, {"evaluations", r.evaluations}};
}

}  // namespace edupredict::ga
