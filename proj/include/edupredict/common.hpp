/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Shared error type, seeded random streams and logging.
 */

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace edupredict {

/// Row-major dense matrix used for tabular data (one sample per row).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
    MissingFile,
    HeaderMismatch,
    RowError,
    UnknownStatus,
    OverfullSemester,
    AllMissingColumn,
    DimensionMismatch,
    LengthMismatch,
    ShapeError,
    StaleCache,
    TooFewMinority,
    SingleClass,
    TooFewSamples,
    ZeroNorm,
    NonpositiveFitness,
    DimensionInconsistent,
    MalformedLine,
    ZeroVector,
    EmptyCourse,
    TooFewCourses,
    MalformedTriple,
    EmptyCandidates,
    ZeroWeightDenominator,
    EmptyMatrix,
    UnknownSubcommand,
    InvalidConfig,
    IoError,
    NoProgress,
};

inline const char* to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MissingFile: return "MissingFile";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::RowError: return "RowError";
        case ErrorCode::UnknownStatus: return "UnknownStatus";
        case ErrorCode::OverfullSemester: return "OverfullSemester";
        case ErrorCode::AllMissingColumn: return "AllMissingColumn";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::ShapeError: return "ShapeError";
        case ErrorCode::StaleCache: return "StaleCache";
        case ErrorCode::TooFewMinority: return "TooFewMinority";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::ZeroNorm: return "ZeroNorm";
        case ErrorCode::NonpositiveFitness: return "NonpositiveFitness";
        case ErrorCode::DimensionInconsistent: return "DimensionInconsistent";
        case ErrorCode::MalformedLine: return "MalformedLine";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::EmptyCourse: return "EmptyCourse";
        case ErrorCode::TooFewCourses: return "TooFewCourses";
        case ErrorCode::MalformedTriple: return "MalformedTriple";
        case ErrorCode::EmptyCandidates: return "EmptyCandidates";
        case ErrorCode::ZeroWeightDenominator: return "ZeroWeightDenominator";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::UnknownSubcommand: return "UnknownSubcommand";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::NoProgress: return "NoProgress";
    }
    return "Unknown";
}

/// Every failure raised by the library carries a machine-readable code.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Random streams
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Child seed for a named consumer of a root seed (seed + module-name hash).
inline std::uint64_t derive_seed(std::uint64_t root, std::string_view name) {
    return splitmix64(root ^ fnv1a(name));
}

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
    return splitmix64(root + splitmix64(index + 1));
}

/// Seeded stream with platform-independent draws. std::mt19937_64 is
/// bit-specified by the standard; the distributions below are written out so
/// outputs do not depend on the standard library's distribution code.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        const std::uint64_t bound = static_cast<std::uint64_t>(n);
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                    std::numeric_limits<std::uint64_t>::max() % bound;
        std::uint64_t r;
        do {
            r = engine_();
        } while (r >= limit);
        return static_cast<std::size_t>(r % bound);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal(double mean = 0.0, double stddev = 1.0) {
        if (has_spare_) {
            has_spare_ = false;
            return mean + stddev * spare_;
        }
        double u1 = 0.0;
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        constexpr double kTwoPi = 6.283185307179586476925286766559;
        spare_ = radius * std::sin(kTwoPi * u2);
        has_spare_ = true;
        return mean + stddev * radius * std::cos(kTwoPi * u2);
    }

    template <typename It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::size_t>(last - first);
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// ---------------------------------------------------------------------------
// Logging
// ---------------------------------------------------------------------------

enum class LogLevel { Error = 0, Warn = 1, Info = 2, Debug = 3 };

inline LogLevel& log_level() {
    static LogLevel level = [] {
        const char* env = std::getenv("EDUPREDICT_LOG");
        if (env == nullptr) return LogLevel::Warn;
        const std::string_view v(env);
        if (v == "error") return LogLevel::Error;
        if (v == "info") return LogLevel::Info;
        if (v == "debug") return LogLevel::Debug;
        return LogLevel::Warn;
    }();
    return level;
}

inline void log(LogLevel level, std::string_view message) {
    static constexpr const char* kNames[] = {"error", "warn", "info", "debug"};
    if (static_cast<int>(level) > static_cast<int>(log_level())) return;
    std::cerr << "[edupredict " << kNames[static_cast<int>(level)] << "] " << message << '\n';
}

inline void warn(std::string_view message) { log(LogLevel::Warn, message); }
inline void info(std::string_view message) { log(LogLevel::Info, message); }

inline bool is_missing(double v) { return std::isnan(v); }
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

}  // namespace edupredict
