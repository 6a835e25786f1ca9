/*
 * Copyright (C) 2026 The edupredict Authors.
 *
 * SPDX-License-Identifier: Apache-2.0
 */
#pragma once

/*! \file
 *  \brief Knowledge-graph snapshot loading, candidate concept lists, the
 *  reference-distance (RefD) prerequisite measure with plain and semantic
 *  weighting, and course-level aggregation.
 */

#include "edupredict/common.hpp"
#include "edupredict/csv.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <deque>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace edupredict::prereq {

inline constexpr const char* kDefaultCategoryPredicate = "http://purl.org/dc/terms/subject";

struct Triple {
    std::string subject;
    std::string predicate;
    std::string object;

    auto operator<=>(const Triple&) const = default;
};

/// Immutable triple store split into hierarchical (category) edges and
/// non-hierarchical link edges, indexed for neighborhood queries.
class KnowledgeGraph {
public:
    explicit KnowledgeGraph(std::set<std::string> category_predicates = {kDefaultCategoryPredicate})
        : category_predicates_(std::move(category_predicates)) {}

    /// Returns false when the triple was already present.
    bool add(Triple t) {
        if (t.subject.empty() || t.predicate.empty() || t.object.empty()) {
            throw Error(ErrorCode::MalformedTriple, "knowledge graph: empty IRI in triple");
        }
        if (!triples_.insert(t).second) return false;
        nodes_.insert(t.subject);
        nodes_.insert(t.object);
        if (category_predicates_.count(t.predicate)) {
            categories_[t.subject].insert(t.object);
            members_[t.object].insert(t.subject);
        } else {
            out_links_[t.subject].insert(t.object);
            in_links_[t.object].insert(t.subject);
        }
        return true;
    }

    std::size_t size() const { return triples_.size(); }
    const std::set<Triple>& triples() const { return triples_; }
    const std::set<std::string>& category_predicates() const { return category_predicates_; }
    bool contains(const std::string& node) const { return nodes_.count(node) > 0; }

    const std::set<std::string>& categories_of(const std::string& c) const { return lookup(categories_, c); }
    const std::set<std::string>& members_of(const std::string& k) const { return lookup(members_, k); }
    const std::set<std::string>& links_from(const std::string& c) const { return lookup(out_links_, c); }
    const std::set<std::string>& links_to(const std::string& c) const { return lookup(in_links_, c); }

    bool has_link(const std::string& from, const std::string& to) const { return links_from(from).count(to) > 0; }

private:
    using Index = std::map<std::string, std::set<std::string>>;

    static const std::set<std::string>& lookup(const Index& idx, const std::string& key) {
        static const std::set<std::string> empty;
        auto it = idx.find(key);
        return it == idx.end() ? empty : it->second;
    }

    std::set<std::string> category_predicates_;
    std::set<Triple> triples_;
    std::set<std::string> nodes_;
    Index categories_, members_, out_links_, in_links_;
};

/// Tab-separated subject/predicate/object lines; '#' lines and blank lines
/// are skipped, duplicates stored once.
inline KnowledgeGraph load_kg(std::istream& in, std::set<std::string> category_predicates = {kDefaultCategoryPredicate},
                              const std::string& source = "<stream>") {
    KnowledgeGraph kg(std::move(category_predicates));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            fields.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        const bool ok = fields.size() == 3 && std::none_of(fields.begin(), fields.end(), [](const std::string& f) { return f.empty(); });
        if (!ok) {
            throw Error(ErrorCode::MalformedTriple, source + ":" + std::to_string(line_no) + ": expected 3 non-empty tab-separated fields, got " +
                                                        std::to_string(fields.size()));
        }
        kg.add({fields[0], fields[1], fields[2]});
    }
    return kg;
}

inline KnowledgeGraph load_kg(const std::filesystem::path& path, std::set<std::string> category_predicates = {kDefaultCategoryPredicate}) {
    auto in = csv::open_input(path);
    return load_kg(in, std::move(category_predicates), path.string());
}

/// Concepts sharing at least one category with c.
inline std::set<std::string> direct_candidates(const KnowledgeGraph& kg, const std::string& c) {
    std::set<std::string> out;
    if (!kg.contains(c)) {
        warn("concept not in knowledge graph: " + c);
        return out;
    }
    for (const auto& k : kg.categories_of(c)) {
        for (const auto& other : kg.members_of(k)) {
            if (other != c) out.insert(other);
        }
    }
    return out;
}

/// Concepts within m link hops of c, following links in either direction.
inline std::set<std::string> neighbor_candidates(const KnowledgeGraph& kg, const std::string& c, std::size_t m = 1) {
    if (m < 1) throw Error(ErrorCode::InvalidConfig, "neighbor_candidates: hop bound must be >= 1");
    std::set<std::string> seen{c};
    std::deque<std::pair<std::string, std::size_t>> queue{{c, 0}};
    while (!queue.empty()) {
        auto [node, depth] = queue.front();
        queue.pop_front();
        if (depth == m) continue;
        for (const auto* adj : {&kg.links_from(node), &kg.links_to(node)}) {
            for (const auto& next : *adj) {
                if (seen.insert(next).second) queue.emplace_back(next, depth + 1);
            }
        }
    }
    seen.erase(c);
    return seen;
}

struct CandidateLists {
    std::string target;
    std::set<std::string> direct;
    std::set<std::string> neighbor;
    std::size_t hops = 1;

    std::set<std::string> all() const {
        std::set<std::string> u = direct;
        u.insert(neighbor.begin(), neighbor.end());
        return u;
    }
};

inline CandidateLists candidate_lists(const KnowledgeGraph& kg, const std::string& c, std::size_t m = 1) {
    return {c, direct_candidates(kg, c), neighbor_candidates(kg, c, m), m};
}

enum class Weighting { Equal, Semantic };
enum class Indicator { Outgoing, EitherDirection };

struct RefdOptions {
    Weighting weighting = Weighting::Equal;
    Indicator indicator = Indicator::Outgoing;
    std::size_t hops = 1;
};

/// Weight of candidate c_j relative to target X.
inline double candidate_weight(const KnowledgeGraph& kg, const std::string& cj, const CandidateLists& target, Weighting mode) {
    if (mode == Weighting::Equal) return target.direct.count(cj) || target.neighbor.count(cj) ? 1.0 : 0.0;
    const auto& own = kg.categories_of(cj);
    if (own.empty()) return 0.0;
    const auto& theirs = kg.categories_of(target.target);
    std::size_t shared = 0;
    for (const auto& k : own) shared += theirs.count(k);
    return static_cast<double>(shared) / static_cast<double>(own.size());
}

inline bool references(const KnowledgeGraph& kg, const std::string& cj, const std::string& x, Indicator mode) {
    return kg.has_link(cj, x) || (mode == Indicator::EitherDirection && kg.has_link(x, cj));
}

/// RefD(A, B) = Σ i(c,B) s(c,A) / Σ s(c,A) − Σ i(c,A) s(c,B) / Σ s(c,B) over
/// the union of both concepts' candidate lists. Positive values mean the
/// concepts around A refer to B more than the reverse, i.e. B is the
/// likelier prerequisite of A.
inline double refd(const KnowledgeGraph& kg, const std::string& a, const std::string& b, const RefdOptions& opts = {}) {
    if (a == b) return 0.0;
    const auto la = candidate_lists(kg, a, opts.hops);
    const auto lb = candidate_lists(kg, b, opts.hops);
    std::set<std::string> universe = la.all();
    const auto ub = lb.all();
    universe.insert(ub.begin(), ub.end());
    universe.erase(a);
    universe.erase(b);
    if (universe.empty()) throw Error(ErrorCode::EmptyCandidates, "refd: no candidate concepts for " + a + " / " + b);

    double num_a = 0.0, den_a = 0.0, num_b = 0.0, den_b = 0.0;
    for (const auto& cj : universe) {
        const double sa = candidate_weight(kg, cj, la, opts.weighting);
        const double sb = candidate_weight(kg, cj, lb, opts.weighting);
        den_a += sa;
        den_b += sb;
        if (references(kg, cj, b, opts.indicator)) num_a += sa;
        if (references(kg, cj, a, opts.indicator)) num_b += sb;
    }
    if (den_a == 0.0 || den_b == 0.0) {
        throw Error(ErrorCode::ZeroWeightDenominator, "refd: candidate weights sum to zero for " + (den_a == 0.0 ? a : b));
    }
    return std::clamp(num_a / den_a - num_b / den_b, -1.0, 1.0);
}

struct Concept {
    std::string iri;
    double confidence = 1.0;
};

struct CourseConcepts {
    std::string course_id;
    std::vector<Concept> concepts;
};

/// {course_id: [{"iri": str, "confidence": decimal}]}, courses in key order.
inline std::vector<CourseConcepts> concepts_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error(ErrorCode::MalformedLine, "concepts: expected a JSON object keyed by course_id");
    std::vector<CourseConcepts> out;
    for (const auto& [course, list] : j.items()) {
        CourseConcepts cc{course, {}};
        std::set<std::string> seen;
        for (const auto& item : list) {
            Concept c{item.at("iri").get<std::string>(), item.value("confidence", 1.0)};
            if (c.iri.empty()) throw Error(ErrorCode::MalformedLine, "concepts: empty iri for course " + course);
            if (seen.insert(c.iri).second) cc.concepts.push_back(std::move(c));
        }
        out.push_back(std::move(cc));
    }
    return out;
}

inline nlohmann::json concepts_to_json(const std::vector<CourseConcepts>& courses) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& cc : courses) {
        nlohmann::json list = nlohmann::json::array();
        for (const auto& c : cc.concepts) list.push_back({{"iri", c.iri}, {"confidence", c.confidence}});
        j[cc.course_id] = list;
    }
    return j;
}

inline std::vector<CourseConcepts> load_concepts(const std::filesystem::path& path) {
    auto in = csv::open_input(path);
    try {
        return concepts_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedLine, path.string() + ": " + e.what());
    }
}

struct ScoreOptions {
    RefdOptions refd;
    /// Multiply each pair's RefD by the product of extraction confidences.
    bool confidence_weighted = false;
    /// Pairs without candidates or with zero weight contribute nothing
    /// instead of failing the whole course pair.
    bool skip_degenerate = false;
};

struct ConceptPairScore {
    std::string a;
    std::string b;
    double refd = 0.0;
    double weight = 1.0;
    bool skipped = false;
};

struct CourseScore {
    double score = 0.0;
    std::vector<ConceptPairScore> pairs;
    std::size_t skipped = 0;
};

/// Σ over (a ∈ A, b ∈ B) of refd(b, a). Positive totals mean A's concepts
/// behave as prerequisites of B's.
inline CourseScore course_prereq_score(const KnowledgeGraph& kg, const CourseConcepts& A, const CourseConcepts& B,
                                       const ScoreOptions& opts = {}) {
    if (A.concepts.empty() || B.concepts.empty()) {
        throw Error(ErrorCode::EmptyCandidates, "course_prereq_score: course '" + (A.concepts.empty() ? A.course_id : B.course_id) +
                                                    "' has no concepts");
    }
    CourseScore out;
    for (const auto& a : A.concepts) {
        for (const auto& b : B.concepts) {
            ConceptPairScore p{a.iri, b.iri, 0.0, opts.confidence_weighted ? a.confidence * b.confidence : 1.0, false};
            try {
                p.refd = refd(kg, b.iri, a.iri, opts.refd);
            } catch (const Error& e) {
                const bool degenerate = e.code() == ErrorCode::EmptyCandidates || e.code() == ErrorCode::ZeroWeightDenominator;
                if (!opts.skip_degenerate || !degenerate) throw;
                p.skipped = true;
                ++out.skipped;
            }
            out.score += p.weight * p.refd;
            out.pairs.push_back(std::move(p));
        }
    }
    return out;
}

enum class Direction { APrereqOfB, BPrereqOfA, SameLevel };

inline const char* to_string(Direction d) {
    switch (d) {
        case Direction::APrereqOfB: return "A_PREREQ_OF_B";
        case Direction::BPrereqOfA: return "B_PREREQ_OF_A";
        case Direction::SameLevel: return "SAME_LEVEL";
    }
    return "SAME_LEVEL";
}

inline constexpr double kDefaultStrongThreshold = 8.0;

inline Direction classify_direction(double score, double strong_threshold = kDefaultStrongThreshold) {
    if (!(strong_threshold > 0.0)) throw Error(ErrorCode::InvalidConfig, "classify_direction: threshold must be > 0");
    if (std::abs(score) < strong_threshold) return Direction::SameLevel;
    return score > 0.0 ? Direction::APrereqOfB : Direction::BPrereqOfA;
}

inline nlohmann::json to_json(const std::string& course_a, const std::string& course_b, const CourseScore& s, Direction d) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : s.pairs) {
        nlohmann::json item = {{"a", p.a}, {"b", p.b}, {"refd", p.refd}};
        if (p.weight != 1.0) item["weight"] = p.weight;
        if (p.skipped) item["skipped"] = true;
        pairs.push_back(item);
    }
    return {{"pair", {course_a, course_b}}, {"score", s.score}, {"direction", to_string(d)}, {"per_concept_pairs", pairs}};
}

}  // namespace edupredict::prereq
