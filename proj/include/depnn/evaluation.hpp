#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "depnn/classifier.hpp"
#include "depnn/corpus_io.hpp"

namespace depnn {

/// Direction-sensitive scoring over the nine relation types. A prediction
/// counts toward a type's precision denominator whenever its type matches,
/// but is only a true positive with the exact direction.
struct EvaluationReport {
    struct TypeScore {
        std::string name;
        long correct = 0;
        long predicted = 0;
        long gold = 0;
        double precision = 0.0;
        double recall = 0.0;
        double f1 = 0.0;
    };

    std::array<std::array<long, labels::kCount>, labels::kCount> confusion{};  ///< [gold][predicted]
    std::array<TypeScore, labels::kTypeCount> types;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;  ///< mean of per-type F1, Other excluded
    double accuracy = 0.0;
    long total = 0;
};

EvaluationReport score(std::span<const int> gold, std::span<const int> predicted);

std::string render_report(const EvaluationReport& report);
/// One "name<TAB>value" line per metric.
std::string render_metrics(const EvaluationReport& report);

struct RelationDelta {
    std::string name;
    double f1_before = 0.0;
    double f1_after = 0.0;
    double change = 0.0;
};

/// Type-aligned F1 differences, `after` minus `before`.
std::vector<RelationDelta> per_relation_delta(const EvaluationReport& before, const EvaluationReport& after);
std::string render_deltas(const std::vector<RelationDelta>& deltas);

struct Neighbor {
    int id = 0;
    double similarity = 0.0;
};

struct NeighborList {
    std::vector<Neighbor> ranked;
    std::vector<int> skipped;  ///< candidates with a zero path vector
};

struct PathVector {
    int id = 0;
    Vector path;
};

/// Ranks candidates by cosine similarity to `query`, descending, ties by id.
/// Throws ZeroVector if the query vector is zero.
NeighborList nearest_paths(const Vector& query, std::span<const PathVector> candidates, std::size_t top_n);

/// Same, extracting pooled path vectors with `model`.
NeighborList nearest_paths(const Example& query, std::span<const Example> candidates, const Model& model,
                           std::size_t top_n);

} // namespace depnn
