#include "depnn/evaluation.hpp"

#include <algorithm>
#include <cstdio>

namespace depnn {

EvaluationReport score(std::span<const int> gold, std::span<const int> predicted) {
    if (gold.size() != predicted.size()) {
        throw LengthMismatch("score: " + std::to_string(gold.size()) + " gold labels but " +
                             std::to_string(predicted.size()) + " predictions");
    }
    EvaluationReport report;
    report.total = static_cast<long>(gold.size());
    long exact = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const int g = gold[i];
        const int p = predicted[i];
        if (g < 0 || g >= labels::kCount || p < 0 || p >= labels::kCount) {
            throw DataError("label index out of range");
        }
        ++report.confusion[static_cast<std::size_t>(g)][static_cast<std::size_t>(p)];
        exact += g == p ? 1 : 0;
        const int gt = labels::type_of(g);
        const int pt = labels::type_of(p);
        if (gt >= 0) {
            ++report.types[static_cast<std::size_t>(gt)].gold;
        }
        if (pt >= 0) {
            ++report.types[static_cast<std::size_t>(pt)].predicted;
            if (g == p) {
                ++report.types[static_cast<std::size_t>(pt)].correct;
            }
        }
    }

    for (int t = 0; t < labels::kTypeCount; ++t) {
        auto& s = report.types[static_cast<std::size_t>(t)];
        s.name = labels::type_names()[static_cast<std::size_t>(t)];
        s.precision = s.predicted ? static_cast<double>(s.correct) / static_cast<double>(s.predicted) : 0.0;
        s.recall = s.gold ? static_cast<double>(s.correct) / static_cast<double>(s.gold) : 0.0;
        s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
        report.macro_precision += s.precision;
        report.macro_recall += s.recall;
        report.macro_f1 += s.f1;
    }
    report.macro_precision /= labels::kTypeCount;
    report.macro_recall /= labels::kTypeCount;
    report.macro_f1 /= labels::kTypeCount;
    report.accuracy = report.total ? static_cast<double>(exact) / static_cast<double>(report.total) : 0.0;
    return report;
}

std::string render_report(const EvaluationReport& report) {
    std::string out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s %7s %7s %7s %7s %7s %7s\n", "Relation", "correct", "pred", "gold",
                  "P", "R", "F1");
    out += buf;
    for (const auto& s : report.types) {
        std::snprintf(buf, sizeof buf, "%-20s %7ld %7ld %7ld %7.4f %7.4f %7.4f\n", s.name.c_str(), s.correct,
                      s.predicted, s.gold, s.precision, s.recall, s.f1);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-20s %31.4f %7.4f %7.4f\n", "Macro (excl. Other)", report.macro_precision,
                  report.macro_recall, report.macro_f1);
    out += buf;
    std::snprintf(buf, sizeof buf, "Accuracy %.4f over %ld instances\n", report.accuracy, report.total);
    out += buf;
    return out;
}

std::string render_metrics(const EvaluationReport& report) {
    std::string out;
    char buf[160];
    auto line = [&](const std::string& name, double value) {
        std::snprintf(buf, sizeof buf, "%s\t%.6f\n", name.c_str(), value);
        out += buf;
    };
    line("macro_f1", report.macro_f1);
    line("macro_precision", report.macro_precision);
    line("macro_recall", report.macro_recall);
    line("accuracy", report.accuracy);
    line("instances", static_cast<double>(report.total));
    for (const auto& s : report.types) {
        line("f1." + s.name, s.f1);
        line("precision." + s.name, s.precision);
        line("recall." + s.name, s.recall);
    }
    return out;
}

std::vector<RelationDelta> per_relation_delta(const EvaluationReport& before, const EvaluationReport& after) {
    std::vector<RelationDelta> out;
    for (int t = 0; t < labels::kTypeCount; ++t) {
        const auto& a = before.types[static_cast<std::size_t>(t)];
        const auto& b = after.types[static_cast<std::size_t>(t)];
        out.push_back({labels::type_names()[static_cast<std::size_t>(t)], a.f1, b.f1, b.f1 - a.f1});
    }
    return out;
}

std::string render_deltas(const std::vector<RelationDelta>& deltas) {
    std::string out;
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-20s %8s %10s %8s\n", "Relation", "No SUB", "With SUB", "Change");
    out += buf;
    for (const auto& d : deltas) {
        std::snprintf(buf, sizeof buf, "%-20s %8.3f %10.3f %+8.3f\n", d.name.c_str(), d.f1_before, d.f1_after,
                      d.change);
        out += buf;
    }
    return out;
}

NeighborList nearest_paths(const Vector& query, std::span<const PathVector> candidates, std::size_t top_n) {
    if (query.norm() == 0.0) {
        throw ZeroVector("query path vector has zero norm");
    }
    NeighborList out;
    for (const auto& c : candidates) {
        if (c.path.norm() == 0.0) {
            out.skipped.push_back(c.id);
            continue;
        }
        out.ranked.push_back({c.id, cosine(query, c.path)});
    }
    std::sort(out.ranked.begin(), out.ranked.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.id < b.id;
    });
    if (out.ranked.size() > top_n) {
        out.ranked.resize(top_n);
    }
    return out;
}

NeighborList nearest_paths(const Example& query, std::span<const Example> candidates, const Model& model,
                           std::size_t top_n) {
    std::vector<PathVector> vectors;
    vectors.reserve(candidates.size());
    for (const auto& c : candidates) {
        vectors.push_back({c.instance.id, forward(c, model).path});
    }
    return nearest_paths(forward(query, model).path, vectors, top_n);
}

} // namespace depnn
