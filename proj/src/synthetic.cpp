#include "depnn/synthetic.hpp"

#include <algorithm>
#include <numeric>

namespace depnn::synthetic {

namespace {

const std::vector<std::string> kPathRelations = {"nsubj", "dobj", "prep_with", "xcomp",
                                                 "rcmod", "vmod", "prep_of", "nn"};
const std::vector<std::string> kSubtreeRelations = {"det", "amod", "nn", "dobj", "prep_on",
                                                    "poss", "advmod", "conj_and"};
const std::vector<std::string> kNoiseWords = {"the", "a", "old", "red", "quickly", "Sabbath",
                                              "commandment", "ignition", "valves", "of"};
const std::vector<std::string> kNerTags = {"PERSON", "ORGANIZATION", "LOCATION", "O"};
const std::vector<std::string> kWordNetTags = {"noun.person", "noun.artifact", "noun.act", "noun.group"};

template <typename T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& items) {
    return items[std::uniform_int_distribution<std::size_t>(0, items.size() - 1)(rng)];
}

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Nodes are built with provisional ids 0..n-1 and renumbered by a random
// permutation at the end so token order carries no structure.
struct Builder {
    struct Node {
        std::string form;
        int head = -1;  // provisional id, -1 for the root
        std::string relation;
        std::optional<std::string> ner, wn;
    };
    std::vector<Node> nodes;

    int add(std::string form, int head, std::string relation) {
        nodes.push_back({std::move(form), head, std::move(relation), {}, {}});
        return static_cast<int>(nodes.size()) - 1;
    }

    void grow(std::mt19937_64& rng, int parent, int depth_left) {
        if (depth_left <= 0) {
            return;
        }
        const int kids = uniform(rng, 0, 2);
        for (int k = 0; k < kids; ++k) {
            const int child = add(pick(rng, kNoiseWords), parent, pick(rng, kSubtreeRelations));
            if (uniform(rng, 0, 1) == 1) {
                grow(rng, child, depth_left - 1);
            }
        }
    }

    DependencyGraph finish(std::mt19937_64& rng, std::vector<int>& mapping) const {
        const int n = static_cast<int>(nodes.size());
        mapping.resize(static_cast<std::size_t>(n));
        std::iota(mapping.begin(), mapping.end(), 1);
        std::shuffle(mapping.begin(), mapping.end(), rng);

        std::vector<Token> tokens(static_cast<std::size_t>(n));
        std::vector<Arc> arcs;
        for (int i = 0; i < n; ++i) {
            const auto& node = nodes[static_cast<std::size_t>(i)];
            const TokenIndex idx = mapping[static_cast<std::size_t>(i)];
            tokens[static_cast<std::size_t>(idx - 1)] = Token{idx, node.form, std::nullopt, node.ner, node.wn};
            arcs.push_back({node.head < 0 ? kRootHead : mapping[static_cast<std::size_t>(node.head)], idx,
                            node.head < 0 ? "root" : node.relation});
        }
        return DependencyGraph(std::move(tokens), std::move(arcs));
    }
};

struct Built {
    DependencyGraph graph;
    TokenIndex e1 = 0;
    TokenIndex e2 = 0;
};

Built build_path_tree(std::mt19937_64& rng, const ExampleShape& shape) {
    const int m = shape.path_words;
    if (m < 1) {
        throw std::invalid_argument("path must have at least one word");
    }
    Builder b;
    const int top = uniform(rng, 0, m - 1);
    const bool ancestor = uniform(rng, 0, 1) == 1;
    int above = -1;
    if (ancestor) {
        above = b.add("said", -1, "root");
        b.grow(rng, above, 2);
    }
    std::vector<int> path(static_cast<std::size_t>(m));
    const int cue_at = uniform(rng, 0, m - 1);
    auto form_for = [&](int j) {
        if (shape.label_cue && j == cue_at) {
            return "cue" + std::to_string(shape.label);
        }
        return std::string(j == 0 || j == m - 1 ? "entity" : "verb") + std::to_string(uniform(rng, 0, 5));
    };
    path[static_cast<std::size_t>(top)] = b.add(form_for(top), above, ancestor ? "ccomp" : "root");
    for (int j = top - 1; j >= 0; --j) {
        path[static_cast<std::size_t>(j)] = b.add(form_for(j), path[static_cast<std::size_t>(j + 1)], pick(rng, kPathRelations));
    }
    for (int j = top + 1; j < m; ++j) {
        path[static_cast<std::size_t>(j)] = b.add(form_for(j), path[static_cast<std::size_t>(j - 1)], pick(rng, kPathRelations));
    }
    for (int j = 0; j < m; ++j) {
        b.grow(rng, path[static_cast<std::size_t>(j)], shape.max_subtree_depth);
    }
    for (int end : {path.front(), path.back()}) {
        b.nodes[static_cast<std::size_t>(end)].ner = pick(rng, kNerTags);
        b.nodes[static_cast<std::size_t>(end)].wn = pick(rng, kWordNetTags);
    }
    std::vector<int> mapping;
    Built out{b.finish(rng, mapping), 0, 0};
    out.e1 = mapping[static_cast<std::size_t>(path.front())];
    out.e2 = mapping[static_cast<std::size_t>(path.back())];
    return out;
}

} // namespace

DependencyGraph random_tree(std::mt19937_64& rng, int n) {
    Builder b;
    for (int i = 0; i < n; ++i) {
        const int head = i == 0 ? -1 : uniform(rng, 0, i - 1);
        b.add("t" + std::to_string(i), head, pick(rng, kPathRelations));
    }
    std::vector<int> mapping;
    return b.finish(rng, mapping);
}

Example random_example(std::mt19937_64& rng, const ExampleShape& shape, int id) {
    auto built = build_path_tree(rng, shape);
    Example ex;
    ex.instance.id = id;
    ex.instance.e1 = {built.e1, built.e1, built.e1};
    ex.instance.e2 = {built.e2, built.e2, built.e2};
    ex.instance.gold = shape.label;
    ex.instance.graph = std::move(built.graph);
    ex.adp = build_adp(ex.instance.graph, ex.instance.e1, ex.instance.e2);
    return ex;
}

std::vector<Instance> separable_corpus(std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Instance> out;
    for (std::size_t i = 0; i < count; ++i) {
        ExampleShape shape;
        shape.path_words = uniform(rng, 2, 4);
        shape.max_subtree_depth = 2;
        shape.label = static_cast<int>(i % labels::kCount);
        shape.label_cue = true;
        auto built = build_path_tree(rng, shape);
        out.push_back(make_instance(static_cast<int>(i + 1), std::move(built.graph), built.e1, built.e1, built.e2,
                                    built.e2, shape.label));
    }
    return out;
}

ModelConfig small_config() {
    ModelConfig config;
    config.dim = 6;
    config.dim_c = 4;
    config.hidden = 12;
    config.window = 5;
    config.dim_lex = 3;
    return config;
}

void spread_for_gradient_check(Model& model, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.2, 0.2);
    for (auto& [name, p] : model.store()) {
        if (p.init == InitKind::Zero) {
            p.value = p.value.unaryExpr([&](double) { return dist(rng); });
        }
    }
    model.store().at(param::kWordEmbedding).value *= 30.0;
    model.store().at(param::kRelationEmbedding).value *= 30.0;
}

} // namespace depnn::synthetic
