#include "depnn/subtree_encoder.hpp"

#include <map>

namespace depnn {

namespace {

struct Encoder {
    const DependencyGraph& graph;
    const Model& model;
    const std::map<TokenIndex, std::vector<const Arc*>>& children;
    SubtreeEncoding& out;

    std::size_t encode(TokenIndex token) {
        SubtreeEncoding::Node node;
        node.token = token;
        node.word_column = model.words().lookup(graph.token(token).form);
        ++out.tokens_read;

        const auto& store = model.store();
        const int dim = model.config().dim;
        const int dim_c = model.config().dim_c;

        if (auto it = children.find(token); it != children.end()) {
            Vector sum = store.value(param::kCompositionBias);
            for (const Arc* arc : it->second) {
                const std::size_t child = encode(arc->dependent);
                const auto& name = model.composition_param(arc->relation);
                sum.noalias() += store.value(name) * out.nodes[child].p;
                node.children.emplace_back(child, name);
            }
            node.c = tanh_forward(sum);
        } else {
            node.c = store.value(param::kLeaf);
        }

        node.p.resize(dim + dim_c);
        node.p.head(dim) = store.value(param::kWordEmbedding).col(node.word_column);
        node.p.tail(dim_c) = node.c;
        out.nodes.push_back(std::move(node));
        return out.nodes.size() - 1;
    }
};

} // namespace

SubtreeEncoding encode_word(const DependencyGraph& graph, const AugmentedDependencyPath& adp,
                            TokenIndex word, const Model& model) {
    if (!model.config().use_subtrees) {
        throw std::logic_error("encode_word called on a model without subtree parameters");
    }
    std::map<TokenIndex, std::vector<const Arc*>> children;
    if (auto it = adp.subtrees.find(word); it != adp.subtrees.end()) {
        // Arcs are sorted by dependent, so each child list is ascending.
        for (const Arc& arc : it->second) {
            children[arc.head].push_back(&arc);
        }
    }
    SubtreeEncoding out;
    Encoder{graph, model, children, out}.encode(word);
    return out;
}

void encode_backward(const SubtreeEncoding& encoding, const Eigen::Ref<const Vector>& upstream,
                     Model& model) {
    auto& store = model.store();
    const int dim = model.config().dim;
    const int dim_c = model.config().dim_c;

    std::vector<Vector> grad_p(encoding.nodes.size(), Vector::Zero(dim + dim_c));
    grad_p.back() = upstream;

    auto& words = store.at(param::kWordEmbedding);
    auto& leaf = store.at(param::kLeaf);
    // Parents always follow their children in post-order, so a reverse sweep
    // sees each node's full upstream gradient before visiting it.
    for (std::size_t i = encoding.nodes.size(); i-- > 0;) {
        const auto& node = encoding.nodes[i];
        const Vector& g = grad_p[i];
        words.grad_col(node.word_column) += g.head(dim);
        if (node.leaf()) {
            leaf.grad_dense() += g.tail(dim_c);
            continue;
        }
        const Vector dz = tanh_backward(node.c, g.tail(dim_c));
        store.at(param::kCompositionBias).grad_dense() += dz;
        for (const auto& [child, name] : node.children) {
            auto& w = store.at(name);
            w.grad_dense().noalias() += dz * encoding.nodes[child].p.transpose();
            grad_p[child].noalias() += w.value.transpose() * dz;
        }
    }
}

} // namespace depnn
