#pragma once

#include <string>
#include <vector>

#include "depnn/adp.hpp"
#include "depnn/model.hpp"

namespace depnn {

/// Forward cache for one path word and everything hanging below it.
struct SubtreeEncoding {
    struct Node {
        TokenIndex token = 0;
        int word_column = 0;
        Vector c;  ///< subtree vector, c_LEAF for leaves
        Vector p;  ///< [x_w, c_w]
        /// (node index, composition parameter name), ascending token order.
        std::vector<std::pair<std::size_t, std::string>> children;

        bool leaf() const noexcept { return children.empty(); }
    };

    /// Post-order; the path word itself is the last node.
    std::vector<Node> nodes;
    /// Number of token embeddings read while encoding.
    std::size_t tokens_read = 0;

    const Node& root() const { return nodes.back(); }
    const Vector& p() const { return nodes.back().p; }
    const Vector& c() const { return nodes.back().c; }
};

/// Bottom-up composition c_w = tanh(sum_q W_{R(w,q)} p_q + b) over the
/// attached-subtree children of `word` only; returns the cache whose root
/// holds p_w = [x_w, c_w].
SubtreeEncoding encode_word(const DependencyGraph& graph, const AugmentedDependencyPath& adp,
                            TokenIndex word, const Model& model);

/// Accumulates gradients for the word embeddings, composition matrices,
/// composition bias and c_LEAF given the gradient on p_w.
void encode_backward(const SubtreeEncoding& encoding, const Eigen::Ref<const Vector>& upstream,
                     Model& model);

} // namespace depnn
