#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "depnn/classifier.hpp"

namespace depnn::synthetic {

/// Uniformly shuffled random tree over n tokens with random relation labels.
DependencyGraph random_tree(std::mt19937_64& rng, int n);

struct ExampleShape {
    int path_words = 3;      ///< 1..6
    int max_subtree_depth = 3;
    int label = labels::kOther;
    /// Forms of path words are "cue<label>" at one position when true.
    bool label_cue = false;
};

/// A random example whose ADP has exactly `path_words` words and subtrees of
/// depth at most `max_subtree_depth`. Entity mentions are single tokens; a
/// one-word path puts both entities on the same token.
Example random_example(std::mt19937_64& rng, const ExampleShape& shape, int id = 0);

/// Labels cycle through all 19 classes; each instance carries a
/// label-specific cue word on its path, so the set is separable.
std::vector<Instance> separable_corpus(std::size_t count, std::uint64_t seed);

/// Settings small enough for fast gradient checks and overfitting runs.
ModelConfig small_config();

/// Moves an initialized model to a generic point for gradient checking:
/// zero-initialized tensors get uniform values in [-0.2, 0.2] and the word
/// and relation tables are scaled by 30, so tanh units sit in their curved range.
void spread_for_gradient_check(Model& model, std::uint64_t seed);

inline constexpr std::size_t kBundledSize = 50;
inline constexpr std::uint64_t kBundledSeed = 2015;

} // namespace depnn::synthetic
