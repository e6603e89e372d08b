#pragma once

#include <vector>

#include "depnn/model.hpp"

namespace depnn {

/// [r_s, w_1, r_1, ..., w_m, r_e]: words at odd positions, relations
/// (including the sentinels) at even positions.
struct PathSequence {
    std::vector<Vector> items;

    std::size_t word_count() const { return items.size() / 2; }
    static bool is_word_position(std::size_t pos) { return pos % 2 == 1; }
};

struct WindowSlot {
    enum class Kind { Word, Relation, Pad };
    Kind kind = Kind::Word;
    /// Position in the path sequence; unused for Pad.
    std::size_t position = 0;

    bool operator==(const WindowSlot&) const = default;
};

using Window = std::vector<WindowSlot>;

/// One window per path word, centred on it, spanning k consecutive
/// positions. Out-of-range word slots take the pad vector, out-of-range
/// relation slots the nearer sentinel. Throws InvalidWindowSize unless k is odd and >= 3.
std::vector<Window> build_windows(std::size_t word_count, int k);

/// Elementwise max over feature vectors; ties go to the lowest index.
struct PooledFeatures {
    Vector pooled;
    std::vector<int> argmax;
};
PooledFeatures max_pool(const std::vector<Vector>& features);

struct ConvolutionOutput {
    std::vector<Window> windows;
    std::vector<Vector> inputs;    ///< X_i
    std::vector<Vector> features;  ///< L_i
    Vector pooled;                 ///< L
    std::vector<int> argmax;
    bool tanh = true;
};

/// L_i = tanh(W_1 X_i + b_1) for every window, then max-over-time pooling.
ConvolutionOutput conv_forward(const PathSequence& sequence, std::vector<Window> windows,
                               const Model& model);

struct ConvolutionGradients {
    std::vector<Vector> items;  ///< one per sequence position
    Vector pad;
};

/// Routes each upstream coordinate to its argmax window; accumulates W_1,
/// b_1 and pad gradients in the store and returns gradients on the items.
ConvolutionGradients conv_backward(const ConvolutionOutput& output, const PathSequence& sequence,
                                   const Eigen::Ref<const Vector>& upstream, Model& model);

} // namespace depnn
