#include "depnn/path_encoder.hpp"

namespace depnn {

std::vector<Window> build_windows(std::size_t word_count, int k) {
    if (k < 3 || k % 2 == 0) {
        throw InvalidWindowSize("window size must be odd and >= 3, got " + std::to_string(k));
    }
    const auto half = static_cast<long>(k - 1) / 2;
    const auto last = static_cast<long>(2 * word_count);  // position of r_e

    std::vector<Window> windows;
    for (std::size_t w = 0; w < word_count; ++w) {
        const long centre = static_cast<long>(2 * w + 1);
        Window window;
        for (long offset = -half; offset <= half; ++offset) {
            const long pos = centre + offset;
            const bool word_slot = offset % 2 == 0;
            if (pos >= 0 && pos <= last) {
                window.push_back({word_slot ? WindowSlot::Kind::Word : WindowSlot::Kind::Relation,
                                  static_cast<std::size_t>(pos)});
            } else if (word_slot) {
                window.push_back({WindowSlot::Kind::Pad, 0});
            } else {
                window.push_back({WindowSlot::Kind::Relation, static_cast<std::size_t>(pos < 0 ? 0 : last)});
            }
        }
        windows.push_back(std::move(window));
    }
    return windows;
}

PooledFeatures max_pool(const std::vector<Vector>& features) {
    PooledFeatures out;
    if (features.empty()) {
        throw EmptyPath("max pooling over an empty feature map");
    }
    out.pooled = features.front();
    out.argmax.assign(static_cast<std::size_t>(out.pooled.size()), 0);
    for (std::size_t i = 1; i < features.size(); ++i) {
        for (Eigen::Index j = 0; j < out.pooled.size(); ++j) {
            if (features[i](j) > out.pooled(j)) {
                out.pooled(j) = features[i](j);
                out.argmax[static_cast<std::size_t>(j)] = static_cast<int>(i);
            }
        }
    }
    return out;
}

ConvolutionOutput conv_forward(const PathSequence& sequence, std::vector<Window> windows,
                               const Model& model) {
    const auto& store = model.store();
    const Matrix& filter = store.value(param::kFilter);
    const Matrix& bias = store.value(param::kFilterBias);
    const Matrix& pad = store.value(param::kPad);

    ConvolutionOutput out;
    out.tanh = model.config().conv_tanh;
    for (const auto& window : windows) {
        Eigen::Index width = 0;
        for (const auto& slot : window) {
            width += slot.kind == WindowSlot::Kind::Pad ? pad.size() : sequence.items.at(slot.position).size();
        }
        Vector x(width);
        Eigen::Index offset = 0;
        for (const auto& slot : window) {
            if (slot.kind == WindowSlot::Kind::Pad) {
                x.segment(offset, pad.size()) = pad.col(0);
                offset += pad.size();
            } else {
                const Vector& item = sequence.items[slot.position];
                x.segment(offset, item.size()) = item;
                offset += item.size();
            }
        }
        Vector pre = matvec(filter, x) + bias.col(0);
        out.features.push_back(out.tanh ? tanh_forward(pre) : pre);
        out.inputs.push_back(std::move(x));
    }
    auto pooled = max_pool(out.features);
    out.pooled = std::move(pooled.pooled);
    out.argmax = std::move(pooled.argmax);
    out.windows = std::move(windows);
    return out;
}

ConvolutionGradients conv_backward(const ConvolutionOutput& output, const PathSequence& sequence,
                                   const Eigen::Ref<const Vector>& upstream, Model& model) {
    auto& store = model.store();
    auto& filter = store.at(param::kFilter);
    auto& bias = store.at(param::kFilterBias);
    const Eigen::Index pad_size = store.value(param::kPad).size();

    ConvolutionGradients grads;
    for (const auto& item : sequence.items) {
        grads.items.push_back(Vector::Zero(item.size()));
    }
    grads.pad = Vector::Zero(pad_size);

    const Eigen::Index l = output.pooled.size();
    for (std::size_t i = 0; i < output.windows.size(); ++i) {
        Vector delta = Vector::Zero(l);
        bool any = false;
        for (Eigen::Index j = 0; j < l; ++j) {
            if (output.argmax[static_cast<std::size_t>(j)] == static_cast<int>(i) && upstream(j) != 0.0) {
                delta(j) = upstream(j);
                any = true;
            }
        }
        if (!any) {
            continue;
        }
        if (output.tanh) {
            delta = tanh_backward(output.features[i], delta);
        }
        filter.grad_dense().noalias() += delta * output.inputs[i].transpose();
        bias.grad_dense() += delta;
        const Vector dx = filter.value.transpose() * delta;

        Eigen::Index offset = 0;
        for (const auto& slot : output.windows[i]) {
            if (slot.kind == WindowSlot::Kind::Pad) {
                grads.pad += dx.segment(offset, pad_size);
                offset += pad_size;
            } else {
                auto& g = grads.items[slot.position];
                g += dx.segment(offset, g.size());
                offset += g.size();
            }
        }
    }
    store.at(param::kPad).grad_dense() += grads.pad;
    return grads;
}

} // namespace depnn
