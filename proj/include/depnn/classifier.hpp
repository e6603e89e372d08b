#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "depnn/adp.hpp"
#include "depnn/corpus_io.hpp"
#include "depnn/model.hpp"
#include "depnn/path_encoder.hpp"
#include "depnn/subtree_encoder.hpp"

namespace depnn {

struct TrainConfig {
    ModelConfig model;
    double learning_rate = 0.05;
    int epochs = 25;
    std::uint64_t seed = 1;
    bool shuffle = true;

    /// Cross-validated settings for the two published embedding sizes
    /// (50: dim_c 25, l 200; 200: dim_c 100, l 400; both k 5, rate 0.05).
    /// Other sizes keep the 50-d row.
    static TrainConfig for_embedding_dim(int dim);
    void validate() const;
};

/// An instance together with its augmented dependency path.
struct Example {
    Instance instance;
    AugmentedDependencyPath adp;
};

Example prepare(Instance instance);
std::vector<Example> prepare_all(std::vector<Instance> instances);

struct Prediction {
    int label = labels::kOther;
    Vector distribution;  ///< y over the 19 labels
    Vector path;          ///< pooled convolution output L
};

/// Everything the backward pass needs.
struct ForwardPass {
    std::vector<TokenIndex> words;
    std::vector<int> word_columns;
    std::vector<SubtreeEncoding> subtrees;  ///< empty when subtrees are disabled
    /// Relation-vocabulary column per even sequence position.
    std::vector<int> relation_columns;
    PathSequence sequence;
    ConvolutionOutput conv;
    /// (parameter name, column) feeding each lexical feature block.
    std::vector<std::pair<std::string, int>> lexical_sources;
    Vector features;  ///< M = [L, LEX]
    Prediction prediction;
};

/// Builds the vocabularies from training examples, registers all tensors and
/// initializes them. Words found in `pretrained` start from those vectors;
/// its mean vector becomes the UNK row. `extra_vocabulary` adds words (only
/// when pretrained vectors exist for them) so held-out data can use them.
Model create_model(const ModelConfig& config, std::span<const Example> training, std::uint64_t seed,
                   const EmbeddingTable* pretrained = nullptr,
                   std::span<const Example> extra_vocabulary = {});

ForwardPass forward_pass(const Example& example, const Model& model);
Prediction forward(const Example& example, const Model& model);

/// -log y[gold], clamped at probability 1e-300.
double loss(const Prediction& prediction, int gold);

/// Accumulates the cross-entropy gradient of every parameter in the store.
void backward(const ForwardPass& pass, int gold, Model& model);

/// Forward, backward and an SGD update of every touched parameter. Returns
/// the loss before the update. Throws NonFiniteLoss.
double train_step(const Example& example, Model& model, double learning_rate);

struct EpochReport {
    int epoch = 0;
    double mean_loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> validation_macro_f1;
};

struct TrainingReport {
    std::vector<EpochReport> epochs;
};

using ProgressSink = std::function<void(const EpochReport&)>;

/// Seeded per-epoch shuffled SGD over every labelled example.
TrainingReport train(std::span<const Example> dataset, Model& model, const TrainConfig& config,
                     const ProgressSink& progress = {}, std::span<const Example> validation = {});

std::vector<Prediction> predict_all(std::span<const Example> examples, const Model& model);

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Shuffled k-way partition of [0, n).
std::vector<Fold> kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed);

/// Macro-F1 of each fold after training on the others.
std::vector<double> cross_validate(std::span<const Example> dataset, const TrainConfig& config, std::size_t k,
                                   const EmbeddingTable* pretrained = nullptr);

} // namespace depnn
