#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>

#include "depnn/numerics.hpp"
#include "depnn/vocabulary.hpp"

namespace depnn {

struct ModelConfig {
    int dim = 50;       ///< word and relation embedding size
    int dim_c = 25;     ///< subtree representation size
    int hidden = 200;   ///< convolution output size l
    int window = 5;     ///< k, odd and >= 3
    int dim_lex = 25;   ///< per-feature lexical embedding size
    bool use_subtrees = true;
    bool use_ner = false;
    bool use_wordnet = false;
    bool conv_tanh = true;

    /// Throws std::invalid_argument on non-positive sizes or a bad window.
    void validate() const;
    /// Width of the feature vector M fed to the softmax layer.
    int feature_dim() const;
    bool operator==(const ModelConfig&) const = default;
};

/// Word slots in a word-centred window of size k over the alternating path sequence.
int words_per_window(int k);

namespace param {
inline const std::string kWordEmbedding = "emb.word";
inline const std::string kRelationEmbedding = "emb.rel";
inline const std::string kCompositionPrefix = "comp.W.";
inline const std::string kCompositionDefault = "comp.W.<default>";
inline const std::string kCompositionBias = "comp.b";
inline const std::string kLeaf = "comp.leaf";
inline const std::string kPad = "conv.pad";
inline const std::string kFilter = "conv.W";
inline const std::string kFilterBias = "conv.b";
inline const std::string kNerEmbedding = "lex.ner";
inline const std::string kWordNetEmbedding = "lex.wn";
inline const std::string kOutput = "out.W";
} // namespace param

/// Relation vocabulary entries reserved for the path sentinels r_s and r_e.
inline const std::string kSentinelStart = "<r_s>";
inline const std::string kSentinelEnd = "<r_e>";

/// Vocabularies plus the parameter store of one DepNN network.
class Model {
public:
    static constexpr int kNumLabels = 19;

    Model() = default;
    /// Registers every tensor implied by the config and vocabularies; values are zero.
    Model(ModelConfig config, Vocabulary words, Vocabulary relations, Vocabulary ner_tags,
          Vocabulary wn_tags, std::set<std::string> composition_labels);

    const ModelConfig& config() const noexcept { return config_; }
    const Vocabulary& words() const noexcept { return words_; }
    const Vocabulary& relations() const noexcept { return relations_; }
    const Vocabulary& ner_tags() const noexcept { return ner_tags_; }
    const Vocabulary& wn_tags() const noexcept { return wn_tags_; }
    const std::set<std::string>& composition_labels() const noexcept { return composition_labels_; }

    ParameterStore& store() noexcept { return store_; }
    const ParameterStore& store() const noexcept { return store_; }

    /// Composition matrix parameter for a subtree relation; DEFAULT for unseen labels.
    const std::string& composition_param(const std::string& relation) const;

    void initialize(std::uint64_t seed) { init_uniform(store_, seed); }

    void save(std::ostream& out, DType dtype = DType::F64) const;
    void save(const std::filesystem::path& path, DType dtype = DType::F64) const;
    static Model load(std::istream& in);
    static Model load(const std::filesystem::path& path);

    bool operator==(const Model& other) const;

private:
    ModelConfig config_;
    Vocabulary words_, relations_, ner_tags_, wn_tags_;
    std::set<std::string> composition_labels_;
    std::map<std::string, std::string> composition_names_;
    ParameterStore store_;
};

} // namespace depnn
