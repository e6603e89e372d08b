#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "depnn/adp.hpp"
#include "depnn/numerics.hpp"

namespace depnn {

/// The 19 SemEval-2010 task 8 labels: Other followed by the nine relation
/// types in both directions. Index order is fixed.
namespace labels {

inline constexpr int kCount = 19;
inline constexpr int kOther = 0;
inline constexpr int kTypeCount = 9;

const std::array<std::string, kTypeCount>& type_names();
const std::array<std::string, kCount>& names();

/// Throws FormatError for unknown labels.
int index(const std::string& name);
const std::string& name(int label);
/// Relation type 0..8, or -1 for Other.
int type_of(int label);
/// Label for the given type in (e1,e2) or (e2,e1) order.
int directed(int type, bool reversed);

} // namespace labels

struct Instance {
    int id = 0;
    DependencyGraph graph;
    EntityMention e1;
    EntityMention e2;
    std::optional<int> gold;

    bool operator==(const Instance&) const = default;
};

/// One record of the official SemEval release.
struct RawRecord {
    int id = 0;
    std::string text;  ///< sentence with the markers removed
    std::optional<int> label;
    std::string comment;
    /// Byte ranges [begin, end) of the entity strings within `text`.
    std::size_t e1_begin = 0, e1_end = 0, e2_begin = 0, e2_end = 0;
};

std::vector<RawRecord> read_semeval_raw(std::istream& in);
std::vector<RawRecord> read_semeval_raw(const std::filesystem::path& path);

/// DEPNN-INST 1 line format; see docs/formats.md.
std::vector<Instance> read_parsed_instances(std::istream& in);
std::vector<Instance> read_parsed_instances(const std::filesystem::path& path);
void write_parsed_instances(std::ostream& out, std::span<const Instance> instances);
void write_parsed_instances(const std::filesystem::path& path, std::span<const Instance> instances);

/// Validates spans, computes entity heads and assembles an Instance.
Instance make_instance(int id, DependencyGraph graph, TokenIndex e1_start, TokenIndex e1_end,
                       TokenIndex e2_start, TokenIndex e2_end, std::optional<int> gold);

/// One sentence of CoNLL-X / CoNLL-U style parser output.
struct ParsedSentence {
    std::optional<int> id;  ///< from a "# id = N" comment, if present
    std::vector<Token> tokens;
    std::vector<Arc> arcs;
};

/// Ten tab-separated columns (ID FORM LEMMA CPOS POS FEATS HEAD DEPREL ...),
/// blank-line separated. NER and WordNet tags are read from the last column
/// as "NER=<tag>|WN=<tag>".
std::vector<ParsedSentence> read_conll(std::istream& in);

struct ConversionFailure {
    int id = 0;
    std::string reason;
};

struct ConversionResult {
    std::vector<Instance> instances;
    std::vector<ConversionFailure> failures;
};

/// Aligns parser tokens with the raw sentence by character offsets and maps
/// the entity markers to token spans. Sentences carrying an id are matched
/// by id, the rest by position.
ConversionResult convert_corpus(const std::vector<RawRecord>& raw, const std::vector<ParsedSentence>& parses,
                                bool collapse = false);

/// Pretrained vectors, one column per word. Lookup falls back to lowercase,
/// then to `unk` (the mean of all loaded vectors).
struct EmbeddingTable {
    int dim = 0;
    std::vector<std::string> words;
    std::unordered_map<std::string, Eigen::Index> index;
    Matrix vectors;
    Vector unk;

    std::size_t size() const noexcept { return words.size(); }
    /// Column for `word` with lowercase fallback, or -1.
    Eigen::Index find(const std::string& word) const;
    Vector lookup(const std::string& word) const;
};

/// Text format: "word v_1 ... v_dim" per line, optional "count dim" header.
/// `expected_dim` of 0 accepts the dimension of the first vector.
EmbeddingTable load_embeddings(std::istream& in, int expected_dim = 0);
EmbeddingTable load_embeddings(const std::filesystem::path& path, int expected_dim = 0);

struct DatasetStats {
    struct Row {
        std::string name;
        long count = 0;
        double percent = 0.0;
    };
    long total = 0;
    /// Other first, then the nine types in descending count (ties by type order).
    std::vector<Row> rows;

    const Row& row(const std::string& name) const;
};

/// Folds directions into relation types. Unlabelled instances are ignored.
DatasetStats dataset_stats(std::span<const int> labels);
DatasetStats dataset_stats(std::span<const Instance> instances);
std::string render_stats(const DatasetStats& stats);

} // namespace depnn
