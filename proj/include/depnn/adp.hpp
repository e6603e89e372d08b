#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "depnn/error.hpp"

namespace depnn {

/// 1-based token position; 0 denotes the artificial root.
using TokenIndex = int;

inline constexpr TokenIndex kRootHead = 0;
/// Head value for tokens that take no part in the tree (collapsed prepositions).
inline constexpr TokenIndex kInactive = -1;

struct Token {
    TokenIndex index = 0;
    std::string form;
    std::optional<std::string> lemma;
    std::optional<std::string> ner_tag;
    std::optional<std::string> wn_hypernym;

    bool operator==(const Token&) const = default;
};

struct Arc {
    TokenIndex head = kRootHead;
    TokenIndex dependent = 0;
    std::string relation;

    bool operator==(const Arc&) const = default;
    auto operator<=>(const Arc&) const = default;
};

/// Tokens plus typed head/dependent arcs forming a single-rooted tree over
/// the active tokens. Immutable once constructed.
class DependencyGraph {
public:
    DependencyGraph() = default;

    /// Validates the tree property; throws TreeViolation on cycles, multiple
    /// roots, out-of-range heads, duplicate heads or tokens without a head.
    DependencyGraph(std::vector<Token> tokens, std::vector<Arc> arcs);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<Token>& tokens() const noexcept { return tokens_; }
    const Token& token(TokenIndex i) const;

    /// All arcs, ordered by dependent index (root arc included, head 0).
    std::vector<Arc> arcs() const;

    bool is_active(TokenIndex i) const { return head_.at(i) != kInactive; }
    TokenIndex head(TokenIndex i) const { return head_.at(i); }
    const std::string& relation(TokenIndex i) const { return relation_.at(i); }
    /// Dependents of i in ascending index order. children(0) yields the root.
    const std::vector<TokenIndex>& children(TokenIndex i) const { return children_.at(i); }
    TokenIndex root() const noexcept { return root_; }
    /// Number of arcs between i and the root token.
    int depth(TokenIndex i) const;
    bool contains(TokenIndex i) const noexcept {
        return i >= 1 && static_cast<std::size_t>(i) <= tokens_.size();
    }

    bool operator==(const DependencyGraph& other) const {
        return tokens_ == other.tokens_ && head_ == other.head_ && relation_ == other.relation_;
    }

private:
    std::vector<Token> tokens_;
    // Indexed by token index; slot 0 is the artificial root.
    std::vector<TokenIndex> head_;
    std::vector<std::string> relation_;
    std::vector<std::vector<TokenIndex>> children_;
    TokenIndex root_ = 0;
};

struct EntityMention {
    TokenIndex start = 0;
    TokenIndex end = 0;
    TokenIndex head = 0;

    bool operator==(const EntityMention&) const = default;
};

enum class Direction { Forward, Inverse };

/// Relation label as it appears on a path: inverse arcs get an "_inv" suffix.
std::string directed_label(const std::string& relation, Direction direction);

struct PathStep {
    TokenIndex token = 0;
    /// Arc connecting the previous step's token to this one; empty for the first step.
    std::string relation;
    Direction direction = Direction::Forward;

    bool operator==(const PathStep&) const = default;
};

struct PathElement {
    enum class Kind { Word, Relation, SentinelStart, SentinelEnd };

    Kind kind = Kind::Word;
    TokenIndex token = 0;
    std::string relation;
    Direction direction = Direction::Forward;

    static PathElement word(TokenIndex t) { return {Kind::Word, t, {}, Direction::Forward}; }
    static PathElement rel(std::string label, Direction d) {
        return {Kind::Relation, 0, std::move(label), d};
    }
    static PathElement start() { return {Kind::SentinelStart, 0, {}, Direction::Forward}; }
    static PathElement end() { return {Kind::SentinelEnd, 0, {}, Direction::Forward}; }

    bool is_word() const noexcept { return kind == Kind::Word; }
    bool operator==(const PathElement&) const = default;
};

/// Shortest dependency path between two entity heads with the subtrees
/// hanging off every path word.
struct AugmentedDependencyPath {
    /// SentinelStart, w_1, r_1, w_2, ..., w_m, SentinelEnd.
    std::vector<PathElement> elements;
    /// Off-path arcs under each path word, ordered by dependent index.
    std::map<TokenIndex, std::vector<Arc>> subtrees;

    std::vector<TokenIndex> words() const;
    std::size_t word_count() const;
    /// Tokens reachable through the subtree of `word` (excluding the word itself).
    std::vector<TokenIndex> subtree_tokens(TokenIndex word) const;

    bool operator==(const AugmentedDependencyPath&) const = default;
};

TokenIndex find_entity_head(const DependencyGraph& graph, TokenIndex start, TokenIndex end);

std::vector<PathStep> shortest_path(const DependencyGraph& graph, TokenIndex from, TokenIndex to);

AugmentedDependencyPath attach_subtrees(const DependencyGraph& graph, const std::vector<PathStep>& path);

/// Shortest path between the two entity heads plus attached subtrees.
AugmentedDependencyPath build_adp(const DependencyGraph& graph, const EntityMention& e1,
                                  const EntityMention& e2);

/// Rewrites governor -prep-> P -pobj-> object into governor -prep_<p>-> object.
/// The preposition token stays in the token list but becomes inactive. Only
/// prepositions whose single dependent is their pobj are rewritten.
DependencyGraph collapse_prepositions(const DependencyGraph& graph);

/// "thief nsubj_inv broke prep_with screwdriver"
std::string render_path(const DependencyGraph& graph, const AugmentedDependencyPath& adp);

} // namespace depnn
