#include "depnn/adp.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>

namespace depnn {

DependencyGraph::DependencyGraph(std::vector<Token> tokens, std::vector<Arc> arcs)
    : tokens_(std::move(tokens)) {
    const auto n = static_cast<TokenIndex>(tokens_.size());
    for (TokenIndex i = 0; i < n; ++i) {
        if (tokens_[i].index != i + 1) {
            throw TreeViolation("token indices must run 1.." + std::to_string(n) + ", found " +
                                std::to_string(tokens_[i].index) + " at position " +
                                std::to_string(i + 1));
        }
    }

    head_.assign(n + 1, kInactive);
    relation_.assign(n + 1, std::string{});
    children_.assign(n + 1, {});

    int roots = 0;
    for (const auto& arc : arcs) {
        if (arc.dependent < 1 || arc.dependent > n) {
            throw TreeViolation("arc dependent " + std::to_string(arc.dependent) + " out of range");
        }
        if (arc.head < 0 || arc.head > n) {
            throw TreeViolation("arc head " + std::to_string(arc.head) + " out of range");
        }
        if (arc.head == arc.dependent) {
            throw TreeViolation("token " + std::to_string(arc.dependent) + " heads itself");
        }
        if (head_[arc.dependent] != kInactive) {
            throw TreeViolation("token " + std::to_string(arc.dependent) + " has two heads");
        }
        head_[arc.dependent] = arc.head;
        relation_[arc.dependent] = arc.relation;
        if (arc.head == kRootHead) {
            ++roots;
            root_ = arc.dependent;
        }
    }
    if (!arcs.empty() && roots != 1) {
        throw TreeViolation("expected exactly one root arc, found " + std::to_string(roots));
    }

    for (TokenIndex d = 1; d <= n; ++d) {
        if (head_[d] == kInactive) {
            continue;
        }
        if (head_[d] != kRootHead && head_[head_[d]] == kInactive) {
            throw TreeViolation("token " + std::to_string(d) + " is headed by inactive token " +
                                std::to_string(head_[d]));
        }
        children_[head_[d]].push_back(d);
    }

    // Every active token must reach the root within n steps.
    for (TokenIndex d = 1; d <= n; ++d) {
        if (head_[d] == kInactive) {
            continue;
        }
        TokenIndex cur = d;
        int steps = 0;
        while (cur != kRootHead) {
            cur = head_[cur];
            if (++steps > n) {
                throw TreeViolation("cycle through token " + std::to_string(d));
            }
        }
    }
}

const Token& DependencyGraph::token(TokenIndex i) const {
    if (!contains(i)) {
        throw InvalidSpan("token index " + std::to_string(i) + " out of range");
    }
    return tokens_[i - 1];
}

std::vector<Arc> DependencyGraph::arcs() const {
    std::vector<Arc> out;
    for (TokenIndex d = 1; d < static_cast<TokenIndex>(head_.size()); ++d) {
        if (head_[d] != kInactive) {
            out.push_back({head_[d], d, relation_[d]});
        }
    }
    return out;
}

int DependencyGraph::depth(TokenIndex i) const {
    int depth = 0;
    for (TokenIndex cur = head_.at(i); cur != kRootHead && cur != kInactive; cur = head_[cur]) {
        ++depth;
    }
    return depth;
}

std::string directed_label(const std::string& relation, Direction direction) {
    return direction == Direction::Inverse ? relation + "_inv" : relation;
}

std::vector<TokenIndex> AugmentedDependencyPath::words() const {
    std::vector<TokenIndex> out;
    for (const auto& e : elements) {
        if (e.is_word()) {
            out.push_back(e.token);
        }
    }
    return out;
}

std::size_t AugmentedDependencyPath::word_count() const {
    return static_cast<std::size_t>(
        std::count_if(elements.begin(), elements.end(), [](const auto& e) { return e.is_word(); }));
}

std::vector<TokenIndex> AugmentedDependencyPath::subtree_tokens(TokenIndex word) const {
    std::vector<TokenIndex> out;
    if (auto it = subtrees.find(word); it != subtrees.end()) {
        for (const auto& arc : it->second) {
            out.push_back(arc.dependent);
        }
    }
    return out;
}

TokenIndex find_entity_head(const DependencyGraph& graph, TokenIndex start, TokenIndex end) {
    if (start > end || !graph.contains(start) || !graph.contains(end)) {
        throw InvalidSpan("invalid entity span [" + std::to_string(start) + ", " +
                          std::to_string(end) + "]");
    }
    TokenIndex best = 0;
    int best_depth = 0;
    for (TokenIndex t = start; t <= end; ++t) {
        if (!graph.is_active(t)) {
            continue;
        }
        const TokenIndex h = graph.head(t);
        if (h >= start && h <= end) {
            continue;
        }
        const int d = graph.depth(t);
        if (best == 0 || d < best_depth) {
            best = t;
            best_depth = d;
        }
    }
    if (best == 0) {
        throw InvalidSpan("span [" + std::to_string(start) + ", " + std::to_string(end) +
                          "] has no active token");
    }
    return best;
}

std::vector<PathStep> shortest_path(const DependencyGraph& graph, TokenIndex from, TokenIndex to) {
    if (!graph.contains(from) || !graph.contains(to)) {
        throw InvalidSpan("path endpoint out of range");
    }
    if (from == to) {
        return {PathStep{from, {}, Direction::Forward}};
    }
    if (!graph.is_active(from) || !graph.is_active(to)) {
        throw Disconnected("path endpoint is not attached to the tree");
    }

    std::vector<TokenIndex> parent(graph.size() + 1, kInactive);
    std::deque<TokenIndex> queue{from};
    parent[from] = from;
    while (!queue.empty() && parent[to] == kInactive) {
        const TokenIndex cur = queue.front();
        queue.pop_front();
        auto visit = [&](TokenIndex next) {
            if (next != kRootHead && parent[next] == kInactive) {
                parent[next] = cur;
                queue.push_back(next);
            }
        };
        visit(graph.head(cur));
        for (TokenIndex c : graph.children(cur)) {
            visit(c);
        }
    }
    if (parent[to] == kInactive) {
        throw Disconnected("no path between tokens " + std::to_string(from) + " and " +
                           std::to_string(to));
    }

    std::vector<TokenIndex> chain;
    for (TokenIndex cur = to; cur != from; cur = parent[cur]) {
        chain.push_back(cur);
    }
    chain.push_back(from);
    std::reverse(chain.begin(), chain.end());

    std::vector<PathStep> path{PathStep{from, {}, Direction::Forward}};
    for (std::size_t i = 1; i < chain.size(); ++i) {
        const TokenIndex prev = chain[i - 1];
        const TokenIndex cur = chain[i];
        if (graph.head(cur) == prev) {
            path.push_back({cur, graph.relation(cur), Direction::Forward});
        } else {
            path.push_back({cur, graph.relation(prev), Direction::Inverse});
        }
    }
    return path;
}

AugmentedDependencyPath attach_subtrees(const DependencyGraph& graph, const std::vector<PathStep>& path) {
    if (path.empty()) {
        throw EmptyPath("cannot attach subtrees to an empty path");
    }
    std::set<TokenIndex> on_path;
    for (const auto& step : path) {
        on_path.insert(step.token);
    }

    AugmentedDependencyPath adp;
    adp.elements.push_back(PathElement::start());
    for (std::size_t i = 0; i < path.size(); ++i) {
        if (i > 0) {
            adp.elements.push_back(PathElement::rel(path[i].relation, path[i].direction));
        }
        adp.elements.push_back(PathElement::word(path[i].token));
    }
    adp.elements.push_back(PathElement::end());

    for (const auto& step : path) {
        std::vector<Arc> arcs;
        std::vector<TokenIndex> stack{step.token};
        while (!stack.empty()) {
            const TokenIndex cur = stack.back();
            stack.pop_back();
            for (TokenIndex c : graph.children(cur)) {
                if (on_path.contains(c)) {
                    continue;
                }
                arcs.push_back({cur, c, graph.relation(c)});
                stack.push_back(c);
            }
        }
        std::sort(arcs.begin(), arcs.end(),
                  [](const Arc& a, const Arc& b) { return a.dependent < b.dependent; });
        adp.subtrees[step.token] = std::move(arcs);
    }
    return adp;
}

AugmentedDependencyPath build_adp(const DependencyGraph& graph, const EntityMention& e1,
                                  const EntityMention& e2) {
    return attach_subtrees(graph, shortest_path(graph, e1.head, e2.head));
}

DependencyGraph collapse_prepositions(const DependencyGraph& graph) {
    std::vector<Arc> arcs = graph.arcs();
    std::vector<TokenIndex> collapsed;
    for (auto& arc : arcs) {
        const TokenIndex prep = arc.head;
        if (prep == kRootHead || graph.relation(prep) != "prep" || arc.relation != "pobj" ||
            graph.children(prep).size() != 1) {
            continue;
        }
        std::string form = graph.token(prep).form;
        std::transform(form.begin(), form.end(), form.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        arc.head = graph.head(prep);
        arc.relation = "prep_" + form;
        collapsed.push_back(prep);
    }
    std::erase_if(arcs, [&](const Arc& a) {
        return std::find(collapsed.begin(), collapsed.end(), a.dependent) != collapsed.end();
    });
    return DependencyGraph(graph.tokens(), std::move(arcs));
}

std::string render_path(const DependencyGraph& graph, const AugmentedDependencyPath& adp) {
    std::string out;
    for (const auto& e : adp.elements) {
        std::string piece;
        switch (e.kind) {
        case PathElement::Kind::Word:
            piece = graph.token(e.token).form;
            break;
        case PathElement::Kind::Relation:
            piece = directed_label(e.relation, e.direction);
            break;
        default:
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += piece;
    }
    return out;
}

} // namespace depnn
