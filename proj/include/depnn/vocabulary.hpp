#pragma once

#include <string>
#include <unordered_map>
#include <vector>

namespace depnn {

/// String -> dense index map with a reserved unknown entry at index 0.
/// Lookup is total: exact match, then lowercase match, then UNK.
class Vocabulary {
public:
    static constexpr int kUnk = 0;
    static inline const std::string kUnkToken = "<unk>";

    Vocabulary() { add(kUnkToken); }

    int add(const std::string& entry) {
        auto [it, inserted] = index_.try_emplace(entry, static_cast<int>(entries_.size()));
        if (inserted) {
            entries_.push_back(entry);
        }
        return it->second;
    }

    /// Exact index or -1.
    int find(const std::string& entry) const {
        auto it = index_.find(entry);
        return it == index_.end() ? -1 : it->second;
    }

    int lookup(const std::string& entry) const;

    const std::string& entry(int i) const { return entries_.at(static_cast<std::size_t>(i)); }
    const std::vector<std::string>& entries() const noexcept { return entries_; }
    std::size_t size() const noexcept { return entries_.size(); }

    bool operator==(const Vocabulary& other) const { return entries_ == other.entries_; }

private:
    std::vector<std::string> entries_;
    std::unordered_map<std::string, int> index_;
};

std::string to_lower(std::string s);

/// Percent-escapes '%', '|' and whitespace so the result is a single
/// whitespace-free field. A lone "_" is escaped too; it marks absent values.
std::string escape_field(const std::string& raw);
std::string unescape_field(const std::string& field);

} // namespace depnn
