#include "depnn/corpus_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "depnn/vocabulary.hpp"

namespace depnn {

namespace labels {

const std::array<std::string, kTypeCount>& type_names() {
    static const std::array<std::string, kTypeCount> names = {
        "Cause-Effect",     "Entity-Origin",     "Message-Topic",
        "Product-Producer", "Entity-Destination", "Member-Collection",
        "Instrument-Agency", "Component-Whole",  "Content-Container",
    };
    return names;
}

const std::array<std::string, kCount>& names() {
    static const std::array<std::string, kCount> all = [] {
        std::array<std::string, kCount> out;
        out[kOther] = "Other";
        for (int t = 0; t < kTypeCount; ++t) {
            out[1 + 2 * t] = type_names()[t] + "(e1,e2)";
            out[2 + 2 * t] = type_names()[t] + "(e2,e1)";
        }
        return out;
    }();
    return all;
}

int index(const std::string& name) {
    const auto& all = names();
    auto it = std::find(all.begin(), all.end(), name);
    if (it == all.end()) {
        throw FormatError("unknown relation label '" + name + "'");
    }
    return static_cast<int>(it - all.begin());
}

const std::string& name(int label) { return names().at(static_cast<std::size_t>(label)); }

int type_of(int label) { return label == kOther ? -1 : (label - 1) / 2; }

int directed(int type, bool reversed) { return 1 + 2 * type + (reversed ? 1 : 0); }

} // namespace labels

namespace {

void strip_cr(std::string& line) {
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
}

bool blank(const std::string& line) {
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

int parse_int(const std::string& s, const std::string& what, std::size_t line) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("bad " + what + " '" + s + "'", line);
    }
    return value;
}

// Removes the four entity markers, recording the entity byte ranges.
void strip_markers(const std::string& marked, RawRecord& rec, std::size_t line) {
    struct Marker {
        const char* tag;
        std::size_t* slot;
        int seen = 0;
    };
    Marker markers[] = {{"<e1>", &rec.e1_begin}, {"</e1>", &rec.e1_end}, {"<e2>", &rec.e2_begin},
                        {"</e2>", &rec.e2_end}};
    rec.text.clear();
    for (std::size_t i = 0; i < marked.size();) {
        bool matched = false;
        for (auto& m : markers) {
            const std::string_view tag(m.tag);
            if (marked.compare(i, tag.size(), tag) == 0) {
                *m.slot = rec.text.size();
                ++m.seen;
                i += tag.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            rec.text += marked[i++];
        }
    }
    for (const auto& m : markers) {
        if (m.seen != 1) {
            throw FormatError(std::string("marker ") + m.tag + " must appear exactly once", line);
        }
    }
    if (rec.e1_end < rec.e1_begin || rec.e2_end < rec.e2_begin) {
        throw FormatError("entity markers out of order", line);
    }
}

} // namespace

std::vector<RawRecord> read_semeval_raw(std::istream& in) {
    std::vector<RawRecord> records;
    std::string line;
    std::size_t lineno = 0;
    bool open = false;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (blank(line)) {
            open = false;
            continue;
        }
        const auto sep = line.find_first_of(" \t");
        const bool numbered = sep != std::string::npos && sep > 0 &&
                              std::all_of(line.begin(), line.begin() + static_cast<long>(sep),
                                          [](unsigned char c) { return std::isdigit(c); });
        if (numbered) {
            RawRecord rec;
            rec.id = parse_int(line.substr(0, sep), "instance id", lineno);
            std::string sentence = line.substr(line.find_first_not_of(" \t", sep));
            if (sentence.size() < 2 || sentence.front() != '"' || sentence.back() != '"') {
                throw FormatError("sentence must be enclosed in double quotes", lineno);
            }
            strip_markers(sentence.substr(1, sentence.size() - 2), rec, lineno);
            records.push_back(std::move(rec));
            open = true;
            continue;
        }
        if (!open) {
            throw FormatError("expected a numbered sentence line", lineno);
        }
        auto& rec = records.back();
        if (line.rfind("Comment", 0) == 0) {
            const auto colon = line.find(':');
            rec.comment = colon == std::string::npos ? std::string{} : line.substr(colon + 1);
            if (!rec.comment.empty() && rec.comment.front() == ' ') {
                rec.comment.erase(0, 1);
            }
        } else if (!rec.label) {
            try {
                rec.label = labels::index(line);
            } catch (const FormatError&) {
                throw FormatError("unknown relation label '" + line + "'", lineno);
            }
        } else {
            throw FormatError("unexpected line in record " + std::to_string(rec.id), lineno);
        }
    }
    return records;
}

std::vector<RawRecord> read_semeval_raw(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_semeval_raw(in);
}

Instance make_instance(int id, DependencyGraph graph, TokenIndex e1_start, TokenIndex e1_end,
                       TokenIndex e2_start, TokenIndex e2_end, std::optional<int> gold) {
    const std::string where = "instance " + std::to_string(id) + ": ";
    if (e1_start <= e2_end && e2_start <= e1_end) {
        throw InvalidSpan(where + "entity spans overlap");
    }
    Instance inst;
    inst.id = id;
    try {
        inst.e1 = {e1_start, e1_end, find_entity_head(graph, e1_start, e1_end)};
        inst.e2 = {e2_start, e2_end, find_entity_head(graph, e2_start, e2_end)};
    } catch (const InvalidSpan& e) {
        throw InvalidSpan(where + e.what());
    }
    inst.graph = std::move(graph);
    inst.gold = gold;
    return inst;
}

namespace {

constexpr const char* kInstanceHeader = "DEPNN-INST 1";

std::optional<std::string> optional_field(const std::string& field) {
    if (field == "_") {
        return std::nullopt;
    }
    return unescape_field(field);
}

std::string field_or_absent(const std::optional<std::string>& value) {
    return value ? escape_field(*value) : std::string("_");
}

std::pair<TokenIndex, TokenIndex> parse_span(const std::string& s, std::size_t line) {
    const auto dash = s.find(':');
    if (dash == std::string::npos) {
        throw FormatError("span must be start:end, got '" + s + "'", line);
    }
    return {parse_int(s.substr(0, dash), "span start", line), parse_int(s.substr(dash + 1), "span end", line)};
}

} // namespace

std::vector<Instance> read_parsed_instances(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    std::vector<Instance> out;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (!header) {
            if (line != kInstanceHeader) {
                throw FormatError("missing '" + std::string(kInstanceHeader) + "' header", lineno);
            }
            header = true;
            continue;
        }
        if (blank(line) || line.front() == '#') {
            continue;
        }
        const auto cols = split(line, '\t');
        if (cols.size() != 5) {
            throw FormatError("expected 5 tab-separated fields, found " + std::to_string(cols.size()), lineno);
        }
        const int id = parse_int(cols[0], "instance id", lineno);
        std::optional<int> gold;
        if (cols[1] != "-") {
            try {
                gold = labels::index(cols[1]);
            } catch (const FormatError& e) {
                throw FormatError(e.what(), lineno);
            }
        }
        const auto [s1, t1] = parse_span(cols[2], lineno);
        const auto [s2, t2] = parse_span(cols[3], lineno);

        std::vector<Token> tokens;
        std::vector<Arc> arcs;
        std::istringstream token_stream(cols[4]);
        std::string item;
        while (token_stream >> item) {
            const auto f = split(item, '|');
            if (f.size() != 6) {
                throw FormatError("token must have 6 '|'-separated fields: '" + item + "'", lineno);
            }
            Token tok;
            tok.index = static_cast<TokenIndex>(tokens.size() + 1);
            tok.form = unescape_field(f[0]);
            tok.lemma = optional_field(f[1]);
            tok.ner_tag = optional_field(f[4]);
            tok.wn_hypernym = optional_field(f[5]);
            if (f[2] != "-") {
                arcs.push_back({parse_int(f[2], "head index", lineno), tok.index, unescape_field(f[3])});
            }
            tokens.push_back(std::move(tok));
        }
        try {
            out.push_back(make_instance(id, DependencyGraph(std::move(tokens), std::move(arcs)), s1, t1, s2, t2, gold));
        } catch (const TreeViolation& e) {
            throw TreeViolation("instance " + std::to_string(id) + " (line " + std::to_string(lineno) +
                                "): " + e.what());
        } catch (const InvalidSpan& e) {
            throw InvalidSpan(std::string(e.what()) + " (line " + std::to_string(lineno) + ")");
        }
    }
    return out;
}

std::vector<Instance> read_parsed_instances(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return read_parsed_instances(in);
}

void write_parsed_instances(std::ostream& out, std::span<const Instance> instances) {
    out << kInstanceHeader << '\n';
    for (const auto& inst : instances) {
        out << inst.id << '\t' << (inst.gold ? labels::name(*inst.gold) : std::string("-")) << '\t'
            << inst.e1.start << ':' << inst.e1.end << '\t' << inst.e2.start << ':' << inst.e2.end << '\t';
        for (const auto& tok : inst.graph.tokens()) {
            if (tok.index > 1) {
                out << ' ';
            }
            out << escape_field(tok.form) << '|' << field_or_absent(tok.lemma) << '|';
            if (inst.graph.is_active(tok.index)) {
                out << inst.graph.head(tok.index) << '|' << escape_field(inst.graph.relation(tok.index));
            } else {
                out << "-|_";
            }
            out << '|' << field_or_absent(tok.ner_tag) << '|' << field_or_absent(tok.wn_hypernym);
        }
        out << '\n';
    }
}

void write_parsed_instances(const std::filesystem::path& path, std::span<const Instance> instances) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_parsed_instances(out, instances);
}

std::vector<ParsedSentence> read_conll(std::istream& in) {
    std::vector<ParsedSentence> out;
    ParsedSentence cur;
    bool open = false;
    std::string line;
    std::size_t lineno = 0;
    auto flush = [&] {
        if (open) {
            out.push_back(std::move(cur));
            cur = ParsedSentence{};
            open = false;
        }
    };
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (blank(line)) {
            flush();
            continue;
        }
        if (line.front() == '#') {
            std::istringstream comment(line.substr(1));
            std::string key, eq, value;
            if (comment >> key >> eq >> value && eq == "=" && (key == "id" || key == "sent_id")) {
                cur.id = parse_int(value, "sentence id", lineno);
                open = true;
            }
            continue;
        }
        const auto cols = split(line, '\t');
        if (cols.size() < 8) {
            throw FormatError("CoNLL line needs at least 8 tab-separated columns", lineno);
        }
        if (cols[0].find_first_of("-.") != std::string::npos) {
            continue;  // multiword ranges and empty nodes
        }
        open = true;
        Token tok;
        tok.index = parse_int(cols[0], "token id", lineno);
        tok.form = cols[1];
        if (cols[2] != "_") {
            tok.lemma = cols[2];
        }
        if (cols.size() >= 10 && cols[9] != "_") {
            for (const auto& kv : split(cols[9], '|')) {
                if (kv.rfind("NER=", 0) == 0) {
                    tok.ner_tag = kv.substr(4);
                } else if (kv.rfind("WN=", 0) == 0) {
                    tok.wn_hypernym = kv.substr(3);
                }
            }
        }
        if (cols[6] != "_") {
            cur.arcs.push_back({parse_int(cols[6], "head", lineno), tok.index, cols[7]});
        }
        cur.tokens.push_back(std::move(tok));
    }
    flush();
    return out;
}

namespace {

std::vector<std::string> surface_candidates(const std::string& form) {
    static const std::map<std::string, std::vector<std::string>> escapes = {
        {"-LRB-", {"("}}, {"-RRB-", {")"}}, {"-LSB-", {"["}}, {"-RSB-", {"]"}},
        {"-LCB-", {"{"}}, {"-RCB-", {"}"}}, {"``", {"\"", "''"}},  {"''", {"\"", "``"}},
    };
    std::vector<std::string> out{form};
    if (auto it = escapes.find(form); it != escapes.end()) {
        out.insert(out.end(), it->second.begin(), it->second.end());
    }
    return out;
}

std::optional<std::string> align_and_build(const RawRecord& raw, const ParsedSentence& parse, bool collapse,
                                           Instance& out) {
    std::vector<std::pair<std::size_t, std::size_t>> offsets;
    std::size_t cursor = 0;
    for (const auto& tok : parse.tokens) {
        while (cursor < raw.text.size() && std::isspace(static_cast<unsigned char>(raw.text[cursor]))) {
            ++cursor;
        }
        bool found = false;
        for (const auto& cand : surface_candidates(tok.form)) {
            if (!cand.empty() && raw.text.compare(cursor, cand.size(), cand) == 0) {
                offsets.emplace_back(cursor, cursor + cand.size());
                cursor += cand.size();
                found = true;
                break;
            }
        }
        if (!found) {
            return "token '" + tok.form + "' not found at offset " + std::to_string(cursor);
        }
    }
    auto span_of = [&](std::size_t begin, std::size_t end) -> std::pair<TokenIndex, TokenIndex> {
        TokenIndex first = 0, last = 0;
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (offsets[i].second > begin && offsets[i].first < std::max(end, begin + 1)) {
                if (first == 0) {
                    first = static_cast<TokenIndex>(i + 1);
                }
                last = static_cast<TokenIndex>(i + 1);
            }
        }
        return {first, last};
    };
    const auto [s1, t1] = span_of(raw.e1_begin, raw.e1_end);
    const auto [s2, t2] = span_of(raw.e2_begin, raw.e2_end);
    if (s1 == 0 || s2 == 0) {
        return std::string("entity not covered by any token");
    }
    try {
        DependencyGraph graph(parse.tokens, parse.arcs);
        if (collapse) {
            graph = collapse_prepositions(graph);
        }
        out = make_instance(raw.id, std::move(graph), s1, t1, s2, t2, raw.label);
    } catch (const DataError& e) {
        return std::string(e.what());
    }
    return std::nullopt;
}

} // namespace

ConversionResult convert_corpus(const std::vector<RawRecord>& raw, const std::vector<ParsedSentence>& parses,
                                bool collapse) {
    std::map<int, const ParsedSentence*> by_id;
    for (const auto& p : parses) {
        if (p.id) {
            by_id.emplace(*p.id, &p);
        }
    }
    ConversionResult result;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const ParsedSentence* parse = nullptr;
        if (auto it = by_id.find(raw[i].id); it != by_id.end()) {
            parse = it->second;
        } else if (i < parses.size() && !parses[i].id) {
            parse = &parses[i];
        }
        if (!parse) {
            result.failures.push_back({raw[i].id, "no parse for instance"});
            continue;
        }
        Instance inst;
        if (auto failure = align_and_build(raw[i], *parse, collapse, inst)) {
            result.failures.push_back({raw[i].id, *failure});
        } else {
            result.instances.push_back(std::move(inst));
        }
    }
    return result;
}

Eigen::Index EmbeddingTable::find(const std::string& word) const {
    if (auto it = index.find(word); it != index.end()) {
        return it->second;
    }
    if (auto it = index.find(to_lower(word)); it != index.end()) {
        return it->second;
    }
    return -1;
}

Vector EmbeddingTable::lookup(const std::string& word) const {
    const auto col = find(word);
    return col < 0 ? unk : Vector(vectors.col(col));
}

EmbeddingTable load_embeddings(std::istream& in, int expected_dim) {
    EmbeddingTable table;
    table.dim = expected_dim;
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        strip_cr(line);
        if (blank(line)) {
            continue;
        }
        std::istringstream fields(line);
        std::vector<std::string> parts;
        for (std::string p; fields >> p;) {
            parts.push_back(std::move(p));
        }
        if (first) {
            first = false;
            int count = 0, dim = 0;
            if (parts.size() == 2 &&
                std::from_chars(parts[0].data(), parts[0].data() + parts[0].size(), count).ec == std::errc() &&
                std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), dim).ec == std::errc()) {
                if (table.dim != 0 && dim != table.dim) {
                    throw DimensionMismatch("embedding header declares dim " + std::to_string(dim) +
                                            ", expected " + std::to_string(table.dim) + " (line 1)");
                }
                table.dim = dim;
                continue;
            }
        }
        const int values = static_cast<int>(parts.size()) - 1;
        if (table.dim == 0) {
            table.dim = values;
        }
        if (values != table.dim || values <= 0) {
            throw DimensionMismatch("line " + std::to_string(lineno) + ": expected " + std::to_string(table.dim) +
                                    " values for '" + parts[0] + "', found " + std::to_string(values));
        }
        std::vector<double> row(static_cast<std::size_t>(values));
        for (int i = 0; i < values; ++i) {
            const auto& s = parts[static_cast<std::size_t>(i) + 1];
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), row[static_cast<std::size_t>(i)]);
            if (ec != std::errc() || ptr != s.data() + s.size()) {
                throw FormatError("bad embedding value '" + s + "'", lineno);
            }
        }
        if (table.index.emplace(parts[0], static_cast<Eigen::Index>(table.words.size())).second) {
            table.words.push_back(parts[0]);
            rows.push_back(std::move(row));
        }
    }
    table.vectors.resize(table.dim, static_cast<Eigen::Index>(rows.size()));
    for (std::size_t j = 0; j < rows.size(); ++j) {
        table.vectors.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(rows[j].data(), table.dim);
    }
    table.unk = rows.empty() ? Vector(Vector::Zero(table.dim)) : Vector(table.vectors.rowwise().mean());
    return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, int expected_dim) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return load_embeddings(in, expected_dim);
}

const DatasetStats::Row& DatasetStats::row(const std::string& name) const {
    for (const auto& r : rows) {
        if (r.name == name) {
            return r;
        }
    }
    throw std::out_of_range("no statistics row '" + name + "'");
}

DatasetStats dataset_stats(std::span<const int> gold) {
    std::array<long, labels::kTypeCount + 1> counts{};
    for (int label : gold) {
        ++counts[static_cast<std::size_t>(labels::type_of(label) + 1)];
    }
    DatasetStats stats;
    for (long c : counts) {
        stats.total += c;
    }
    // Half-up rounding to hundredths of a percent in integer arithmetic.
    auto percent = [&](long c) {
        if (stats.total == 0) {
            return 0.0;
        }
        const long centi = (c * 20000 + stats.total) / (2 * stats.total);
        return static_cast<double>(centi) / 100.0;
    };
    stats.rows.push_back({"Other", counts[0], percent(counts[0])});
    std::vector<int> order(labels::kTypeCount);
    for (int t = 0; t < labels::kTypeCount; ++t) {
        order[static_cast<std::size_t>(t)] = t;
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return counts[static_cast<std::size_t>(a + 1)] > counts[static_cast<std::size_t>(b + 1)];
    });
    for (int t : order) {
        const long c = counts[static_cast<std::size_t>(t + 1)];
        stats.rows.push_back({labels::type_names()[static_cast<std::size_t>(t)], c, percent(c)});
    }
    return stats;
}

DatasetStats dataset_stats(std::span<const Instance> instances) {
    std::vector<int> gold;
    for (const auto& inst : instances) {
        if (inst.gold) {
            gold.push_back(*inst.gold);
        }
    }
    return dataset_stats(std::span<const int>(gold));
}

std::string render_stats(const DatasetStats& stats) {
    std::string out;
    char buf[128];
    for (const auto& r : stats.rows) {
        std::snprintf(buf, sizeof buf, "%-20s %6ld (%6.2f%%)\n", r.name.c_str(), r.count, r.percent);
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%-20s %6ld (%6.2f%%)\n", "Total", stats.total, stats.total ? 100.0 : 0.0);
    out += buf;
    return out;
}

} // namespace depnn
