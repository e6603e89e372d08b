#include "depnn/model.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace depnn {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

int Vocabulary::lookup(const std::string& entry) const {
    if (int i = find(entry); i >= 0) {
        return i;
    }
    if (int i = find(to_lower(entry)); i >= 0) {
        return i;
    }
    return kUnk;
}

std::string escape_field(const std::string& raw) {
    if (raw == "_") {
        return "%5F";
    }
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : raw) {
        if (c == '%' || c == '|' || std::isspace(c)) {
            out += '%';
            out += hex[c >> 4];
            out += hex[c & 0xf];
        } else {
            out += static_cast<char>(c);
        }
    }
    return out;
}

std::string unescape_field(const std::string& field) {
    std::string out;
    for (std::size_t i = 0; i < field.size(); ++i) {
        if (field[i] == '%' && i + 2 < field.size()) {
            out += static_cast<char>(std::stoi(field.substr(i + 1, 2), nullptr, 16));
            i += 2;
        } else {
            out += field[i];
        }
    }
    return out;
}

void ModelConfig::validate() const {
    if (dim <= 0 || dim_c <= 0 || hidden <= 0 || dim_lex <= 0) {
        throw std::invalid_argument("model dimensions must be positive");
    }
    if (window < 3 || window % 2 == 0) {
        throw std::invalid_argument("window size must be odd and >= 3, got " + std::to_string(window));
    }
}

int ModelConfig::feature_dim() const {
    int lex = 0;
    if (use_ner) {
        lex += 2 * dim_lex;
    }
    if (use_wordnet) {
        lex += 2 * dim_lex;
    }
    return hidden + lex;
}

int words_per_window(int k) {
    // Centre word plus one word every two positions on each side.
    return 2 * ((k - 1) / 4) + 1;
}

Model::Model(ModelConfig config, Vocabulary words, Vocabulary relations, Vocabulary ner_tags,
             Vocabulary wn_tags, std::set<std::string> composition_labels)
    : config_(config),
      words_(std::move(words)),
      relations_(std::move(relations)),
      ner_tags_(std::move(ner_tags)),
      wn_tags_(std::move(wn_tags)),
      composition_labels_(std::move(composition_labels)) {
    config_.validate();
    relations_.add(kSentinelStart);
    relations_.add(kSentinelEnd);

    const int dim = config_.dim;
    const int dim_c = config_.dim_c;
    const int word_width = dim + dim_c;

    store_.add(param::kWordEmbedding, dim, static_cast<Eigen::Index>(words_.size()), InitKind::Embedding, true);
    store_.add(param::kRelationEmbedding, dim, static_cast<Eigen::Index>(relations_.size()),
               InitKind::Embedding, true);
    store_.add(param::kLeaf, dim_c, 1, InitKind::Zero);
    if (config_.use_subtrees) {
        store_.add(param::kCompositionBias, dim_c, 1, InitKind::Zero);
        store_.add(param::kCompositionDefault, dim_c, word_width, InitKind::Xavier);
        for (const auto& label : composition_labels_) {
            auto name = param::kCompositionPrefix + label;
            store_.add(name, dim_c, word_width, InitKind::Xavier);
            composition_names_.emplace(label, std::move(name));
        }
    }
    const int n_w = words_per_window(config_.window);
    store_.add(param::kPad, word_width, 1, InitKind::Embedding);
    store_.add(param::kFilter, config_.hidden, dim * config_.window + dim_c * n_w, InitKind::Xavier);
    store_.add(param::kFilterBias, config_.hidden, 1, InitKind::Zero);
    if (config_.use_ner) {
        store_.add(param::kNerEmbedding, config_.dim_lex, static_cast<Eigen::Index>(ner_tags_.size()),
                   InitKind::Embedding, true);
    }
    if (config_.use_wordnet) {
        store_.add(param::kWordNetEmbedding, config_.dim_lex, static_cast<Eigen::Index>(wn_tags_.size()),
                   InitKind::Embedding, true);
    }
    store_.add(param::kOutput, kNumLabels, config_.feature_dim(), InitKind::Xavier);
}

const std::string& Model::composition_param(const std::string& relation) const {
    auto it = composition_names_.find(relation);
    return it == composition_names_.end() ? param::kCompositionDefault : it->second;
}

bool Model::operator==(const Model& other) const {
    return config_ == other.config_ && words_ == other.words_ && relations_ == other.relations_ &&
           ner_tags_ == other.ner_tags_ && wn_tags_ == other.wn_tags_ &&
           composition_labels_ == other.composition_labels_ && store_ == other.store_;
}

namespace {

constexpr const char* kMagic = "DEPNN1";

void write_entries(std::ostream& out, const std::string& name, const std::vector<std::string>& entries) {
    out << name << ' ' << entries.size() << '\n';
    for (const auto& e : entries) {
        out << escape_field(e) << '\n';
    }
}

std::vector<std::string> read_entries(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) {
        throw FormatError("model file truncated before section '" + name + "'");
    }
    std::istringstream header(line);
    std::string tag;
    std::size_t count = 0;
    if (!(header >> tag >> count) || tag != name) {
        throw FormatError("expected section '" + name + "', found: " + line);
    }
    std::vector<std::string> entries;
    for (std::size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) {
            throw FormatError("model file truncated in section '" + name + "'");
        }
        entries.push_back(unescape_field(line));
    }
    return entries;
}

Vocabulary to_vocabulary(const std::vector<std::string>& entries) {
    Vocabulary v;
    for (const auto& e : entries) {
        v.add(e);
    }
    if (v.size() != entries.size()) {
        throw FormatError("vocabulary section has duplicate entries");
    }
    return v;
}

} // namespace

void Model::save(std::ostream& out, DType dtype) const {
    const auto& c = config_;
    out << kMagic << '\n';
    out << "config dim=" << c.dim << " dim_c=" << c.dim_c << " hidden=" << c.hidden
        << " window=" << c.window << " dim_lex=" << c.dim_lex << " subtrees=" << c.use_subtrees
        << " ner=" << c.use_ner << " wordnet=" << c.use_wordnet << " conv_tanh=" << c.conv_tanh << '\n';
    write_entries(out, "words", words_.entries());
    write_entries(out, "relations", relations_.entries());
    write_entries(out, "ner", ner_tags_.entries());
    write_entries(out, "wordnet", wn_tags_.entries());
    write_entries(out, "composition",
                  std::vector<std::string>(composition_labels_.begin(), composition_labels_.end()));
    write_tensors(out, store_, dtype);
}

void Model::save(const std::filesystem::path& path, DType dtype) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write model file " + path.string());
    }
    save(out, dtype);
}

Model Model::load(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw FormatError("not a DEPNN1 model file");
    }
    if (!std::getline(in, line) || line.rfind("config ", 0) != 0) {
        throw FormatError("model file missing config line");
    }
    ModelConfig config;
    std::istringstream fields(line.substr(7));
    std::string kv;
    while (fields >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) {
            throw FormatError("bad config entry: " + kv);
        }
        const std::string key = kv.substr(0, eq);
        const int value = std::stoi(kv.substr(eq + 1));
        if (key == "dim") config.dim = value;
        else if (key == "dim_c") config.dim_c = value;
        else if (key == "hidden") config.hidden = value;
        else if (key == "window") config.window = value;
        else if (key == "dim_lex") config.dim_lex = value;
        else if (key == "subtrees") config.use_subtrees = value != 0;
        else if (key == "ner") config.use_ner = value != 0;
        else if (key == "wordnet") config.use_wordnet = value != 0;
        else if (key == "conv_tanh") config.conv_tanh = value != 0;
        else throw FormatError("unknown config key: " + key);
    }
    auto words = to_vocabulary(read_entries(in, "words"));
    auto relations = to_vocabulary(read_entries(in, "relations"));
    auto ner = to_vocabulary(read_entries(in, "ner"));
    auto wordnet = to_vocabulary(read_entries(in, "wordnet"));
    const auto labels = read_entries(in, "composition");
    Model model(config, std::move(words), std::move(relations), std::move(ner), std::move(wordnet),
                std::set<std::string>(labels.begin(), labels.end()));
    read_tensors(in, model.store_);
    return model;
}

Model Model::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot read model file " + path.string());
    }
    return load(in);
}

} // namespace depnn
