// depnn command-line tool. Exit codes: 0 success, 1 usage, 2 data error,
// 3 numeric failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "depnn/classifier.hpp"
#include "depnn/corpus_io.hpp"
#include "depnn/evaluation.hpp"
#include "depnn/synthetic.hpp"

using namespace depnn;
namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(const char* pattern, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, value);
    return buf;
}

bool is_instance_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            return line == "DEPNN-INST 1";
        }
    }
    return true;  // empty file: treat as an empty instance file
}

std::vector<Instance> load_instances(const fs::path& path) {
    if (!is_instance_file(path)) {
        throw FormatError(path.string() + " is not a DEPNN-INST file (run 'depnn convert' first)");
    }
    if (fs::file_size(path) == 0) {
        return {};
    }
    return read_parsed_instances(path);
}

/// id -> gold label from either a DEPNN-INST or a raw SemEval file.
std::map<int, int> load_gold(const fs::path& path) {
    std::map<int, int> out;
    if (is_instance_file(path)) {
        for (const auto& inst : load_instances(path)) {
            if (inst.gold) {
                out[inst.id] = *inst.gold;
            }
        }
    } else {
        for (const auto& rec : read_semeval_raw(path)) {
            if (rec.label) {
                out[rec.id] = *rec.label;
            }
        }
    }
    return out;
}

/// Official answer format: "id<TAB>label" per line.
std::map<int, int> load_answers(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    std::map<int, int> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::istringstream fields(line);
        int id = 0;
        std::string label;
        if (!(fields >> id >> label)) {
            throw FormatError("expected '<id> <label>'", lineno);
        }
        try {
            out[id] = labels::index(label);
        } catch (const FormatError& e) {
            throw FormatError(e.what(), lineno);
        }
    }
    return out;
}

// Model-shape flags shared by train and gradcheck. Zero means "use the default".
struct ModelFlags {
    int embedding_dim = 50;
    int dim_c = 0;
    int hidden = 0;
    int window = 0;
    int dim_lex = 0;
    bool no_subtrees = false;
    bool ner = false;
    bool wordnet = false;
    bool linear_conv = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--embedding-dim", embedding_dim, "word and relation embedding size")->capture_default_str();
        cmd->add_option("--dim-c", dim_c, "subtree representation size (default: 25 for 50-d, 100 for 200-d)");
        cmd->add_option("--hidden", hidden, "convolution output size l (default: 200 for 50-d, 400 for 200-d)");
        cmd->add_option("--window", window, "convolution window k, odd and >= 3 (default 5)");
        cmd->add_option("--dim-lex", dim_lex, "lexical feature embedding size (default 25)");
        cmd->add_flag("--no-subtrees", no_subtrees, "encode path words without their attached subtrees");
        cmd->add_flag("--ner", ner, "add named-entity tag features");
        cmd->add_flag("--wordnet", wordnet, "add WordNet hypernym features");
        cmd->add_flag("--linear-conv", linear_conv, "omit the tanh after the convolution");
    }

    void apply(ModelConfig& config) const {
        if (dim_c > 0) config.dim_c = dim_c;
        if (hidden > 0) config.hidden = hidden;
        if (window != 0) config.window = window;
        if (dim_lex > 0) config.dim_lex = dim_lex;
        config.use_subtrees = !no_subtrees;
        config.use_ner = ner;
        config.use_wordnet = wordnet;
        config.conv_tanh = !linear_conv;
    }
};

const char* boolstr(bool b) { return b ? "true" : "false"; }

// Same keys as the --config file, so the output can be fed back in.
std::string render_config(const TrainConfig& c) {
    std::ostringstream out;
    out << "embedding-dim=" << c.model.dim << '\n'
        << "dim-c=" << c.model.dim_c << '\n'
        << "hidden=" << c.model.hidden << '\n'
        << "window=" << c.model.window << '\n'
        << "dim-lex=" << c.model.dim_lex << '\n'
        << "lr=" << c.learning_rate << '\n'
        << "epochs=" << c.epochs << '\n'
        << "seed=" << c.seed << '\n'
        << "no-subtrees=" << boolstr(!c.model.use_subtrees) << '\n'
        << "ner=" << boolstr(c.model.use_ner) << '\n'
        << "wordnet=" << boolstr(c.model.use_wordnet) << '\n'
        << "linear-conv=" << boolstr(!c.model.conv_tanh) << '\n';
    return out.str();
}

// CLI11 only reads config files for the top-level app, so subcommand files are
// merged here: a key fills its option only when the command line left it unset.
void apply_config_file(CLI::App* cmd, const fs::path& file) {
    for (const auto& item : CLI::ConfigTOML().from_file(file.string())) {
        if (!item.parents.empty() || item.name == "config") {
            throw CLI::ConfigError::Extras(item.fullname());
        }
        CLI::Option* opt = cmd->get_option_no_throw("--" + item.name);
        if (opt == nullptr) {
            throw CLI::ConfigError::Extras(item.fullname());
        }
        if (opt->count() == 0) {
            opt->add_result(item.inputs);
            opt->run_callback();
        }
    }
}

// --- convert -----------------------------------------------------------------

struct ConvertArgs {
    fs::path raw, parses, out;
    bool collapse = false;
};

int cmd_convert(const ConvertArgs& a) {
    const auto raw = read_semeval_raw(a.raw);
    std::ifstream pin(a.parses);
    if (!pin) {
        throw DataError("cannot open " + a.parses.string());
    }
    const auto parses = read_conll(pin);
    const auto result = convert_corpus(raw, parses, a.collapse);
    write_parsed_instances(a.out, result.instances);
    for (const auto& f : result.failures) {
        std::cerr << "instance " << f.id << ": " << f.reason << '\n';
    }
    std::cout << result.instances.size() << " instances written, " << result.failures.size()
              << " alignment failures\n";
    return 0;
}

// --- train -------------------------------------------------------------------

struct TrainArgs {
    ModelFlags flags;
    double lr = 0.05;
    int epochs = 25;
    std::uint64_t seed = 1;
    fs::path train, model, embeddings, validation, extra_vocab, report;
    std::string dtype = "f64";
    bool show_config = false;
    int cross_validate = 0;

    TrainConfig resolve() const {
        TrainConfig c = TrainConfig::for_embedding_dim(flags.embedding_dim);
        flags.apply(c.model);
        c.learning_rate = lr;
        c.epochs = epochs;
        c.seed = seed;
        return c;
    }
};

int cmd_train(const TrainArgs& a) {
    const TrainConfig config = a.resolve();
    if (a.show_config) {
        config.validate();
        std::cout << render_config(config);
        return 0;
    }
    if (a.train.empty()) {
        throw UsageError("--train is required");
    }
    if (a.model.empty() && a.cross_validate == 0) {
        throw UsageError("--model is required unless --cross-validate is given");
    }
    config.validate();

    const auto training = prepare_all(load_instances(a.train));
    std::optional<EmbeddingTable> embeddings;
    if (!a.embeddings.empty()) {
        embeddings = load_embeddings(a.embeddings, config.model.dim);
    }
    const EmbeddingTable* pretrained = embeddings ? &*embeddings : nullptr;

    if (a.cross_validate > 0) {
        const auto scores = cross_validate(training, config, static_cast<std::size_t>(a.cross_validate), pretrained);
        for (std::size_t f = 0; f < scores.size(); ++f) {
            std::cout << "fold " << f + 1 << "\tmacro_f1 " << fmt("%.6f", scores[f]) << '\n';
        }
        const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / static_cast<double>(scores.size());
        std::cout << "mean\tmacro_f1 " << fmt("%.6f", mean) << '\n';
        return 0;
    }

    std::vector<Example> validation;
    if (!a.validation.empty()) {
        validation = prepare_all(load_instances(a.validation));
    }
    std::vector<Example> extra = validation;
    if (!a.extra_vocab.empty()) {
        auto more = prepare_all(load_instances(a.extra_vocab));
        extra.insert(extra.end(), more.begin(), more.end());
    }

    Model model = create_model(config.model, training, config.seed, pretrained, extra);
    std::ostringstream report;
    report << render_config(config);
    auto progress = [&](const EpochReport& r) {
        std::string line = "epoch " + std::to_string(r.epoch) + "\tloss " + fmt("%.6f", r.mean_loss) +
                           "\ttrain_accuracy " + fmt("%.4f", r.train_accuracy);
        if (r.validation_macro_f1) {
            line += "\tvalidation_macro_f1 " + fmt("%.4f", *r.validation_macro_f1);
        }
        std::cout << line << std::endl;
        report << line << '\n';
    };
    train(training, model, config, progress, validation);
    model.save(a.model, a.dtype == "f32" ? DType::F32 : DType::F64);
    if (!a.report.empty()) {
        std::ofstream out(a.report);
        if (!out) {
            throw DataError("cannot write " + a.report.string());
        }
        out << report.str();
    }
    std::cout << "model written to " << a.model.string() << '\n';
    return 0;
}

// --- eval / predict ------------------------------------------------------------

struct EvalArgs {
    fs::path model, data, predictions;
    bool metrics = false;
};

int cmd_eval(const EvalArgs& a) {
    if (a.model.empty() == a.predictions.empty()) {
        throw UsageError("give exactly one of --model or --predictions");
    }
    std::vector<int> gold, predicted;
    if (!a.model.empty()) {
        const Model model = Model::load(a.model);
        for (const auto& ex : prepare_all(load_instances(a.data))) {
            if (ex.instance.gold) {
                gold.push_back(*ex.instance.gold);
                predicted.push_back(forward(ex, model).label);
            }
        }
    } else {
        const auto key = load_gold(a.data);
        const auto answers = load_answers(a.predictions);
        for (const auto& [id, label] : key) {
            const auto it = answers.find(id);
            if (it == answers.end()) {
                throw DataError("no prediction for instance " + std::to_string(id));
            }
            gold.push_back(label);
            predicted.push_back(it->second);
        }
    }
    const auto report = score(gold, predicted);
    std::cout << (a.metrics ? render_metrics(report) : render_report(report));
    return 0;
}

struct PredictArgs {
    fs::path model, data;
    bool labels_only = false;
};

int cmd_predict(const PredictArgs& a) {
    const Model model = Model::load(a.model);
    for (const auto& ex : prepare_all(load_instances(a.data))) {
        const auto p = forward(ex, model);
        std::cout << ex.instance.id << '\t' << labels::name(p.label);
        if (!a.labels_only) {
            std::cout << '\t';
            for (Eigen::Index i = 0; i < p.distribution.size(); ++i) {
                std::cout << (i ? " " : "") << fmt("%.6f", p.distribution(i));
            }
        }
        std::cout << '\n';
    }
    return 0;
}

// --- gradcheck -----------------------------------------------------------------

struct GradcheckArgs {
    ModelFlags flags;
    fs::path data;
    int instances = 5;
    std::uint64_t seed = 1;
    std::size_t max_entries = 0;
    double tolerance = 1e-5;
};

int cmd_gradcheck(const GradcheckArgs& a) {
    ModelConfig config = synthetic::small_config();
    if (a.flags.embedding_dim != 50) {
        config.dim = a.flags.embedding_dim;
    }
    a.flags.apply(config);
    config.validate();

    std::vector<Example> all = a.data.empty()
                                   ? prepare_all(synthetic::separable_corpus(synthetic::kBundledSize,
                                                                             synthetic::kBundledSeed))
                                   : prepare_all(load_instances(a.data));
    std::vector<Example> chosen;
    for (const auto& ex : all) {
        if (ex.instance.gold && static_cast<int>(chosen.size()) < a.instances) {
            chosen.push_back(ex);
        }
    }
    if (chosen.empty()) {
        throw DataError("no labelled instances to check");
    }
    Model model = create_model(config, chosen, a.seed);
    synthetic::spread_for_gradient_check(model, a.seed);

    GradientCheckOptions opts;
    opts.max_entries_per_tensor = a.max_entries;
    opts.seed = a.seed;
    std::map<std::string, TensorCheck> worst;
    for (const auto& ex : chosen) {
        const int gold = *ex.instance.gold;
        model.store().zero_grad();
        backward(forward_pass(ex, model), gold, model);
        const auto report = gradient_check([&] { return loss(forward(ex, model), gold); }, model.store(), opts);
        for (const auto& t : report.tensors) {
            auto& w = worst[t.name];
            w.name = t.name;
            w.entries_checked += t.entries_checked;
            w.max_relative_error = std::max(w.max_relative_error, t.max_relative_error);
            w.max_abs_error = std::max(w.max_abs_error, t.max_abs_error);
        }
    }
    model.store().zero_grad();

    char buf[160];
    std::snprintf(buf, sizeof buf, "%-28s %9s %12s %12s\n", "tensor", "entries", "max_rel", "max_abs");
    std::cout << buf;
    double overall = 0.0;
    for (const auto& [name, t] : worst) {
        std::snprintf(buf, sizeof buf, "%-28s %9zu %12.3e %12.3e\n", name.c_str(), t.entries_checked,
                      t.max_relative_error, t.max_abs_error);
        std::cout << buf;
        overall = std::max(overall, t.max_relative_error);
    }
    const bool ok = overall < a.tolerance;
    std::cout << chosen.size() << " instances, worst relative error " << fmt("%.3e", overall) << " ("
              << (ok ? "PASS" : "FAIL") << " at " << fmt("%g", a.tolerance) << ")\n";
    return ok ? 0 : 3;
}

// --- stats / neighbors / compare / synth -----------------------------------------

int cmd_stats(const fs::path& path) {
    std::vector<int> gold;
    for (const auto& [id, label] : load_gold(path)) {
        gold.push_back(label);
    }
    std::cout << render_stats(dataset_stats(gold));
    return 0;
}

struct NeighborArgs {
    fs::path model, data;
    int query_id = 0;
    std::size_t top_n = 5;
};

int cmd_neighbors(const NeighborArgs& a) {
    const Model model = Model::load(a.model);
    const auto examples = prepare_all(load_instances(a.data));
    const Example* query = nullptr;
    std::vector<Example> candidates;
    std::map<int, const Example*> by_id;
    for (const auto& ex : examples) {
        by_id[ex.instance.id] = &ex;
        if (ex.instance.id == a.query_id) {
            query = &ex;
        } else {
            candidates.push_back(ex);
        }
    }
    if (query == nullptr) {
        throw DataError("query id " + std::to_string(a.query_id) + " not found");
    }
    const auto list = nearest_paths(*query, candidates, model, a.top_n);
    auto label_of = [](const Example& ex) { return ex.instance.gold ? labels::name(*ex.instance.gold) : "-"; };
    std::cout << "query " << query->instance.id << "\t" << label_of(*query) << "\t"
              << render_path(query->instance.graph, query->adp) << '\n';
    int rank = 0;
    for (const auto& n : list.ranked) {
        const Example& ex = *by_id.at(n.id);
        std::cout << ++rank << '\t' << n.id << '\t' << fmt("%.4f", n.similarity) << '\t' << label_of(ex) << '\t'
                  << render_path(ex.instance.graph, ex.adp) << '\n';
    }
    if (!list.skipped.empty()) {
        std::cout << list.skipped.size() << " candidates skipped (zero path vector)\n";
    }
    return 0;
}

struct CompareArgs {
    fs::path before, after, data;
};

int cmd_compare(const CompareArgs& a) {
    const Model before = Model::load(a.before);
    const Model after = Model::load(a.after);
    std::vector<int> gold, pb, pa;
    for (const auto& ex : prepare_all(load_instances(a.data))) {
        if (ex.instance.gold) {
            gold.push_back(*ex.instance.gold);
            pb.push_back(forward(ex, before).label);
            pa.push_back(forward(ex, after).label);
        }
    }
    const auto rb = score(gold, pb);
    const auto ra = score(gold, pa);
    std::cout << render_deltas(per_relation_delta(rb, ra));
    std::cout << "macro_f1 " << fmt("%.4f", rb.macro_f1) << " -> " << fmt("%.4f", ra.macro_f1) << '\n';
    return 0;
}

struct SynthArgs {
    fs::path out;
    std::size_t count = synthetic::kBundledSize;
    std::uint64_t seed = synthetic::kBundledSeed;
};

int cmd_synth(const SynthArgs& a) {
    write_parsed_instances(a.out, synthetic::separable_corpus(a.count, a.seed));
    std::cout << a.count << " synthetic instances written to " << a.out.string() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Relation classification over augmented dependency paths"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every command");

    ConvertArgs convert;
    auto* c_convert = app.add_subcommand("convert", "align SemEval raw sentences with CoNLL parses");
    c_convert->add_option("--raw", convert.raw, "SemEval raw file")->required();
    c_convert->add_option("--parses", convert.parses, "CoNLL parses, one sentence per instance")->required();
    c_convert->add_option("-o,--out", convert.out, "output DEPNN-INST file")->required();
    c_convert->add_flag("--collapse", convert.collapse, "fold prep+pobj pairs into prep_<word> relations");

    TrainArgs train_args;
    auto* c_train = app.add_subcommand("train", "train a model");
    train_args.flags.attach(c_train);
    c_train->add_option("--lr", train_args.lr, "SGD learning rate")->capture_default_str();
    c_train->add_option("--epochs", train_args.epochs, "passes over the training set")->capture_default_str();
    c_train->add_option("--seed", train_args.seed, "initialization and shuffling seed")->capture_default_str();
    c_train->add_option("--train", train_args.train, "training DEPNN-INST file");
    c_train->add_option("--model", train_args.model, "output model file");
    c_train->add_option("--embeddings", train_args.embeddings, "pretrained text embeddings");
    c_train->add_option("--validation", train_args.validation, "DEPNN-INST file scored after each epoch");
    c_train->add_option("--extra-vocab", train_args.extra_vocab,
                        "DEPNN-INST file whose words get pretrained vectors in the model");
    c_train->add_option("--report", train_args.report, "write the training report to this file");
    c_train->add_option("--dtype", train_args.dtype, "model file precision")
        ->check(CLI::IsMember({"f32", "f64"}))
        ->capture_default_str();
    c_train->add_option("--cross-validate", train_args.cross_validate, "run N-fold cross-validation instead")
        ->check(CLI::Range(2, 100));
    c_train->add_flag("--show-config", train_args.show_config, "print the resolved configuration and exit");
    fs::path train_config;
    c_train->add_option("--config", train_config, "key=value configuration file (command-line flags take precedence)")
        ->check(CLI::ExistingFile);

    EvalArgs eval_args;
    auto* c_eval = app.add_subcommand("eval", "score predictions against gold labels");
    c_eval->add_option("--data", eval_args.data, "gold DEPNN-INST or SemEval raw file")->required();
    c_eval->add_option("--model", eval_args.model, "model to predict with");
    c_eval->add_option("--predictions", eval_args.predictions, "answer file of '<id> <label>' lines");
    c_eval->add_flag("--metrics", eval_args.metrics, "one 'name<TAB>value' line per metric");

    PredictArgs predict_args;
    auto* c_predict = app.add_subcommand("predict", "label instances with a trained model");
    c_predict->add_option("--model", predict_args.model, "model file")->required();
    c_predict->add_option("--data", predict_args.data, "DEPNN-INST file")->required();
    c_predict->add_flag("--labels-only", predict_args.labels_only, "omit the probability columns");

    GradcheckArgs gc;
    auto* c_grad = app.add_subcommand("gradcheck", "compare analytic gradients with central differences");
    gc.flags.attach(c_grad);
    c_grad->add_option("--data", gc.data, "DEPNN-INST file (default: bundled synthetic corpus)");
    c_grad->add_option("--instances", gc.instances, "instances to check")->capture_default_str();
    c_grad->add_option("--seed", gc.seed, "initialization seed")->capture_default_str();
    c_grad->add_option("--max-entries", gc.max_entries, "sample at most N entries per tensor (0: all)");
    c_grad->add_option("--tolerance", gc.tolerance, "maximum relative error")->capture_default_str();

    fs::path stats_path;
    auto* c_stats = app.add_subcommand("stats", "relation type distribution of a corpus");
    c_stats->add_option("file", stats_path, "DEPNN-INST or SemEval raw file")->required();

    NeighborArgs nb;
    auto* c_nb = app.add_subcommand("neighbors", "nearest paths by cosine similarity of pooled path vectors");
    c_nb->add_option("--model", nb.model, "model file")->required();
    c_nb->add_option("--data", nb.data, "DEPNN-INST file")->required();
    c_nb->add_option("--query-id", nb.query_id, "instance id of the query")->required();
    c_nb->add_option("--top-n", nb.top_n, "neighbors to list")->capture_default_str();

    CompareArgs cmp;
    auto* c_cmp = app.add_subcommand("compare", "per-relation F1 change between two models");
    c_cmp->add_option("--before", cmp.before, "baseline model")->required();
    c_cmp->add_option("--after", cmp.after, "second model")->required();
    c_cmp->add_option("--data", cmp.data, "DEPNN-INST file")->required();

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "write the separable synthetic corpus");
    c_synth->add_option("-o,--out", synth.out, "output DEPNN-INST file")->required();
    c_synth->add_option("--count", synth.count, "instances")->capture_default_str();
    c_synth->add_option("--seed", synth.seed, "generator seed")->capture_default_str();

    try {
        app.parse(argc, argv);
        if (!train_config.empty()) {
            apply_config_file(c_train, train_config);
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (c_convert->parsed()) return cmd_convert(convert);
        if (c_train->parsed()) return cmd_train(train_args);
        if (c_eval->parsed()) return cmd_eval(eval_args);
        if (c_predict->parsed()) return cmd_predict(predict_args);
        if (c_grad->parsed()) return cmd_gradcheck(gc);
        if (c_stats->parsed()) return cmd_stats(stats_path);
        if (c_nb->parsed()) return cmd_neighbors(nb);
        if (c_cmp->parsed()) return cmd_compare(cmp);
        if (c_synth->parsed()) return cmd_synth(synth);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << '\n';
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
