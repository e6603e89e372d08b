#include "depnn/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <random>

#include "depnn/evaluation.hpp"

namespace depnn {

TrainConfig TrainConfig::for_embedding_dim(int dim) {
    TrainConfig config;
    config.model.dim = dim;
    config.model.window = 5;
    config.learning_rate = 0.05;
    if (dim == 200) {
        config.model.dim_c = 100;
        config.model.hidden = 400;
    } else {
        config.model.dim_c = 25;
        config.model.hidden = 200;
    }
    return config;
}

void TrainConfig::validate() const {
    model.validate();
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (epochs < 0) {
        throw std::invalid_argument("epoch count must be non-negative");
    }
}

Example prepare(Instance instance) {
    Example ex;
    ex.adp = build_adp(instance.graph, instance.e1, instance.e2);
    ex.instance = std::move(instance);
    return ex;
}

std::vector<Example> prepare_all(std::vector<Instance> instances) {
    std::vector<Example> out;
    out.reserve(instances.size());
    for (auto& inst : instances) {
        out.push_back(prepare(std::move(inst)));
    }
    return out;
}

Model create_model(const ModelConfig& config, std::span<const Example> training, std::uint64_t seed,
                   const EmbeddingTable* pretrained, std::span<const Example> extra_vocabulary) {
    Vocabulary words, relations, ner, wordnet;
    std::set<std::string> composition;
    for (const auto& ex : training) {
        const auto& graph = ex.instance.graph;
        for (const auto& tok : graph.tokens()) {
            words.add(tok.form);
        }
        for (const auto& e : ex.adp.elements) {
            if (e.kind == PathElement::Kind::Relation) {
                relations.add(directed_label(e.relation, e.direction));
            }
        }
        for (const auto& [word, arcs] : ex.adp.subtrees) {
            for (const auto& arc : arcs) {
                composition.insert(arc.relation);
            }
        }
        for (TokenIndex head : {ex.instance.e1.head, ex.instance.e2.head}) {
            const auto& tok = graph.token(head);
            if (tok.ner_tag) {
                ner.add(*tok.ner_tag);
            }
            if (tok.wn_hypernym) {
                wordnet.add(*tok.wn_hypernym);
            }
        }
    }
    if (pretrained) {
        for (const auto& ex : extra_vocabulary) {
            for (const auto& tok : ex.instance.graph.tokens()) {
                if (pretrained->find(tok.form) >= 0) {
                    words.add(tok.form);
                }
            }
        }
    }

    Model model(config, std::move(words), std::move(relations), std::move(ner), std::move(wordnet),
                std::move(composition));
    model.initialize(seed);

    if (pretrained) {
        if (pretrained->dim != config.dim) {
            throw DimensionMismatch("pretrained embeddings have dim " + std::to_string(pretrained->dim) +
                                    ", model expects " + std::to_string(config.dim));
        }
        auto& table = model.store().at(param::kWordEmbedding).value;
        table.col(Vocabulary::kUnk) = pretrained->unk;
        for (std::size_t i = 1; i < model.words().size(); ++i) {
            const auto col = pretrained->find(model.words().entry(static_cast<int>(i)));
            if (col >= 0) {
                table.col(static_cast<Eigen::Index>(i)) = pretrained->vectors.col(col);
            }
        }
    }
    return model;
}

ForwardPass forward_pass(const Example& example, const Model& model) {
    const auto& config = model.config();
    const auto& store = model.store();
    const auto& graph = example.instance.graph;

    ForwardPass pass;
    pass.words = example.adp.words();
    if (pass.words.empty()) {
        throw EmptyPath("instance " + std::to_string(example.instance.id) + " has an empty path");
    }

    const Matrix& word_table = store.value(param::kWordEmbedding);
    const Matrix& leaf = store.value(param::kLeaf);
    std::vector<Vector> word_vectors;
    for (TokenIndex w : pass.words) {
        const int col = model.words().lookup(graph.token(w).form);
        pass.word_columns.push_back(col);
        if (config.use_subtrees) {
            pass.subtrees.push_back(encode_word(graph, example.adp, w, model));
            word_vectors.push_back(pass.subtrees.back().p());
        } else {
            Vector p(config.dim + config.dim_c);
            p << word_table.col(col), leaf.col(0);
            word_vectors.push_back(std::move(p));
        }
    }

    const Matrix& rel_table = store.value(param::kRelationEmbedding);
    auto add_relation = [&](int col) {
        pass.relation_columns.push_back(col);
        pass.sequence.items.push_back(rel_table.col(col));
    };
    add_relation(model.relations().lookup(kSentinelStart));
    std::size_t w = 0;
    for (const auto& e : example.adp.elements) {
        if (e.kind == PathElement::Kind::Relation) {
            add_relation(model.relations().lookup(directed_label(e.relation, e.direction)));
        } else if (e.is_word()) {
            pass.sequence.items.push_back(word_vectors[w++]);
        }
    }
    add_relation(model.relations().lookup(kSentinelEnd));

    pass.conv = conv_forward(pass.sequence, build_windows(pass.words.size(), config.window), model);

    auto add_lexical = [&](const std::string& table, const Vocabulary& vocab, bool use_ner) {
        for (TokenIndex head : {example.instance.e1.head, example.instance.e2.head}) {
            const auto& tok = graph.token(head);
            const auto& tag = use_ner ? tok.ner_tag : tok.wn_hypernym;
            pass.lexical_sources.emplace_back(table, tag ? vocab.lookup(*tag) : Vocabulary::kUnk);
        }
    };
    if (config.use_ner) {
        add_lexical(param::kNerEmbedding, model.ner_tags(), true);
    }
    if (config.use_wordnet) {
        add_lexical(param::kWordNetEmbedding, model.wn_tags(), false);
    }

    pass.features.resize(config.feature_dim());
    pass.features.head(config.hidden) = pass.conv.pooled;
    Eigen::Index offset = config.hidden;
    for (const auto& [table, col] : pass.lexical_sources) {
        pass.features.segment(offset, config.dim_lex) = store.value(table).col(col);
        offset += config.dim_lex;
    }

    const Vector logits = matvec(store.value(param::kOutput), pass.features);
    pass.prediction.distribution = softmax(logits);
    Eigen::Index best = 0;
    pass.prediction.distribution.maxCoeff(&best);
    pass.prediction.label = static_cast<int>(best);
    pass.prediction.path = pass.conv.pooled;
    return pass;
}

Prediction forward(const Example& example, const Model& model) {
    return forward_pass(example, model).prediction;
}

double loss(const Prediction& prediction, int gold) {
    return -std::log(std::max(prediction.distribution(gold), 1e-300));
}

void backward(const ForwardPass& pass, int gold, Model& model) {
    const auto& config = model.config();
    auto& store = model.store();

    Vector dlogits = pass.prediction.distribution;
    dlogits(gold) -= 1.0;
    auto& output = store.at(param::kOutput);
    output.grad_dense().noalias() += dlogits * pass.features.transpose();
    const Vector dfeatures = output.value.transpose() * dlogits;

    Eigen::Index offset = config.hidden;
    for (const auto& [table, col] : pass.lexical_sources) {
        store.at(table).grad_col(col) += dfeatures.segment(offset, config.dim_lex);
        offset += config.dim_lex;
    }

    const auto grads = conv_backward(pass.conv, pass.sequence, dfeatures.head(config.hidden), model);

    auto& relations = store.at(param::kRelationEmbedding);
    auto& words = store.at(param::kWordEmbedding);
    auto& leaf = store.at(param::kLeaf);
    for (std::size_t pos = 0; pos < grads.items.size(); ++pos) {
        const Vector& g = grads.items[pos];
        if (!PathSequence::is_word_position(pos)) {
            relations.grad_col(pass.relation_columns[pos / 2]) += g;
            continue;
        }
        const std::size_t w = pos / 2;
        if (config.use_subtrees) {
            encode_backward(pass.subtrees[w], g, model);
        } else {
            words.grad_col(pass.word_columns[w]) += g.head(config.dim);
            leaf.grad_dense() += g.tail(config.dim_c);
        }
    }
}

double train_step(const Example& example, Model& model, double learning_rate) {
    if (!example.instance.gold) {
        throw DataError("instance " + std::to_string(example.instance.id) + " has no gold label");
    }
    const int gold = *example.instance.gold;
    const ForwardPass pass = forward_pass(example, model);
    const double value = loss(pass.prediction, gold);
    if (!std::isfinite(value)) {
        throw NonFiniteLoss("non-finite loss on instance " + std::to_string(example.instance.id));
    }
    backward(pass, gold, model);
    model.store().sgd_step(learning_rate);
    return value;
}

std::vector<Prediction> predict_all(std::span<const Example> examples, const Model& model) {
    std::vector<Prediction> out;
    out.reserve(examples.size());
    for (const auto& ex : examples) {
        out.push_back(forward(ex, model));
    }
    return out;
}

namespace {

double validation_f1(std::span<const Example> validation, const Model& model) {
    std::vector<int> gold, predicted;
    for (const auto& ex : validation) {
        if (ex.instance.gold) {
            gold.push_back(*ex.instance.gold);
            predicted.push_back(forward(ex, model).label);
        }
    }
    return score(gold, predicted).macro_f1;
}

} // namespace

TrainingReport train(std::span<const Example> dataset, Model& model, const TrainConfig& config,
                     const ProgressSink& progress, std::span<const Example> validation) {
    config.validate();
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].instance.gold) {
            order.push_back(i);
        }
    }
    if (order.empty()) {
        throw DataError("training set has no labelled instances");
    }

    std::mt19937_64 rng(config.seed);
    TrainingReport report;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        if (config.shuffle) {
            std::shuffle(order.begin(), order.end(), rng);
        }
        double total = 0.0;
        std::size_t correct = 0;
        for (std::size_t i : order) {
            const auto& ex = dataset[i];
            const int gold = *ex.instance.gold;
            const ForwardPass pass = forward_pass(ex, model);
            const double value = loss(pass.prediction, gold);
            if (!std::isfinite(value)) {
                throw NonFiniteLoss("non-finite loss on instance " + std::to_string(ex.instance.id) +
                                    " in epoch " + std::to_string(epoch));
            }
            correct += pass.prediction.label == gold ? 1 : 0;
            backward(pass, gold, model);
            model.store().sgd_step(config.learning_rate);
            total += value;
        }
        EpochReport er;
        er.epoch = epoch;
        er.mean_loss = total / static_cast<double>(order.size());
        er.train_accuracy = static_cast<double>(correct) / static_cast<double>(order.size());
        if (!validation.empty()) {
            er.validation_macro_f1 = validation_f1(validation, model);
        }
        if (progress) {
            progress(er);
        }
        report.epochs.push_back(er);
    }
    return report;
}

std::vector<Fold> kfold_splits(std::size_t n, std::size_t k, std::uint64_t seed) {
    if (k < 2 || k > n) {
        throw std::invalid_argument("fold count must be in [2, n]");
    }
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<Fold> folds(k);
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t f = 0; f < k; ++f) {
            (j % k == f ? folds[f].test : folds[f].train).push_back(perm[j]);
        }
    }
    for (auto& f : folds) {
        std::sort(f.train.begin(), f.train.end());
        std::sort(f.test.begin(), f.test.end());
    }
    return folds;
}

std::vector<double> cross_validate(std::span<const Example> dataset, const TrainConfig& config, std::size_t k,
                                   const EmbeddingTable* pretrained) {
    std::vector<double> scores;
    for (const auto& fold : kfold_splits(dataset.size(), k, config.seed)) {
        std::vector<Example> train_part, test_part;
        for (std::size_t i : fold.train) {
            train_part.push_back(dataset[i]);
        }
        for (std::size_t i : fold.test) {
            test_part.push_back(dataset[i]);
        }
        Model model = create_model(config.model, train_part, config.seed, pretrained, test_part);
        train(train_part, model, config);
        scores.push_back(validation_f1(test_part, model));
    }
    return scores;
}

} // namespace depnn
