#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "depnn/classifier.hpp"
#include "depnn/synthetic.hpp"
#include "support/oracles.hpp"

using namespace depnn;

namespace {

std::vector<Example> random_examples(std::uint64_t seed, int count, int words = 3) {
    std::mt19937_64 rng(seed);
    std::vector<Example> out;
    for (int i = 0; i < count; ++i) {
        synthetic::ExampleShape shape;
        shape.path_words = words;
        shape.label = i % labels::kCount;
        out.push_back(synthetic::random_example(rng, shape, i + 1));
    }
    return out;
}

double full_gradient_error(const ModelConfig& config, std::uint64_t seed) {
    auto data = random_examples(seed, 1, 3);
    const Example& ex = data[0];
    Model model = create_model(config, data, seed);
    synthetic::spread_for_gradient_check(model, seed);
    const int gold = *ex.instance.gold;
    model.store().zero_grad();
    backward(forward_pass(ex, model), gold, model);
    const auto report = gradient_check([&] { return loss(forward(ex, model), gold); }, model.store());
    return report.worst();
}

} // namespace

TEST_CASE("softmax output layer") {
    auto data = random_examples(1, 1);
    Model model = create_model(synthetic::small_config(), data, 1);
    for (auto& [name, p] : model.store()) {
        p.value.setZero();
    }
    const auto pred = forward(data[0], model);
    for (int i = 0; i < labels::kCount; ++i) {
        CHECK(pred.distribution(i) == doctest::Approx(1.0 / 19).epsilon(1e-15));
    }
    CHECK(loss(pred, 4) == doctest::Approx(std::log(19.0)).epsilon(1e-14));
    CHECK(std::log(19.0) == doctest::Approx(2.944).epsilon(1e-3));

    Prediction certain;
    certain.distribution = Vector::Zero(19);
    certain.distribution(7) = 1.0;
    CHECK(loss(certain, 7) == 0.0);
    CHECK(std::isfinite(loss(certain, 2)));

    SUBCASE("constructed W2 forces a class") {
        init_uniform(model.store(), 3);
        const Vector m = forward_pass(data[0], model).features;
        auto& w2 = model.store().at(param::kOutput).value;
        w2.setZero();
        w2.row(3) = m.transpose() / m.squaredNorm() * 50.0;
        const auto forced = forward_pass(data[0], model);
        CHECK(forced.prediction.label == 3);
        // y = softmax(W2 M) evaluated directly
        const Vector logits = w2 * forced.features;
        const Vector expected = (logits.array() - logits.maxCoeff()).exp().matrix();
        CHECK((forced.prediction.distribution - expected / expected.sum()).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("feature vector layout") {
    auto data = random_examples(4, 2);
    ModelConfig config = synthetic::small_config();
    config.use_ner = true;
    config.use_wordnet = true;
    Model model = create_model(config, data, 2);
    const auto pass = forward_pass(data[0], model);
    CHECK(pass.features.size() == config.hidden + 4 * config.dim_lex);
    CHECK(pass.features.head(config.hidden) == pass.conv.pooled);
    REQUIRE(pass.lexical_sources.size() == 4);
    const auto& e1 = data[0].instance.graph.token(data[0].instance.e1.head);
    CHECK(pass.lexical_sources[0].second == model.ner_tags().lookup(*e1.ner_tag));
    CHECK(pass.lexical_sources[2].second == model.wn_tags().lookup(*e1.wn_hypernym));
    CHECK(pass.features.segment(config.hidden + 2 * config.dim_lex, config.dim_lex) ==
          model.store().value(param::kWordNetEmbedding).col(pass.lexical_sources[2].second));
}

TEST_CASE("full model gradients match finite differences") {
    ModelConfig base = synthetic::small_config();
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        CAPTURE(seed);
        CHECK(full_gradient_error(base, seed) < 1e-5);
    }
    ModelConfig lex = base;
    lex.use_ner = true;
    lex.use_wordnet = true;
    CHECK(full_gradient_error(lex, 5) < 1e-5);
    ModelConfig k3 = base;
    k3.window = 3;
    CHECK(full_gradient_error(k3, 6) < 1e-5);
    ModelConfig flat = base;
    flat.use_subtrees = false;
    CHECK(full_gradient_error(flat, 7) < 1e-5);
    ModelConfig linear = base;
    linear.conv_tanh = false;
    CHECK(full_gradient_error(linear, 8) < 1e-5);
}

TEST_CASE("SGD behaviour") {
    auto data = random_examples(9, 1);
    const Example& ex = data[0];

    SUBCASE("a zero rate leaves parameters unchanged") {
        Model model = create_model(synthetic::small_config(), data, 1);
        const Model before = model;
        train_step(ex, model, 0.0);
        CHECK(model == before);
    }

    SUBCASE("repeated steps on one instance overfit it") {
        Model model = create_model(ModelConfig{}, data, 1);
        double previous = train_step(ex, model, 0.05);
        for (int i = 1; i < 200; ++i) {
            const double current = train_step(ex, model, 0.05);
            CHECK(current < previous);
            previous = current;
        }
        CHECK(loss(forward(ex, model), *ex.instance.gold) < 0.01);
    }

    SUBCASE("a tiny step does not increase the loss") {
        Model model = create_model(synthetic::small_config(), data, 1);
        synthetic::spread_for_gradient_check(model, 4);
        for (int i = 0; i < 20; ++i) {
            const double before = train_step(ex, model, 1e-6);
            CHECK(loss(forward(ex, model), *ex.instance.gold) <= before);
        }
    }

    SUBCASE("unlabelled instances cannot be trained on") {
        Model model = create_model(synthetic::small_config(), data, 1);
        Example unlabelled = ex;
        unlabelled.instance.gold.reset();
        CHECK_THROWS_AS(train_step(unlabelled, model, 0.05), DataError);
    }
}

TEST_CASE("training on the separable synthetic corpus") {
    const auto data = prepare_all(synthetic::separable_corpus(synthetic::kBundledSize, synthetic::kBundledSeed));
    TrainConfig config;
    config.model = synthetic::small_config();
    config.epochs = 200;
    Model model = create_model(config.model, data, config.seed);

    SUBCASE("zero epochs is a no-op") {
        TrainConfig none = config;
        none.epochs = 0;
        const Model before = model;
        const auto report = train(data, model, none);
        CHECK(report.epochs.empty());
        CHECK(model == before);
    }

    SUBCASE("reaches full training accuracy") {
        int reached = -1;
        train(data, model, config, [&](const EpochReport& r) {
            if (reached < 0 && r.train_accuracy >= 0.99) {
                reached = r.epoch;
            }
        });
        int correct = 0;
        for (const auto& ex : data) {
            correct += forward(ex, model).label == *ex.instance.gold ? 1 : 0;
        }
        CHECK(reached > 0);
        CHECK(static_cast<double>(correct) / static_cast<double>(data.size()) >= 0.99);
    }

    SUBCASE("seeded training is deterministic") {
        config.epochs = 3;
        Model a = model, b = model;
        const auto ra = train(data, a, config);
        const auto rb = train(data, b, config);
        CHECK(a == b);
        for (std::size_t i = 0; i < ra.epochs.size(); ++i) {
            CHECK(ra.epochs[i].mean_loss == rb.epochs[i].mean_loss);
        }
        std::stringstream sa, sb;
        a.save(sa);
        b.save(sb);
        CHECK(sa.str() == sb.str());
    }
}

TEST_CASE("off-path tokens are ignored without subtrees") {
    std::mt19937_64 rng(31);
    ModelConfig flat = synthetic::small_config();
    flat.use_subtrees = false;
    for (int trial = 0; trial < 20; ++trial) {
        synthetic::ExampleShape shape;
        shape.path_words = 3;
        auto ex = synthetic::random_example(rng, shape);
        std::vector<Example> data{ex};
        Model model = create_model(flat, data, 3);
        Model with_subtrees = create_model(synthetic::small_config(), data, 3);

        // Rename every off-path token to a different known word.
        const auto on_path = ex.adp.words();
        auto tokens = ex.instance.graph.tokens();
        bool subtree_changed = false;
        for (auto& tok : tokens) {
            if (std::find(on_path.begin(), on_path.end(), tok.index) == on_path.end()) {
                tok.form = tok.form == "the" ? "old" : "the";
            }
        }
        for (TokenIndex w : on_path) {
            subtree_changed = subtree_changed || !ex.adp.subtree_tokens(w).empty();
        }
        Example altered = ex;
        altered.instance.graph = DependencyGraph(tokens, ex.instance.graph.arcs());
        altered.adp = build_adp(altered.instance.graph, altered.instance.e1, altered.instance.e2);

        CHECK(forward(ex, model).distribution == forward(altered, model).distribution);
        if (subtree_changed) {
            CHECK_FALSE(forward(ex, with_subtrees).distribution == forward(altered, with_subtrees).distribution);
        }
    }
}

TEST_CASE("model save and load") {
    auto data = random_examples(12, 5);
    ModelConfig config = synthetic::small_config();
    config.use_ner = true;
    Model model = create_model(config, data, 4);
    std::stringstream buf;
    model.save(buf);
    const Model loaded = Model::load(buf);
    CHECK(loaded == model);
    for (const auto& ex : data) {
        CHECK(forward(ex, loaded).distribution == forward(ex, model).distribution);
    }
}

TEST_CASE("pretrained embeddings seed the word table") {
    auto data = random_examples(13, 2);
    EmbeddingTable table;
    table.dim = synthetic::small_config().dim;
    const std::string form = data[0].instance.graph.token(data[0].instance.e1.head).form;
    table.words = {form, "unseen"};
    table.index = {{form, 0}, {"unseen", 1}};
    table.vectors = Matrix::Random(table.dim, 2);
    table.unk = table.vectors.rowwise().mean();
    Model model = create_model(synthetic::small_config(), data, 2, &table);
    const auto& emb = model.store().value(param::kWordEmbedding);
    CHECK(emb.col(model.words().lookup(form)) == table.vectors.col(0));
    CHECK(emb.col(Vocabulary::kUnk) == table.unk);
    CHECK(model.words().find("unseen") < 0);

    ModelConfig wrong = synthetic::small_config();
    wrong.dim += 1;
    CHECK_THROWS_AS(create_model(wrong, data, 2, &table), DimensionMismatch);
}

TEST_CASE("hyperparameter defaults") {
    const auto d50 = TrainConfig::for_embedding_dim(50);
    CHECK(d50.model.dim_c == 25);
    CHECK(d50.model.hidden == 200);
    CHECK(d50.model.window == 5);
    CHECK(d50.learning_rate == 0.05);
    const auto d200 = TrainConfig::for_embedding_dim(200);
    CHECK(d200.model.dim_c == 100);
    CHECK(d200.model.hidden == 400);
    CHECK(d200.model.window == 5);
    CHECK(d200.learning_rate == 0.05);
    CHECK(TrainConfig{}.model == d50.model);
}

TEST_CASE("kfold_splits partitions the data") {
    for (std::size_t n : {5u, 17u, 100u}) {
        for (std::size_t k : {2u, 5u}) {
            const auto folds = kfold_splits(n, k, 3);
            REQUIRE(folds.size() == k);
            std::vector<int> seen(n, 0);
            for (const auto& f : folds) {
                CHECK(f.train.size() + f.test.size() == n);
                for (std::size_t i : f.test) {
                    ++seen[i];
                }
                std::vector<bool> in_test(n, false);
                for (std::size_t i : f.test) {
                    in_test[i] = true;
                }
                for (std::size_t i : f.train) {
                    CHECK_FALSE(in_test[i]);
                }
            }
            CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
        }
    }
    CHECK_THROWS_AS(kfold_splits(3, 4, 1), std::invalid_argument);
}
