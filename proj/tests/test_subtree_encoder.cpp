#include <doctest.h>

#include <random>

#include "depnn/classifier.hpp"
#include "depnn/subtree_encoder.hpp"
#include "depnn/synthetic.hpp"
#include "support/oracles.hpp"

using namespace depnn;

namespace {

Example priests_example() {
    return prepare(make_instance(1, depnn::testing::priests_sentence(), 2, 2, 10, 10, labels::kOther));
}

Vector word_vec(const Model& m, const std::string& form) {
    return m.store().value(param::kWordEmbedding).col(m.words().lookup(form));
}

Vector concat(const Vector& a, const Vector& b) {
    Vector out(a.size() + b.size());
    out << a, b;
    return out;
}

} // namespace

TEST_CASE("word without attached subtree uses c_LEAF") {
    const auto ex = priests_example();
    std::vector<Example> data{ex};
    Model model = create_model(synthetic::small_config(), data, 3);
    model.store().at(param::kLeaf).value.setConstant(0.125);

    const auto enc = encode_word(ex.instance.graph, ex.adp, 10, model);
    CHECK(enc.nodes.size() == 1);
    CHECK(enc.p() == concat(word_vec(model, "work"), model.store().value(param::kLeaf).col(0)));
}

TEST_CASE("composition follows the worked example bottom-up") {
    const auto ex = priests_example();
    std::vector<Example> data{ex};
    Model model = create_model(synthetic::small_config(), data, 3);
    auto& store = model.store();
    store.at(param::kCompositionBias).value.setConstant(0.05);
    store.at(param::kLeaf).value.setConstant(-0.2);
    const Vector b = store.value(param::kCompositionBias);
    const Vector leaf = store.value(param::kLeaf);
    const Matrix& w_det = store.value("comp.W.det");
    const Matrix& w_dobj = store.value("comp.W.dobj");
    const Matrix& w_prep_on = store.value("comp.W.prep_on");

    const Vector p_the = concat(word_vec(model, "the"), leaf);
    const Vector c_sabbath = (w_det * p_the + b).array().tanh().matrix();
    const Vector p_sabbath = concat(word_vec(model, "Sabbath"), c_sabbath);
    const Vector c_commandment = (w_det * p_the + b).array().tanh().matrix();
    const Vector p_commandment = concat(word_vec(model, "commandment"), c_commandment);
    const Vector c_broke = (w_prep_on * p_sabbath + w_dobj * p_commandment + b).array().tanh().matrix();

    const auto enc = encode_word(ex.instance.graph, ex.adp, 3, model);
    CHECK((enc.c() - c_broke).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(enc.p().head(model.config().dim) == word_vec(model, "broke"));
    // broke + commandment + the + Sabbath + the
    CHECK(enc.tokens_read == 5);
    CHECK(enc.c().cwiseAbs().maxCoeff() < 1.0);
}

TEST_CASE("all-zero parameters give zero subtree vectors") {
    const auto g = depnn::testing::make_graph({{"a", 0, "root"}, {"b", 1, "amod"}, {"c", 2, "det"}, {"d", 1, "nsubj"}});
    auto ex = prepare(make_instance(1, g, 1, 1, 4, 4, 0));
    std::vector<Example> data{ex};
    Model model = create_model(synthetic::small_config(), data, 3);
    for (auto& [name, p] : model.store()) {
        p.value.setZero();
    }
    const auto enc = encode_word(ex.instance.graph, ex.adp, 1, model);
    REQUIRE(enc.nodes.size() == 3);
    for (const auto& node : enc.nodes) {
        CHECK(node.c.isZero());
    }
}

TEST_CASE("child order does not matter beyond reassociation") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        synthetic::ExampleShape shape;
        shape.path_words = 2;
        auto ex = synthetic::random_example(rng, shape);
        std::vector<Example> data{ex};
        Model model = create_model(synthetic::small_config(), data, static_cast<std::uint64_t>(trial));
        for (TokenIndex w : ex.adp.words()) {
            const auto enc = encode_word(ex.instance.graph, ex.adp, w, model);
            const auto& root = enc.root();
            if (root.leaf()) {
                continue;
            }
            // Re-sum the root's children in reverse order.
            Vector sum = model.store().value(param::kCompositionBias);
            for (auto it = root.children.rbegin(); it != root.children.rend(); ++it) {
                sum += model.store().value(it->second) * enc.nodes[it->first].p;
            }
            const Vector c = sum.array().tanh().matrix();
            CHECK((c - root.c).cwiseAbs().maxCoeff() < 1e-12);
            // Canonical order is ascending token index.
            for (std::size_t k = 1; k < root.children.size(); ++k) {
                CHECK(enc.nodes[root.children[k - 1].first].token < enc.nodes[root.children[k].first].token);
            }
            CHECK(enc.tokens_read == 1 + ex.adp.subtree_tokens(w).size());
        }
    }
}

TEST_CASE("encode_backward") {
    std::mt19937_64 rng(21);
    synthetic::ExampleShape shape;
    shape.path_words = 1;
    shape.max_subtree_depth = 3;
    Example ex = synthetic::random_example(rng, shape);
    while (ex.adp.subtree_tokens(ex.adp.words().front()).size() < 3) {
        ex = synthetic::random_example(rng, shape);
    }
    const TokenIndex word = ex.adp.words().front();
    std::vector<Example> data{ex};
    Model model = create_model(synthetic::small_config(), data, 5);
    init_uniform(model.store(), 5);
    for (auto& [name, p] : model.store()) {
        if (p.init == InitKind::Zero) {
            p.value.setRandom();
            p.value *= 0.3;
        }
    }
    const int width = model.config().dim + model.config().dim_c;

    SUBCASE("zero upstream accumulates nothing") {
        const auto enc = encode_word(ex.instance.graph, ex.adp, word, model);
        encode_backward(enc, Vector::Zero(width), model);
        for (const auto& [name, p] : model.store()) {
            CHECK(p.grad.isZero());
        }
    }

    SUBCASE("matches finite differences") {
        const Vector r = Vector::LinSpaced(width, -1.0, 1.5);
        auto loss = [&] { return r.dot(encode_word(ex.instance.graph, ex.adp, word, model).p()); };
        model.store().zero_grad();
        encode_backward(encode_word(ex.instance.graph, ex.adp, word, model), r, model);
        const auto report = gradient_check(loss, model.store());
        for (const auto& t : report.tensors) {
            INFO(t.name);
            CHECK(t.max_relative_error < 1e-5);
        }
    }
}

TEST_CASE("identical subtrees contribute additively") {
    // Two path words, each with one identical det -> "the" subtree.
    const auto g = depnn::testing::make_graph(
        {{"the", 2, "det"}, {"cat", 3, "nsubj"}, {"saw", 0, "root"}, {"the", 5, "det"}, {"dog", 3, "dobj"}});
    auto ex = prepare(make_instance(1, g, 2, 2, 5, 5, 0));
    std::vector<Example> data{ex};
    Model model = create_model(synthetic::small_config(), data, 5);
    // Give both entity words the same embedding so the subtrees are identical.
    auto& emb = model.store().at(param::kWordEmbedding).value;
    emb.col(model.words().lookup("dog")) = emb.col(model.words().lookup("cat"));
    const Vector up = Vector::Constant(model.config().dim + model.config().dim_c, 0.7);

    const auto enc_cat = encode_word(ex.instance.graph, ex.adp, 2, model);
    const auto enc_dog = encode_word(ex.instance.graph, ex.adp, 5, model);
    CHECK(enc_cat.p() == enc_dog.p());

    encode_backward(enc_cat, up, model);
    const Matrix single = model.store().at("comp.W.det").grad;
    encode_backward(enc_dog, up, model);
    const Matrix twice = model.store().at("comp.W.det").grad;
    CHECK(twice == 2.0 * single);
    CHECK_FALSE(single.isZero());
}
