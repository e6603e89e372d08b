#include <doctest.h>

#include <random>
#include <sstream>

#include "depnn/classifier.hpp"
#include "depnn/corpus_io.hpp"
#include "depnn/synthetic.hpp"
#include "support/oracles.hpp"

using namespace depnn;

namespace {

std::vector<int> labels_with_counts(const std::vector<std::pair<std::string, long>>& counts) {
    std::vector<int> out;
    bool flip = false;
    for (const auto& [name, count] : counts) {
        for (long i = 0; i < count; ++i) {
            if (name == "Other") {
                out.push_back(labels::kOther);
            } else {
                const auto& types = labels::type_names();
                const int t = static_cast<int>(std::find(types.begin(), types.end(), name) - types.begin());
                out.push_back(labels::directed(t, flip));
                flip = !flip;
            }
        }
    }
    return out;
}

const std::vector<std::pair<std::string, long>> kTrainCounts = {
    {"Other", 1410},           {"Cause-Effect", 1003},     {"Component-Whole", 941},
    {"Entity-Destination", 845}, {"Product-Producer", 717}, {"Entity-Origin", 716},
    {"Member-Collection", 690}, {"Message-Topic", 634},     {"Content-Container", 540},
    {"Instrument-Agency", 504}};

const std::vector<std::pair<std::string, long>> kTestCounts = {
    {"Other", 454},            {"Cause-Effect", 328},      {"Component-Whole", 312},
    {"Entity-Destination", 292}, {"Product-Producer", 231}, {"Entity-Origin", 258},
    {"Member-Collection", 233}, {"Message-Topic", 261},     {"Content-Container", 192},
    {"Instrument-Agency", 156}};

const char* kRawSample =
    "1\t\"The system as described above has its greatest application in an arrayed <e1>configuration</e1> of "
    "antenna <e2>elements</e2>.\"\n"
    "Component-Whole(e2,e1)\n"
    "Comment: Not a collection: there is structure here, organisation.\n"
    "\n"
    "2\t\"The <e1>child</e1> was carefully wrapped and bound into the <e2>cradle</e2> by means of a cord.\"\n"
    "Other\n"
    "Comment:\n"
    "\n";

} // namespace

TEST_CASE("label indexing") {
    CHECK(labels::names()[0] == "Other");
    CHECK(labels::names()[1] == "Cause-Effect(e1,e2)");
    CHECK(labels::names()[2] == "Cause-Effect(e2,e1)");
    CHECK(labels::names()[18] == "Content-Container(e2,e1)");
    for (int i = 0; i < labels::kCount; ++i) {
        CHECK(labels::index(labels::name(i)) == i);
    }
    for (int t = 0; t < labels::kTypeCount; ++t) {
        CHECK(labels::type_of(labels::directed(t, false)) == t);
        CHECK(labels::type_of(labels::directed(t, true)) == t);
    }
    CHECK(labels::type_of(labels::kOther) == -1);
    CHECK_THROWS_AS(labels::index("Cause-Effect"), FormatError);
}

TEST_CASE("read_semeval_raw") {
    std::istringstream in(kRawSample);
    const auto records = read_semeval_raw(in);
    REQUIRE(records.size() == 2);
    const auto& r = records[0];
    CHECK(r.id == 1);
    CHECK(r.label == labels::index("Component-Whole(e2,e1)"));
    CHECK(r.comment == "Not a collection: there is structure here, organisation.");
    CHECK(r.text.find('<') == std::string::npos);
    CHECK(r.text.substr(r.e1_begin, r.e1_end - r.e1_begin) == "configuration");
    CHECK(r.text.substr(r.e2_begin, r.e2_end - r.e2_begin) == "elements");
    CHECK(records[1].label == labels::kOther);
    CHECK(records[1].comment.empty());

    SUBCASE("test file without labels") {
        std::istringstream unlabelled("8001\t\"The <e1>a</e1> b <e2>c</e2>.\"\n");
        const auto recs = read_semeval_raw(unlabelled);
        REQUIRE(recs.size() == 1);
        CHECK_FALSE(recs[0].label.has_value());
    }

    SUBCASE("empty input") {
        std::istringstream empty("");
        CHECK(read_semeval_raw(empty).empty());
    }

    SUBCASE("format errors carry the line number") {
        std::istringstream bad("1\t\"<e1>a</e1> <e2>b</e2>\"\nOther\n\n2\t\"<e1>a</e1> b\"\n");
        try {
            read_semeval_raw(bad);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line() == 4);
        }
        std::istringstream label("1\t\"<e1>a</e1> <e2>b</e2>\"\nNot-A-Label\n");
        CHECK_THROWS_AS(read_semeval_raw(label), FormatError);
    }
}

TEST_CASE("DEPNN-INST reading") {
    const std::string text =
        "DEPNN-INST 1\n"
        "# comment line\n"
        "7\tInstrument-Agency(e2,e1)\t2:2\t7:7\t"
        "A|a|2|det|_|_ thief|thief|3|nsubj|O|noun.person broke|break|0|root|_|_ the|_|5|det|_|_ "
        "ignition|_|3|dobj|_|_ with|_|-|_|_|_ screwdriver|_|3|prep_with|O|noun.artifact\n";
    std::istringstream in(text);
    const auto instances = read_parsed_instances(in);
    REQUIRE(instances.size() == 1);
    const auto& inst = instances[0];
    CHECK(inst.id == 7);
    CHECK(inst.gold == labels::index("Instrument-Agency(e2,e1)"));
    CHECK(inst.e1.head == 2);
    CHECK(inst.e2.head == 7);
    CHECK_FALSE(inst.graph.is_active(6));
    CHECK(inst.graph.token(2).wn_hypernym == "noun.person");
    CHECK(inst.graph.token(4).lemma == std::nullopt);
    const auto ex = prepare(inst);
    CHECK(render_path(inst.graph, ex.adp) == "thief nsubj_inv broke prep_with screwdriver");

    SUBCASE("a cycle is a tree violation") {
        std::istringstream cyc("DEPNN-INST 1\n1\tOther\t1:1\t2:2\ta|_|2|x|_|_ b|_|1|y|_|_\n");
        CHECK_THROWS_AS(read_parsed_instances(cyc), TreeViolation);
    }
    SUBCASE("missing header") {
        std::istringstream no("1\tOther\t1:1\t2:2\ta|_|0|root|_|_ b|_|1|y|_|_\n");
        CHECK_THROWS_AS(read_parsed_instances(no), FormatError);
    }
    SUBCASE("overlapping spans") {
        std::istringstream ov("DEPNN-INST 1\n1\tOther\t1:2\t2:2\ta|_|0|root|_|_ b|_|1|y|_|_\n");
        CHECK_THROWS_AS(read_parsed_instances(ov), InvalidSpan);
    }
    SUBCASE("malformed token") {
        std::istringstream mal("DEPNN-INST 1\n1\tOther\t1:1\t2:2\ta|_|0|root|_ b|_|1|y|_|_\n");
        try {
            read_parsed_instances(mal);
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.line() == 2);
        }
    }
}

TEST_CASE("DEPNN-INST round trip") {
    auto corpus = synthetic::separable_corpus(40, 5);
    // Awkward characters survive escaping.
    {
        auto tokens = corpus[0].graph.tokens();
        tokens[0].form = "a|b%c d";
        tokens[0].lemma = "_";
        tokens[0].ner_tag = "";
        corpus[0] = make_instance(corpus[0].id, DependencyGraph(tokens, corpus[0].graph.arcs()), corpus[0].e1.start,
                                  corpus[0].e1.end, corpus[0].e2.start, corpus[0].e2.end, std::nullopt);
    }
    std::stringstream buf;
    write_parsed_instances(buf, corpus);
    const auto back = read_parsed_instances(buf);
    CHECK(back == corpus);

    std::stringstream again;
    write_parsed_instances(again, back);
    CHECK(again.str() == buf.str());
}

TEST_CASE("read_conll and convert_corpus") {
    const std::string conll =
        "# id = 1\n"
        "1\tA\ta\tDT\tDT\t_\t2\tdet\t_\t_\n"
        "2\tthief\tthief\tNN\tNN\t_\t3\tnsubj\t_\tNER=O|WN=noun.person\n"
        "3\tbroke\tbreak\tVB\tVBD\t_\t0\troot\t_\t_\n"
        "4\tthe\tthe\tDT\tDT\t_\t5\tdet\t_\t_\n"
        "5\tignition\tignition\tNN\tNN\t_\t3\tdobj\t_\t_\n"
        "6\twith\twith\tIN\tIN\t_\t3\tprep\t_\t_\n"
        "7\tscrewdriver\tscrewdriver\tNN\tNN\t_\t6\tpobj\t_\tWN=noun.artifact\n"
        "8\t.\t.\t.\t.\t_\t3\tpunct\t_\t_\n"
        "\n"
        "# id = 2\n"
        "1\t-LRB-\t_\t_\t_\t_\t2\tpunct\t_\t_\n"
        "2\tdogs\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "3\t-RRB-\t_\t_\t_\t_\t2\tpunct\t_\t_\n"
        "4\tbark\t_\t_\t_\t_\t2\tdep\t_\t_\n"
        "\n"
        "# id = 3\n"
        "1\tcompletely\t_\t_\t_\t_\t0\troot\t_\t_\n"
        "2\tdifferent\t_\t_\t_\t_\t1\tdep\t_\t_\n"
        "\n";
    std::istringstream cin(conll);
    const auto parses = read_conll(cin);
    REQUIRE(parses.size() == 3);
    CHECK(parses[0].id == 1);
    CHECK(parses[0].tokens.size() == 8);
    CHECK(parses[0].tokens[1].ner_tag == "O");
    CHECK(parses[0].tokens[1].wn_hypernym == "noun.person");
    CHECK(parses[0].tokens[6].wn_hypernym == "noun.artifact");

    std::istringstream rin(
        "1\t\"A <e1>thief</e1> broke the ignition with <e2>screwdriver</e2>.\"\nInstrument-Agency(e2,e1)\n\n"
        "2\t\"(<e1>dogs</e1>) <e2>bark</e2>\"\nOther\n\n"
        "3\t\"Some <e1>other</e1> <e2>words</e2>\"\nOther\n\n");
    const auto raw = read_semeval_raw(rin);

    const auto plain = convert_corpus(raw, parses, false);
    REQUIRE(plain.instances.size() == 2);
    REQUIRE(plain.failures.size() == 1);
    CHECK(plain.failures[0].id == 3);
    CHECK(plain.instances[0].e1.head == 2);
    CHECK(plain.instances[0].e2.head == 7);
    CHECK(plain.instances[1].e1.head == 2);
    CHECK(plain.instances[1].e2.head == 4);
    CHECK(render_path(plain.instances[0].graph, prepare(plain.instances[0]).adp) ==
          "thief nsubj_inv broke prep with pobj screwdriver");

    const auto collapsed = convert_corpus(raw, parses, true);
    REQUIRE(collapsed.instances.size() == 2);
    CHECK(render_path(collapsed.instances[0].graph, prepare(collapsed.instances[0]).adp) ==
          "thief nsubj_inv broke prep_with screwdriver");
}

TEST_CASE("load_embeddings") {
    std::istringstream in("cat 1 0 0 0\ndog 0 1 0 0\nthe 0 0 1 2\n");
    const auto table = load_embeddings(in);
    CHECK(table.dim == 4);
    CHECK(table.size() == 3);
    CHECK(table.lookup("Dog") == table.vectors.col(1));
    Vector mean(4);
    mean << 1.0 / 3, 1.0 / 3, 1.0 / 3, 2.0 / 3;
    CHECK((table.unk - mean).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(table.lookup("zebra") == table.unk);

    std::istringstream header("3 4\ncat 1 0 0 0\ndog 0 1 0 0\nthe 0 0 1 2\n");
    CHECK(load_embeddings(header).vectors == table.vectors);

    std::istringstream ragged("cat 1 0 0 0\ndog 0 1 0\n");
    CHECK_THROWS_AS(load_embeddings(ragged), DimensionMismatch);
    std::istringstream wrong("cat 1 0 0 0\n");
    CHECK_THROWS_AS(load_embeddings(wrong, 50), DimensionMismatch);
    std::istringstream junk("cat 1 x 0 0\n");
    CHECK_THROWS_AS(load_embeddings(junk), FormatError);
}

TEST_CASE("dataset statistics") {
    SUBCASE("training distribution") {
        const auto gold = labels_with_counts(kTrainCounts);
        const auto stats = dataset_stats(gold);
        CHECK(stats.total == 8000);
        CHECK(stats.row("Other").count == 1410);
        CHECK(stats.row("Other").percent == 17.63);
        CHECK(stats.row("Cause-Effect").count == 1003);
        CHECK(stats.row("Cause-Effect").percent == 12.54);
        CHECK(stats.row("Member-Collection").percent == 8.63);
        // 634 / 8000 = 7.925 exactly; half-up gives 7.93.
        CHECK(stats.row("Message-Topic").percent == 7.93);
        CHECK(stats.rows[1].name == "Cause-Effect");
        CHECK(stats.rows.back().name == "Instrument-Agency");
        const std::string text = render_stats(stats);
        CHECK(text.find("Other                  1410 ( 17.63%)") != std::string::npos);
        CHECK(text.find("Total                  8000 (100.00%)") != std::string::npos);
    }

    SUBCASE("test distribution") {
        const auto gold = labels_with_counts(kTestCounts);
        const auto stats = dataset_stats(gold);
        CHECK(stats.total == 2717);
        CHECK(stats.row("Other").percent == 16.71);
        CHECK(stats.row("Instrument-Agency").count == 156);
        CHECK(stats.row("Instrument-Agency").percent == 5.74);
        CHECK(stats.row("Entity-Origin").percent == 9.50);
        CHECK(stats.row("Product-Producer").percent == 8.50);
    }

    SUBCASE("directions fold into types") {
        std::mt19937_64 rng(2);
        std::vector<int> gold(500);
        for (auto& g : gold) {
            g = std::uniform_int_distribution<int>(0, labels::kCount - 1)(rng);
        }
        const auto stats = dataset_stats(gold);
        for (int t = 0; t < labels::kTypeCount; ++t) {
            const long expected = std::count(gold.begin(), gold.end(), labels::directed(t, false)) +
                                  std::count(gold.begin(), gold.end(), labels::directed(t, true));
            CHECK(stats.row(labels::type_names()[static_cast<std::size_t>(t)]).count == expected);
        }
    }

    SUBCASE("empty input") {
        const auto stats = dataset_stats(std::span<const int>{});
        CHECK(stats.total == 0);
        CHECK(stats.rows.size() == 10);
        for (const auto& r : stats.rows) {
            CHECK(r.count == 0);
            CHECK(r.percent == 0.0);
        }
    }
}
