#include "psc/qgen.hpp"

#include <cmath>
#include <map>
#include <set>

#include "doctest.h"
#include "psc/common.hpp"
#include "test_support.hpp"

using namespace psc;
using testsupport::ScratchDir;

namespace {

GenConfig builtin_cfg(int n, int top_k, int max_terms, uint64_t seed) {
    GenConfig cfg;
    cfg.n = n;
    cfg.top_k = top_k;
    cfg.max_query_terms = max_terms;
    cfg.seed = seed;
    return cfg;
}

}  // namespace

TEST_CASE("builtin generation is deterministic in (doc, seed, ordinal)") {
    DocumentCorpus corpus;
    corpus.add({"d1", "pancake recipe with savoury oatcake batter"});
    corpus.add({"d2", "unrelated filler text"});
    const auto index = InvertedIndex::build(corpus);
    const auto cfg = builtin_cfg(3, 10, 8, 7);

    const auto first = generate_builtin(corpus.at("d1"), index, cfg);
    const auto second = generate_builtin(corpus.at("d1"), index, cfg);
    CHECK(first.candidates == second.candidates);
    CHECK(first.candidates.size() == 3);
    CHECK(first.provenance == "builtin");

    // Different seed, different sequence.
    auto reseeded = cfg;
    reseeded.seed = 8;
    CHECK(generate_builtin(corpus.at("d1"), index, reseeded).candidates !=
          first.candidates);

    // Growing n extends the sequence in place.
    auto longer_cfg = cfg;
    longer_cfg.n = 6;
    const auto longer = generate_builtin(corpus.at("d1"), index, longer_cfg);
    REQUIRE(longer.candidates.size() == 6);
    for (std::size_t i = 0; i < first.candidates.size(); ++i)
        CHECK(longer.candidates[i] == first.candidates[i]);
}

TEST_CASE("single distinct term forces a single-term candidate") {
    DocumentCorpus corpus;
    corpus.add({"d1", "word word word"});
    const auto index = InvertedIndex::build(corpus);
    const auto set = generate_builtin(corpus.at("d1"), index, builtin_cfg(5, 10, 8, 1));
    for (const std::string& candidate : set.candidates) CHECK(candidate == "word");
}

TEST_CASE("builtin candidates draw only from the document's terms") {
    DocumentCorpus corpus;
    corpus.add({"d1", "alpha beta gamma delta alpha beta"});
    corpus.add({"d2", "epsilon zeta eta theta"});
    const auto index = InvertedIndex::build(corpus);
    const std::set<std::string> allowed{"alpha", "beta", "gamma", "delta"};

    const auto set = generate_builtin(corpus.at("d1"), index, builtin_cfg(50, 3, 2, 11));
    for (const std::string& candidate : set.candidates) {
        CHECK(!candidate.empty());
        for (const std::string& term : tokenize(candidate)) CHECK(allowed.count(term));
    }
}

TEST_CASE("two-term sampling distribution matches the enumerated probabilities") {
    // One document "a a a b": weights are 3*idf(a) and 1*idf(b) with
    // idf(a) = idf(b), so "a" leads with probability 0.75 and the runner-up
    // is forced. Checked against the empirical counts at 3 sigma.
    DocumentCorpus corpus;
    corpus.add({"d1", "a a a b"});
    const auto index = InvertedIndex::build(corpus);

    const int n = 10000;
    const auto set = generate_builtin(corpus.at("d1"), index, builtin_cfg(n, 10, 2, 99));

    std::map<std::string, int> counts;
    for (const std::string& candidate : set.candidates) ++counts[candidate];
    REQUIRE(counts.size() == 2);
    const int a_first = counts.at("a b");
    const int b_first = counts.at("b a");
    CHECK(a_first + b_first == n);
    CHECK(a_first > b_first);

    const double weight_a = 3.0 * std::log(1.0 + (1.0 - 1.0 + 0.5) / 1.5);
    const double weight_b = 1.0 * std::log(1.0 + (1.0 - 1.0 + 0.5) / 1.5);
    const double p = weight_a / (weight_a + weight_b);
    CHECK(p == doctest::Approx(0.75));
    const double sigma = std::sqrt(n * p * (1.0 - p));
    CHECK(std::abs(a_first - n * p) <= 3.0 * sigma);
}

TEST_CASE("zero-term documents are rejected") {
    DocumentCorpus corpus;
    corpus.add({"d1", "some words"});
    const auto index = InvertedIndex::build(corpus);
    const Document punctuation{"dx", "!!!"};
    CHECK_THROWS_AS(generate_builtin(punctuation, index, builtin_cfg(3, 10, 8, 1)),
                    ValidationError);
}

TEST_CASE("config validation") {
    CHECK_THROWS_AS(validate_config(builtin_cfg(0, 10, 8, 1)), ValidationError);
    CHECK_THROWS_AS(validate_config(builtin_cfg(1, 0, 8, 1)), ValidationError);
    CHECK_THROWS_AS(validate_config(builtin_cfg(1, 10, 0, 1)), ValidationError);
    GenConfig external;
    external.backend = GenBackend::ExternalService;
    CHECK_THROWS_AS(validate_config(external), ValidationError);
}

TEST_CASE("generate_for_judged_turns emits one set per (turn, positive)") {
    DocumentCorpus corpus;
    corpus.add({"d1", "alpha beta"});
    corpus.add({"d2", "gamma delta"});
    corpus.add({"d3", "epsilon zeta"});
    const auto index = InvertedIndex::build(corpus);

    Conversation conv;
    conv.conv_id = "c1";
    for (int t = 1; t <= 4; ++t) conv.turns.push_back({t, "s", "turn " + std::to_string(t)});
    conv.judgments[2] = {{"d1", 1}};
    conv.judgments[4] = {{"d3", 1}, {"d2", 1}};

    const auto cfg = builtin_cfg(4, 10, 8, 5);
    const auto sets = generate_for_judged_turns(std::vector<Conversation>{conv}, corpus,
                                                index, cfg);
    REQUIRE(sets.size() == 3);
    CHECK(sets[0].turn_index == 2);
    CHECK(sets[0].doc_id == "d1");
    CHECK(sets[1].turn_index == 4);
    CHECK(sets[1].doc_id == "d2");  // doc_id ascending within the turn
    CHECK(sets[2].turn_index == 4);
    CHECK(sets[2].doc_id == "d3");
    for (const auto& set : sets) {
        CHECK(set.conv_id == "c1");
        CHECK(set.candidates.size() == 4);
    }

    // Thread count must not change the output.
    const auto threaded = generate_for_judged_turns(std::vector<Conversation>{conv},
                                                    corpus, index, cfg, 8);
    CHECK(threaded == sets);

    Conversation empty;
    empty.conv_id = "c2";
    empty.turns = {{1, "s", "x"}};
    CHECK(generate_for_judged_turns(std::vector<Conversation>{empty}, corpus, index, cfg)
              .empty());

    Conversation broken = conv;
    broken.judgments[2].push_back({"ghost", 1});
    CHECK_THROWS_WITH_AS(generate_for_judged_turns(std::vector<Conversation>{broken},
                                                   corpus, index, cfg),
                         doctest::Contains("ghost"), ValidationError);
}

TEST_CASE("candidate files round-trip") {
    ScratchDir dir("qgen");
    std::vector<CandidateSet> sets;
    sets.push_back({"c1", 2, "d1", "builtin", {"alpha beta", "beta"}});
    sets.push_back({"c1", 4, "d2", "external", {"gamma"}});

    const auto path = dir.file("cands.jsonl");
    write_candidates(sets, path);
    CHECK(load_candidates(path) == sets);
}
