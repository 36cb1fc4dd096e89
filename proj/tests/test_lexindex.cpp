#include "psc/lexindex.hpp"

#include <cmath>

#include "doctest.h"
#include "psc/common.hpp"
#include "psc/rng.hpp"
#include "test_support.hpp"

using namespace psc;
using testsupport::ScratchDir;
namespace oracle = testsupport::oracle;

namespace {

DocumentCorpus two_doc_corpus() {
    DocumentCorpus corpus;
    corpus.add({"d1", "a b a"});
    corpus.add({"d2", "b c"});
    return corpus;
}

// Random corpora/queries over a small vocabulary, shared with the
// acceptance suite's oracle-equivalence criterion.
oracle::Corpus random_corpus(SplitMix64& rng, std::size_t max_docs) {
    oracle::Corpus corpus;
    const std::size_t docs = 1 + rng.next_below(max_docs);
    const std::size_t vocab = 3 + rng.next_below(40);
    for (std::size_t d = 0; d < docs; ++d) {
        std::string text;
        const std::size_t len = 1 + rng.next_below(30);
        for (std::size_t i = 0; i < len; ++i) {
            if (i) text += ' ';
            text += "w" + std::to_string(rng.next_below(vocab));
        }
        corpus.docs.emplace_back("doc" + std::to_string(d), text);
    }
    return corpus;
}

std::string random_query(SplitMix64& rng) {
    std::string query;
    const std::size_t len = 1 + rng.next_below(5);
    for (std::size_t i = 0; i < len; ++i) {
        if (i) query += ' ';
        // occasionally a term no document contains
        query += rng.next_below(10) == 0 ? "zzabsent" : "w" + std::to_string(rng.next_below(45));
    }
    return query;
}

}  // namespace

TEST_CASE("tokenize lowercases and splits on non-alphanumerics") {
    CHECK(tokenize("Staffs oatcake!") == std::vector<std::string>{"staffs", "oatcake"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("BM25-k1") == std::vector<std::string>{"bm25", "k1"});
    CHECK(tokenize("  \t\n ").empty());
    CHECK(tokenize("a,b;c") == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("bm25 profiles carry the documented parameters") {
    CHECK(bm25_profile("procis").k1 == 0.9);
    CHECK(bm25_profile("procis").b == 0.4);
    CHECK(bm25_profile("webdisc-cc").k1 == 8.0);
    CHECK(bm25_profile("webdisc-cc").b == 0.99);
    CHECK(bm25_profile("webdisc-ia").k1 == 7.0);
    CHECK(bm25_profile("webdisc-ia").b == 0.99);
    CHECK_THROWS_AS(bm25_profile("nope"), ValidationError);
    CHECK_THROWS_AS(validate_params({-1.0, 0.4}), ValidationError);
    CHECK_THROWS_AS(validate_params({0.9, 1.5}), ValidationError);
}

TEST_CASE("build_index counts postings and lengths") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    CHECK(index.doc_count() == 2);
    CHECK(index.avg_doc_length() == doctest::Approx(2.5));
    CHECK(index.df("a") == 1);
    CHECK(index.df("b") == 2);
    CHECK(index.df("c") == 1);
    CHECK(index.df("zzz") == 0);
    CHECK(index.postings().at("a") == std::vector<Posting>{{0, 2}});
    CHECK(index.postings().at("b") == std::vector<Posting>{{0, 1}, {1, 1}});

    DocumentCorpus empty;
    CHECK_THROWS_AS(InvertedIndex::build(empty), ValidationError);

    DocumentCorpus punctuation;
    punctuation.add({"d1", "!!!"});
    CHECK_THROWS_WITH_AS(InvertedIndex::build(punctuation),
                         doctest::Contains("zero tokens"), ValidationError);
}

TEST_CASE("bm25_score matches the hand-derived value") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params params = bm25_profile("procis");
    const std::vector<std::string> query{"a"};

    // ln 2 * (2*1.9)/(2 + 0.9*(1 - 0.4 + 0.4*3/2.5)), confirmed by the
    // independent oracle below.
    const double expected = 0.8862581716446137;
    CHECK(index.bm25_score(params, query, "d1") == doctest::Approx(expected).epsilon(1e-9));

    oracle::Corpus reference;
    reference.docs = {{"d1", "a b a"}, {"d2", "b c"}};
    CHECK(oracle::bm25(reference, 0.9, 0.4, {"a"}, 0) ==
          doctest::Approx(expected).epsilon(1e-12));

    CHECK_THROWS_AS(index.bm25_score(params, query, "nope"), ValidationError);
}

TEST_CASE("absent query terms contribute nothing") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params params = bm25_profile("procis");
    CHECK(index.bm25_score(params, std::vector<std::string>{"zzz"}, "d1") == 0.0);
    CHECK(index.bm25_score(params, std::vector<std::string>{"zzz", "qqq"}, "d2") == 0.0);
    CHECK(index.search(params, "zzz qqq", 5).entries.empty());
}

TEST_CASE("duplicate query terms contribute per occurrence") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params params = bm25_profile("procis");
    const double once = index.bm25_score(params, std::vector<std::string>{"a"}, "d1");
    const double twice = index.bm25_score(params, std::vector<std::string>{"a", "a"}, "d1");
    CHECK(twice == doctest::Approx(2.0 * once));
}

TEST_CASE("idf is positive and non-increasing in df") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    CHECK(index.idf("a") > 0.0);
    CHECK(index.idf("b") > 0.0);
    CHECK(index.idf("zzz") > 0.0);  // df = 0
    CHECK(index.idf("a") > index.idf("b"));
    CHECK(index.idf("zzz") > index.idf("a"));
}

TEST_CASE("b = 0 makes scores independent of document length") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params flat{0.9, 0.0};
    const std::vector<std::string> query{"a"};
    const double base = index.bm25_score(flat, query, "d1");

    // Same postings, doc_lengths mutated in a copy.
    auto lengths = index.doc_lengths();
    lengths[0] *= 10;
    lengths[1] *= 7;
    const auto mutated = InvertedIndex::from_parts(index.doc_ids(), lengths,
                                                   index.postings(),
                                                   index.corpus_checksum());
    CHECK(mutated.bm25_score(flat, query, "d1") == base);

    // And via a corpus variant that pads d1 with non-query terms.
    DocumentCorpus padded;
    padded.add({"d1", "a b a pad pad pad pad"});
    padded.add({"d2", "b c"});
    const auto padded_index = InvertedIndex::build(padded);
    CHECK(padded_index.bm25_score(flat, query, "d1") == base);
}

TEST_CASE("search ranks by score with doc_id tie-break") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params params = bm25_profile("procis");

    const auto run = index.search(params, "b c", 5, "q1");
    REQUIRE(run.entries.size() == 2);
    CHECK(run.entries[0].doc_id == "d2");  // matches both terms
    CHECK(run.entries[1].doc_id == "d1");
    CHECK(run.entries[0].score > run.entries[1].score);
    CHECK(run.qid == "q1");

    CHECK(index.search(params, "", 5).entries.empty());
    CHECK(index.search(params, "b", 1).entries.size() == 1);
    CHECK_THROWS_AS(index.search(params, "b", 0), ValidationError);
}

TEST_CASE("search equals exhaustive oracle on random corpora") {
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 8; ++trial) {
        const auto reference = random_corpus(rng, 60);
        DocumentCorpus corpus;
        for (const auto& [id, text] : reference.docs) corpus.add({id, text});
        const auto index = InvertedIndex::build(corpus);
        const Bm25Params params{0.5 + rng.next_double() * 2.0, rng.next_double()};

        for (int q = 0; q < 10; ++q) {
            const std::string query = random_query(rng);
            const std::size_t k = 1 + rng.next_below(12);
            const auto got = index.search(params, query, static_cast<int>(k));
            const auto want = oracle::search(reference, params.k1, params.b, query, k);
            REQUIRE(got.entries.size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i) {
                CHECK(got.entries[i].doc_id == want[i].first);
                CHECK(got.entries[i].score ==
                      doctest::Approx(want[i].second).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("index save/load round-trip verifies checksums and is byte-stable") {
    ScratchDir dir("lexindex");
    const auto corpus = two_doc_corpus();
    const auto index = InvertedIndex::build(corpus);

    const auto path_a = dir.file("a.idx");
    const auto path_b = dir.file("b.idx");
    index.save(path_a);
    InvertedIndex::build(corpus).save(path_b);
    CHECK(testsupport::slurp(path_a) == testsupport::slurp(path_b));

    const auto loaded = InvertedIndex::load(path_a);
    CHECK(loaded.doc_count() == index.doc_count());
    CHECK(loaded.avg_doc_length() == index.avg_doc_length());
    CHECK(loaded.corpus_checksum() == corpus.checksum());
    CHECK(loaded.postings() == index.postings());

    const Bm25Params params = bm25_profile("procis");
    CHECK(loaded.bm25_score(params, std::vector<std::string>{"a"}, "d1") ==
          index.bm25_score(params, std::vector<std::string>{"a"}, "d1"));

    // Corrupt one byte: the payload checksum must catch it.
    auto bytes = testsupport::slurp(path_a);
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
    {
        std::ofstream out(path_a, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    }
    CHECK_THROWS_AS(InvertedIndex::load(path_a), ValidationError);
}

TEST_CASE("score_text agrees with bm25_score for indexed documents") {
    const auto index = InvertedIndex::build(two_doc_corpus());
    const Bm25Params params = bm25_profile("procis");
    const std::vector<std::string> query{"a", "b"};
    CHECK(index.score_text(params, query, "a b a") ==
          index.bm25_score(params, query, "d1"));
    CHECK(index.score_text(params, query, "") == 0.0);
}
