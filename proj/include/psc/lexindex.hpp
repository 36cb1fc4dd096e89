#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "psc/corpus.hpp"

namespace psc {

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

void validate_params(const Bm25Params& params);

// Named parameter profiles: "procis" (0.9/0.4), "webdisc-cc" (8/0.99),
// "webdisc-ia" (7/0.99).
Bm25Params bm25_profile(std::string_view name);

// Lowercased ASCII-alphanumeric runs; every other byte is a separator.
// No stemming, no stopword removal.
std::vector<std::string> tokenize(std::string_view text);

struct Posting {
    uint32_t doc = 0;  // internal id, corpus order
    uint32_t tf = 0;

    bool operator==(const Posting&) const = default;
};

struct RankedEntry {
    std::string doc_id;
    double score = 0.0;

    bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
    std::string qid;
    std::vector<RankedEntry> entries;  // score non-increasing, doc_ids distinct
    int cutoff = 0;

    bool operator==(const RankedList&) const = default;
};

class InvertedIndex {
public:
    // Errors on an empty corpus and on any document that reduces to zero
    // tokens.
    static InvertedIndex build(const DocumentCorpus& corpus);

    // Raw-parts constructor; load() uses it and tests can rebuild
    // variants with altered statistics. avg_doc_length is recomputed as
    // the mean of doc_lengths.
    static InvertedIndex from_parts(std::vector<std::string> doc_ids,
                                    std::vector<uint32_t> doc_lengths,
                                    std::map<std::string, std::vector<Posting>> postings,
                                    uint64_t corpus_checksum);

    std::size_t doc_count() const { return doc_ids_.size(); }
    double avg_doc_length() const { return avg_doc_length_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const std::vector<uint32_t>& doc_lengths() const { return doc_lengths_; }
    const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }
    bool contains(const std::string& doc_id) const { return internal_.count(doc_id) > 0; }
    uint64_t corpus_checksum() const { return corpus_checksum_; }

    uint32_t df(std::string_view term) const;
    // ln(1 + (N - df + 0.5) / (df + 0.5)); positive for every df <= N.
    double idf(std::string_view term) const;

    // Okapi BM25 of the query-term list against one indexed document.
    // Duplicate query terms contribute once per occurrence.
    double bm25_score(const Bm25Params& params,
                      std::span<const std::string> query_terms,
                      const std::string& doc_id) const;

    // Scores free text as a one-document collection sharing this index's
    // IDF statistics and average document length.
    double score_text(const Bm25Params& params,
                      std::span<const std::string> query_terms,
                      std::string_view text) const;

    // Top-k over the union of the query terms' postings; ties broken by
    // ascending doc_id; zero-scoring documents excluded. An empty query
    // yields an empty list.
    RankedList search(const Bm25Params& params, const std::string& query, int k,
                      std::string qid = {}) const;

    // Single-file binary format with magic header, version, corpus
    // checksum, and a trailing payload checksum verified on load.
    void save(const std::string& path) const;
    static InvertedIndex load(const std::string& path);

private:
    InvertedIndex() = default;

    double term_doc_score(const Bm25Params& params, double idf_value, uint32_t tf,
                          uint32_t doc_length) const;

    std::map<std::string, std::vector<Posting>> postings_;
    std::vector<std::string> doc_ids_;
    std::vector<uint32_t> doc_lengths_;
    std::unordered_map<std::string, uint32_t> internal_;
    double avg_doc_length_ = 0.0;
    uint64_t corpus_checksum_ = 0;
};

}  // namespace psc
