#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "psc/corpus.hpp"
#include "psc/http_service.hpp"
#include "psc/lexindex.hpp"

namespace psc {

enum class GenBackend { Builtin, ExternalService };

struct GenConfig {
    int n = 100;              // candidates per document
    int top_k = 10;           // sampling pool size
    uint64_t seed = 0;
    int max_query_terms = 8;  // builtin candidate length cap
    GenBackend backend = GenBackend::Builtin;
    std::string endpoint;     // required for ExternalService
    RetryPolicy retry;
    int max_in_flight = 4;    // external request concurrency cap
};

void validate_config(const GenConfig& cfg);

struct CandidateSet {
    std::string conv_id;
    int turn_index = 0;
    std::string doc_id;
    std::string provenance;  // "builtin" or "external"
    std::vector<std::string> candidates;

    bool operator==(const CandidateSet&) const = default;
};

// Samples cfg.n ad-hoc query candidates from the document's own terms.
// Terms are ranked by within-document tf*idf; each candidate repeatedly
// draws without replacement from the current top-(top_k) remaining terms
// with probability proportional to tf*idf, until min(max_query_terms,
// distinct terms) are taken. Candidate i depends only on
// (doc_id, cfg.seed, i), so growing n extends the sequence in place.
CandidateSet generate_builtin(const Document& doc, const InvertedIndex& index,
                              const GenConfig& cfg);

// One "POST /generate" {input, n, top_k} call; the reply must carry
// exactly n non-blank queries.
CandidateSet generate_external(const Document& doc, const GenConfig& cfg);

// One CandidateSet per (judged turn, positive document) pair, ordered by
// (conv_id, turn_index, doc_id) regardless of completion order.
std::vector<CandidateSet> generate_for_judged_turns(std::span<const Conversation> convs,
                                                    const DocumentCorpus& corpus,
                                                    const InvertedIndex& index,
                                                    const GenConfig& cfg,
                                                    int threads = 1);

void write_candidates(std::span<const CandidateSet> sets, const std::string& path);
std::vector<CandidateSet> load_candidates(const std::string& path);

}  // namespace psc
