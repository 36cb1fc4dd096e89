#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psc/corpus.hpp"
#include "psc/http_service.hpp"
#include "psc/lexindex.hpp"
#include "psc/qgen.hpp"

namespace psc {

// Query-text relevance interface. Higher means more relevant on the
// backend's own scale; one instance must be internally consistent.
class RelevanceScorer {
public:
    virtual ~RelevanceScorer() = default;
    virtual double score(const std::string& query, const std::string& text) const = 0;
};

// Scores any text as a one-document collection sharing the main index's
// global IDF statistics, so query-document and query-context scores live
// on one scale and summation stays meaningful.
class Bm25Scorer final : public RelevanceScorer {
public:
    Bm25Scorer(const InvertedIndex& index, Bm25Params params);
    double score(const std::string& query, const std::string& text) const override;

private:
    const InvertedIndex& index_;
    Bm25Params params_;
};

// "POST /score" {query, text} -> {score}; batched variant with parallel
// arrays behind "POST /score_batch".
class RerankerClient final : public RelevanceScorer {
public:
    explicit RerankerClient(std::string endpoint, RetryPolicy retry = {});
    double score(const std::string& query, const std::string& text) const override;
    std::vector<double> score_batch(std::span<const std::string> queries,
                                    std::span<const std::string> texts) const;

private:
    std::string endpoint_;
    RetryPolicy retry_;
};

enum class FilterModeKind { QfDc, QfD, Random };

struct FilterMode {
    FilterModeKind kind = FilterModeKind::QfDc;
    uint64_t seed = 0;  // Random mode only

    static FilterMode parse(std::string_view name, uint64_t seed = 0);
    std::string_view name() const;
};

struct ScoredCandidate {
    std::string query;
    double s_qd = 0.0;
    double s_qc = 0.0;
    double s_agg = 0.0;
};

struct FilterResult {
    std::string conv_id;
    int turn_index = 0;
    std::string doc_id;
    std::string mode;
    int selected_index = 0;  // 0-based argmax with smallest-index tie-break
    std::string selected_query;
    std::vector<ScoredCandidate> scored;
};

double score_qd(const RelevanceScorer& scorer, const std::string& query,
                const Document& doc);
double score_qc(const RelevanceScorer& scorer, const std::string& query,
                const std::string& context);

// QF-DC: argmax of s_qd + s_qc. QF-D: argmax of s_qd. Random: uniform
// index from a stream seeded by (seed, conv_id, turn_index, doc_id); all
// candidates are still scored for the persisted record but s_agg is 0.
// minmax_normalize rescales s_qd and s_qc to [0,1] over the candidate
// set before aggregation (off by default).
FilterResult filter(const CandidateSet& cands, const Document& doc,
                    const std::string& context, const RelevanceScorer& scorer,
                    const FilterMode& mode, bool minmax_normalize = false,
                    int threads = 1);

// Joins the selected queries of one turn with "; " in ascending doc_id
// order.
std::string merge_turn_targets(std::span<const FilterResult> results);

void write_filter_results(std::span<const FilterResult> results, const std::string& path);
std::vector<FilterResult> load_filter_results(const std::string& path);

}  // namespace psc
