#pragma once

#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psc/lexindex.hpp"
#include "psc/pipeline.hpp"

namespace psc {

// qid -> doc_id -> grade (>= 1).
using QrelsForQid = std::map<std::string, int>;
using Qrels = std::map<std::string, QrelsForQid>;

// Four-column "<qid> 0 <doc_id> <grade>" lines. Grade 0 lines (judged
// non-relevant) are skipped; negative grades are an error.
Qrels load_qrels(const std::string& path);
Qrels qrels_from_conversations(std::span<const Conversation> convs);

// 1.0 if the rank-1 doc is relevant, else 0.0; empty list scores 0.
double precision_at_1(const RankedList& run, const QrelsForQid& judged);

// 1/r for the first relevant rank r <= cutoff, else 0.0.
double reciprocal_rank(const RankedList& run, const QrelsForQid& judged, int cutoff);

struct NpdcgResult {
    double dcg_sum = 0.0;
    double idcg_sum = 0.0;
    bool defined() const { return idcg_sum > 0.0; }
    double value() const { return defined() ? dcg_sum / idcg_sum : 0.0; }
};

// Per-conversation DCG aggregation with cross-turn novelty: a document
// earns gain grade/log2(rank+1) the first time it appears relevant at a
// turn and never again within the conversation. The ideal system follows
// the same crediting rule, placing each turn's not-yet-credited relevant
// docs in (grade desc, doc_id asc) order. turn_runs must be in ascending
// turn order; a missing list stands for "nothing retrieved".
NpdcgResult npdcg_conversation(
    std::span<const std::pair<int, const RankedList*>> turn_runs,
    const std::map<int, QrelsForQid>& conv_qrels, int k);

struct MetricSpec {
    enum class Kind { P1, Mrr, Npdcg };
    Kind kind = Kind::P1;
    int cutoff = 0;  // 0 for P1

    std::string name() const;
};

// Parses "p1,mrr10,npdcg5"-style lists.
std::vector<MetricSpec> parse_metrics(std::string_view csv);

struct MetricValue {
    double aggregate = 0.0;                   // arithmetic mean of breakdown
    std::map<std::string, double> breakdown;  // per qid, per conversation for npDCG
    std::size_t evaluated = 0;
    std::size_t excluded = 0;  // npDCG conversations with zero ideal gain
};

struct MetricReport {
    std::vector<std::pair<MetricSpec, MetricValue>> metrics;
    std::vector<std::string> unjudged_run_qids;    // present in run, absent from qrels
    std::vector<std::string> judged_missing_qids;  // judged but absent from run; score 0
};

// P@1/MRR macro-average over every judged qid (missing runs contribute
// 0); npDCG averages per conversation. Empty qrels is an error.
MetricReport evaluate(const RunSet& runs, const Qrels& qrels,
                      std::span<const MetricSpec> metrics);

// format: "human" (aligned table) or "jsonl" (one record per row).
void write_report(const MetricReport& report, std::ostream& out, std::string_view format);
void write_report_file(const MetricReport& report, const std::string& path,
                       std::string_view format);

}  // namespace psc
