#include "psc/qfilter.hpp"

#include <algorithm>
#include <limits>

#include "psc/jsonl.hpp"
#include "psc/parallel.hpp"
#include "psc/rng.hpp"

namespace psc {

Bm25Scorer::Bm25Scorer(const InvertedIndex& index, Bm25Params params)
    : index_(index), params_(params) {
    validate_params(params_);
}

double Bm25Scorer::score(const std::string& query, const std::string& text) const {
    return index_.score_text(params_, tokenize(query), text);
}

RerankerClient::RerankerClient(std::string endpoint, RetryPolicy retry)
    : endpoint_(std::move(endpoint)), retry_(retry) {
    if (endpoint_.empty()) throw ValidationError("reranker endpoint is empty");
}

double RerankerClient::score(const std::string& query, const std::string& text) const {
    const Json reply =
        post_json(endpoint_, "/score", Json{{"query", query}, {"text", text}}, retry_);
    if (!reply.contains("score") || !reply["score"].is_number())
        throw ProtocolError("reranker reply lacks a numeric 'score'");
    return reply["score"].get<double>();
}

std::vector<double> RerankerClient::score_batch(std::span<const std::string> queries,
                                                std::span<const std::string> texts) const {
    if (queries.size() != texts.size())
        throw ValidationError("score_batch arrays differ in length");
    const Json reply = post_json(
        endpoint_, "/score_batch",
        Json{{"queries", std::vector<std::string>(queries.begin(), queries.end())},
             {"texts", std::vector<std::string>(texts.begin(), texts.end())}},
        retry_);
    if (!reply.contains("scores") || !reply["scores"].is_array() ||
        reply["scores"].size() != queries.size())
        throw ProtocolError("reranker batch reply has wrong 'scores' shape");
    return reply["scores"].get<std::vector<double>>();
}

FilterMode FilterMode::parse(std::string_view name, uint64_t seed) {
    if (name == "qf-dc") return {FilterModeKind::QfDc, 0};
    if (name == "qf-d") return {FilterModeKind::QfD, 0};
    if (name == "random") return {FilterModeKind::Random, seed};
    throw ValidationError("unknown filter mode '" + std::string(name) +
                          "' (expected qf-dc|qf-d|random)");
}

std::string_view FilterMode::name() const {
    switch (kind) {
        case FilterModeKind::QfDc: return "qf-dc";
        case FilterModeKind::QfD: return "qf-d";
        case FilterModeKind::Random: return "random";
    }
    return "qf-dc";
}

double score_qd(const RelevanceScorer& scorer, const std::string& query,
                const Document& doc) {
    return scorer.score(query, doc.text);
}

double score_qc(const RelevanceScorer& scorer, const std::string& query,
                const std::string& context) {
    return scorer.score(query, context);
}

namespace {

// Rescales values to [0,1]; a constant column maps to all zeros.
void minmax_rescale(std::vector<ScoredCandidate>& scored, double ScoredCandidate::*field) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const ScoredCandidate& c : scored) {
        lo = std::min(lo, c.*field);
        hi = std::max(hi, c.*field);
    }
    const double range = hi - lo;
    for (ScoredCandidate& c : scored) c.*field = range > 0.0 ? (c.*field - lo) / range : 0.0;
}

}  // namespace

FilterResult filter(const CandidateSet& cands, const Document& doc,
                    const std::string& context, const RelevanceScorer& scorer,
                    const FilterMode& mode, bool minmax_normalize, int threads) {
    if (cands.candidates.empty())
        throw ValidationError("empty candidate set for doc '" + cands.doc_id + "'");

    FilterResult result;
    result.conv_id = cands.conv_id;
    result.turn_index = cands.turn_index;
    result.doc_id = cands.doc_id;
    result.mode = std::string(mode.name());
    result.scored.resize(cands.candidates.size());

    parallel_for(cands.candidates.size(), threads, [&](std::size_t i) {
        const std::string& query = cands.candidates[i];
        ScoredCandidate& sc = result.scored[i];
        sc.query = query;
        sc.s_qd = score_qd(scorer, query, doc);
        sc.s_qc = score_qc(scorer, query, context);
    });

    if (minmax_normalize) {
        minmax_rescale(result.scored, &ScoredCandidate::s_qd);
        minmax_rescale(result.scored, &ScoredCandidate::s_qc);
    }

    switch (mode.kind) {
        case FilterModeKind::QfDc:
            for (ScoredCandidate& sc : result.scored) sc.s_agg = sc.s_qd + sc.s_qc;
            break;
        case FilterModeKind::QfD:
            for (ScoredCandidate& sc : result.scored) sc.s_agg = sc.s_qd;
            break;
        case FilterModeKind::Random:
            for (ScoredCandidate& sc : result.scored) sc.s_agg = 0.0;
            break;
    }

    if (mode.kind == FilterModeKind::Random) {
        SplitMix64 rng(mix_seed({mode.seed, fnv1a64(cands.conv_id),
                                 static_cast<uint64_t>(cands.turn_index),
                                 fnv1a64(cands.doc_id)}));
        result.selected_index =
            static_cast<int>(rng.next_below(result.scored.size()));
    } else {
        std::size_t best = 0;
        for (std::size_t i = 1; i < result.scored.size(); ++i)
            if (result.scored[i].s_agg > result.scored[best].s_agg) best = i;
        result.selected_index = static_cast<int>(best);
    }
    result.selected_query =
        result.scored[static_cast<std::size_t>(result.selected_index)].query;
    return result;
}

std::string merge_turn_targets(std::span<const FilterResult> results) {
    if (results.empty()) throw ValidationError("no filter results to merge");
    for (const FilterResult& r : results)
        if (r.conv_id != results.front().conv_id ||
            r.turn_index != results.front().turn_index)
            throw ValidationError("merge_turn_targets given results from mixed turns");

    std::vector<const FilterResult*> sorted;
    sorted.reserve(results.size());
    for (const FilterResult& r : results) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const FilterResult* a, const FilterResult* b) {
        return a->doc_id < b->doc_id;
    });

    std::string merged;
    for (const FilterResult* r : sorted) {
        if (!merged.empty()) merged += "; ";
        merged += r->selected_query;
    }
    return merged;
}

void write_filter_results(std::span<const FilterResult> results, const std::string& path) {
    auto out = open_output(path);
    for (const FilterResult& r : results) {
        Json scored = Json::array();
        for (const ScoredCandidate& sc : r.scored)
            scored.push_back({{"query", sc.query},
                              {"s_qd", sc.s_qd},
                              {"s_qc", sc.s_qc},
                              {"s_agg", sc.s_agg}});
        out << Json{{"conv_id", r.conv_id},
                    {"turn", r.turn_index},
                    {"doc_id", r.doc_id},
                    {"mode", r.mode},
                    {"selected_index", r.selected_index},
                    {"selected_query", r.selected_query},
                    {"candidates", std::move(scored)}}
                   .dump()
            << '\n';
    }
}

std::vector<FilterResult> load_filter_results(const std::string& path) {
    std::vector<FilterResult> results;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        FilterResult r;
        r.conv_id = field_as<std::string>(record, "conv_id", path, lineno);
        r.turn_index = field_as<int>(record, "turn", path, lineno);
        r.doc_id = field_as<std::string>(record, "doc_id", path, lineno);
        r.mode = field_as<std::string>(record, "mode", path, lineno);
        r.selected_index = field_as<int>(record, "selected_index", path, lineno);
        r.selected_query = field_as<std::string>(record, "selected_query", path, lineno);
        for (const Json& c : field_as<Json>(record, "candidates", path, lineno)) {
            ScoredCandidate sc;
            sc.query = field_as<std::string>(c, "query", path, lineno);
            sc.s_qd = field_as<double>(c, "s_qd", path, lineno);
            sc.s_qc = field_as<double>(c, "s_qc", path, lineno);
            sc.s_agg = field_as<double>(c, "s_agg", path, lineno);
            r.scored.push_back(std::move(sc));
        }
        if (r.scored.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": filter result without candidates");
        if (r.selected_index < 0 ||
            r.selected_index >= static_cast<int>(r.scored.size()))
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": selected_index out of range");
        results.push_back(std::move(r));
    });
    return results;
}

}  // namespace psc
