#include "psc/qgen.hpp"

#include <algorithm>
#include <map>

#include "psc/jsonl.hpp"
#include "psc/parallel.hpp"
#include "psc/rng.hpp"

namespace psc {

void validate_config(const GenConfig& cfg) {
    if (cfg.n < 1) throw ValidationError("n must be >= 1");
    if (cfg.top_k < 1) throw ValidationError("top_k must be >= 1");
    if (cfg.max_query_terms < 1) throw ValidationError("max_query_terms must be >= 1");
    if (cfg.backend == GenBackend::ExternalService && cfg.endpoint.empty())
        throw ValidationError("external backend requires an endpoint");
}

CandidateSet generate_builtin(const Document& doc, const InvertedIndex& index,
                              const GenConfig& cfg) {
    validate_config(cfg);
    const auto tokens = tokenize(doc.text);
    if (tokens.empty())
        throw ValidationError("document '" + doc.doc_id + "' has no terms to sample");

    // std::map gives ascending term order, the tie-break for equal weights.
    std::map<std::string, uint32_t> tf;
    for (const std::string& t : tokens) ++tf[t];

    struct WeightedTerm {
        std::string term;
        double weight;
    };
    std::vector<WeightedTerm> ranked;
    ranked.reserve(tf.size());
    for (const auto& [term, freq] : tf)
        ranked.push_back({term, static_cast<double>(freq) * index.idf(term)});
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const WeightedTerm& a, const WeightedTerm& b) {
                         return a.weight > b.weight;
                     });

    const std::size_t target =
        std::min<std::size_t>(static_cast<std::size_t>(cfg.max_query_terms), ranked.size());
    const uint64_t doc_hash = fnv1a64(doc.doc_id);

    CandidateSet set;
    set.doc_id = doc.doc_id;
    set.provenance = "builtin";
    set.candidates.reserve(static_cast<std::size_t>(cfg.n));

    std::vector<WeightedTerm> remaining;
    std::vector<double> weights;
    for (int ordinal = 0; ordinal < cfg.n; ++ordinal) {
        SplitMix64 rng(mix_seed({cfg.seed, doc_hash, static_cast<uint64_t>(ordinal)}));
        remaining = ranked;
        std::string candidate;
        for (std::size_t drawn = 0; drawn < target; ++drawn) {
            const std::size_t pool =
                std::min<std::size_t>(static_cast<std::size_t>(cfg.top_k), remaining.size());
            weights.clear();
            for (std::size_t i = 0; i < pool; ++i) weights.push_back(remaining[i].weight);
            const std::size_t pick = rng.next_weighted(weights);
            if (!candidate.empty()) candidate += ' ';
            candidate += remaining[pick].term;
            remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
        }
        set.candidates.push_back(std::move(candidate));
    }
    return set;
}

CandidateSet generate_external(const Document& doc, const GenConfig& cfg) {
    validate_config(cfg);
    if (cfg.backend != GenBackend::ExternalService)
        throw ValidationError("generate_external requires the external backend");

    const Json reply = post_json(cfg.endpoint, "/generate",
                                 Json{{"input", doc.text}, {"n", cfg.n}, {"top_k", cfg.top_k}},
                                 cfg.retry);
    if (!reply.contains("queries") || !reply["queries"].is_array())
        throw ProtocolError("generation service reply lacks a 'queries' array");

    CandidateSet set;
    set.doc_id = doc.doc_id;
    set.provenance = "external";
    for (const Json& q : reply["queries"]) {
        if (!q.is_string() || trim(q.get<std::string>()).empty())
            throw ProtocolError("generation service returned a blank query for doc '" +
                                doc.doc_id + "'");
        set.candidates.push_back(q.get<std::string>());
    }
    if (set.candidates.size() != static_cast<std::size_t>(cfg.n))
        throw ProtocolError("generation service returned " +
                            std::to_string(set.candidates.size()) + " queries, expected " +
                            std::to_string(cfg.n) + " for doc '" + doc.doc_id + "'");
    return set;
}

std::vector<CandidateSet> generate_for_judged_turns(std::span<const Conversation> convs,
                                                    const DocumentCorpus& corpus,
                                                    const InvertedIndex& index,
                                                    const GenConfig& cfg,
                                                    int threads) {
    validate_config(cfg);
    check_judgments_resolvable(convs, corpus);

    struct WorkItem {
        std::string conv_id;
        int turn;
        std::string doc_id;
    };
    std::vector<WorkItem> items;
    for (const Conversation& conv : convs)
        for (const auto& [turn, docs] : conv.judgments)
            for (const Judgment& j : docs)
                items.push_back({conv.conv_id, turn, j.doc_id});
    std::sort(items.begin(), items.end(), [](const WorkItem& a, const WorkItem& b) {
        if (a.conv_id != b.conv_id) return a.conv_id < b.conv_id;
        if (a.turn != b.turn) return a.turn < b.turn;
        return a.doc_id < b.doc_id;
    });

    int workers = threads;
    if (cfg.backend == GenBackend::ExternalService)
        workers = std::min(workers, cfg.max_in_flight);

    std::vector<CandidateSet> sets(items.size());
    parallel_for(items.size(), workers, [&](std::size_t i) {
        const WorkItem& item = items[i];
        const Document& doc = corpus.at(item.doc_id);
        CandidateSet set = cfg.backend == GenBackend::Builtin
                               ? generate_builtin(doc, index, cfg)
                               : generate_external(doc, cfg);
        set.conv_id = item.conv_id;
        set.turn_index = item.turn;
        sets[i] = std::move(set);
    });
    return sets;
}

void write_candidates(std::span<const CandidateSet> sets, const std::string& path) {
    auto out = open_output(path);
    for (const CandidateSet& set : sets)
        out << Json{{"conv_id", set.conv_id},
                    {"turn", set.turn_index},
                    {"doc_id", set.doc_id},
                    {"provenance", set.provenance},
                    {"candidates", set.candidates}}
                   .dump()
            << '\n';
}

std::vector<CandidateSet> load_candidates(const std::string& path) {
    std::vector<CandidateSet> sets;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        CandidateSet set;
        set.conv_id = field_as<std::string>(record, "conv_id", path, lineno);
        set.turn_index = field_as<int>(record, "turn", path, lineno);
        set.doc_id = field_as<std::string>(record, "doc_id", path, lineno);
        set.provenance = field_as<std::string>(record, "provenance", path, lineno);
        set.candidates = field_as<std::vector<std::string>>(record, "candidates", path, lineno);
        if (set.candidates.empty())
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": empty candidate list");
        for (const std::string& c : set.candidates)
            if (trim(c).empty())
                throw ValidationError(path + ":" + std::to_string(lineno) +
                                      ": blank candidate");
        sets.push_back(std::move(set));
    });
    return sets;
}

}  // namespace psc
