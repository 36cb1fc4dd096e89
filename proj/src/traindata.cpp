#include "psc/traindata.hpp"

#include <algorithm>
#include <iostream>
#include <map>
#include <set>

#include "psc/jsonl.hpp"
#include "psc/rng.hpp"

namespace psc {

namespace {

constexpr std::string_view kContextualisationTemplate =
    "Instruction: Based on the following conversation history and the current user "
    "utterance, please generate a search query that retrieves documents relevant to "
    "the current user utterance.\n"
    "Conversational history: {history}\n"
    "Current user utterance: {current}\n"
    "Generated query:";

constexpr std::string_view kAnticipationTemplate =
    "Instruction: Based on the following conversation history, please generate a "
    "search query that retrieves documents relevant to the next expected "
    "utterance.\n"
    "Conversational history: {history}\n"
    "Generated query:";

std::string replace_slot(std::string text, std::string_view slot,
                         const std::string& value) {
    const auto pos = text.find(slot);
    if (pos != std::string::npos) text.replace(pos, slot.size(), value);
    return text;
}

}  // namespace

std::string_view prompt_template(TaskSetting setting) {
    return setting == TaskSetting::Contextualisation ? kContextualisationTemplate
                                                     : kAnticipationTemplate;
}

PromptParts prompt_parts(const Conversation& conv, int t) {
    PromptParts parts;
    parts.history = assemble_context(conv, t, TaskSetting::Anticipation);
    parts.current = render_utterance(conv.turns[static_cast<std::size_t>(t) - 1]);
    return parts;
}

std::string render_prompt(const PromptParts& parts, TaskSetting setting) {
    std::string rendered = std::string(prompt_template(setting));
    rendered = replace_slot(std::move(rendered), "{history}", parts.history);
    if (setting == TaskSetting::Contextualisation) {
        if (!parts.current)
            throw ValidationError("contextualisation prompt requires the current utterance");
        rendered = replace_slot(std::move(rendered), "{current}", *parts.current);
    }
    return rendered;
}

std::vector<TrainingPair> build_pairs(std::span<const Conversation> convs,
                                      std::span<const FilterResult> results,
                                      TaskSetting setting, BuildStats* stats) {
    std::map<std::string, std::map<int, std::vector<const FilterResult*>>> by_turn;
    std::set<std::string> known_convs;
    for (const Conversation& conv : convs) known_convs.insert(conv.conv_id);
    for (const FilterResult& r : results) {
        if (!known_convs.count(r.conv_id))
            throw ValidationError("filter result for unknown conversation '" + r.conv_id + "'");
        by_turn[r.conv_id][r.turn_index].push_back(&r);
    }

    BuildStats tally;
    std::vector<TrainingPair> pairs;

    std::vector<const Conversation*> ordered;
    for (const Conversation& conv : convs) ordered.push_back(&conv);
    std::sort(ordered.begin(), ordered.end(),
              [](const Conversation* a, const Conversation* b) {
                  return a->conv_id < b->conv_id;
              });

    for (const Conversation* conv : ordered) {
        ++tally.conversations;
        tally.total_turns += conv->turns.size();
        const auto conv_results = by_turn.find(conv->conv_id);
        const std::vector<int> judged = judged_turns(*conv);
        const std::set<int> judged_set(judged.begin(), judged.end());
        for (int t : judged) {
            std::vector<const FilterResult*> turn_results;
            if (conv_results != by_turn.end()) {
                auto it = conv_results->second.find(t);
                if (it != conv_results->second.end()) turn_results = it->second;
            }
            if (turn_results.empty())
                throw ValidationError("judged turn " + make_qid(conv->conv_id, t) +
                                      " has no filter result");

            std::vector<FilterResult> owned;
            owned.reserve(turn_results.size());
            for (const FilterResult* r : turn_results) owned.push_back(*r);

            TrainingPair pair;
            pair.qid = make_qid(conv->conv_id, t);
            pair.prompt = render_prompt(prompt_parts(*conv, t), setting);
            pair.target = merge_turn_targets(owned);
            if (pair.target.empty())
                throw ValidationError("empty target for " + pair.qid);
            pairs.push_back(std::move(pair));
            ++tally.judged_turns;
        }
        // Filter results for turns this conversation never judged signal
        // mismatched inputs.
        if (conv_results != by_turn.end())
            for (const auto& [turn, rs] : conv_results->second)
                if (!judged_set.count(turn))
                    throw ValidationError("filter result for unjudged turn " +
                                          make_qid(conv->conv_id, turn));
    }

    if (stats) *stats = tally;
    return pairs;
}

std::vector<std::string> mine_negatives(const InvertedIndex& index,
                                        const Bm25Params& params,
                                        const Conversation& conv, int t,
                                        std::span<const std::string> positives,
                                        int m, uint64_t seed, int pool_depth) {
    if (m < 1) throw ValidationError("m must be >= 1");
    if (pool_depth < 1) throw ValidationError("pool_depth must be >= 1");

    const std::string history = assemble_context(conv, t, TaskSetting::Anticipation);
    const std::string full = assemble_context(conv, t, TaskSetting::Contextualisation);

    std::set<std::string> pool;
    for (const std::string& query : {history, full}) {
        if (query.empty()) continue;
        for (const RankedEntry& e : index.search(params, query, pool_depth).entries)
            pool.insert(e.doc_id);
    }
    for (const std::string& p : positives) pool.erase(p);
    if (pool.empty())
        throw ValidationError("empty negative pool for " + make_qid(conv.conv_id, t));

    std::vector<std::string> candidates(pool.begin(), pool.end());
    if (candidates.size() <= static_cast<std::size_t>(m)) return candidates;

    // Partial Fisher-Yates over the doc_id-sorted pool.
    SplitMix64 rng(mix_seed({seed, fnv1a64(conv.conv_id), static_cast<uint64_t>(t)}));
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i) {
        const std::size_t j =
            i + static_cast<std::size_t>(rng.next_below(candidates.size() - i));
        std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(static_cast<std::size_t>(m));
    return candidates;
}

std::vector<RetrievalTriple> build_triples(std::span<const Conversation> convs,
                                           std::span<const FilterResult> results,
                                           const InvertedIndex& index,
                                           const Bm25Params& params,
                                           const TripleConfig& cfg) {
    std::map<std::string, std::map<int, std::vector<const FilterResult*>>> by_turn;
    for (const FilterResult& r : results) by_turn[r.conv_id][r.turn_index].push_back(&r);

    std::vector<const Conversation*> ordered;
    for (const Conversation& conv : convs) ordered.push_back(&conv);
    std::sort(ordered.begin(), ordered.end(),
              [](const Conversation* a, const Conversation* b) {
                  return a->conv_id < b->conv_id;
              });

    std::vector<RetrievalTriple> triples;
    for (const Conversation* conv : ordered) {
        for (int t : judged_turns(*conv)) {
            auto conv_it = by_turn.find(conv->conv_id);
            std::vector<FilterResult> owned;
            if (conv_it != by_turn.end()) {
                auto it = conv_it->second.find(t);
                if (it != conv_it->second.end())
                    for (const FilterResult* r : it->second) owned.push_back(*r);
            }
            if (owned.empty())
                throw ValidationError("judged turn " + make_qid(conv->conv_id, t) +
                                      " has no filter result");
            const std::string merged = merge_turn_targets(owned);

            std::vector<std::string> positives;
            for (const Judgment& j : conv->judgments.at(t)) positives.push_back(j.doc_id);
            std::sort(positives.begin(), positives.end());

            std::vector<std::string> negatives;
            try {
                negatives = mine_negatives(index, params, *conv, t, positives, cfg.m,
                                           cfg.seed, cfg.pool_depth);
            } catch (const ValidationError&) {
                if (cfg.skip_empty_pools) {
                    std::cerr << "psc: skipping " << make_qid(conv->conv_id, t)
                              << " (empty negative pool)\n";
                    continue;
                }
                throw;
            }

            for (const std::string& positive : positives)
                triples.push_back({merged, positive, negatives});
        }
    }
    return triples;
}

void export_pairs(std::span<const TrainingPair> pairs, const std::string& path) {
    auto out = open_output(path);
    for (const TrainingPair& p : pairs)
        out << Json{{"format", 1}, {"qid", p.qid}, {"prompt", p.prompt}, {"target", p.target}}
                   .dump()
            << '\n';
}

std::vector<TrainingPair> load_pairs(const std::string& path) {
    std::vector<TrainingPair> pairs;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        if (record.contains("format") && record["format"] != 1)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": unsupported format version");
        TrainingPair p;
        p.qid = field_as<std::string>(record, "qid", path, lineno);
        p.prompt = field_as<std::string>(record, "prompt", path, lineno);
        p.target = field_as<std::string>(record, "target", path, lineno);
        pairs.push_back(std::move(p));
    });
    return pairs;
}

void export_triples(std::span<const RetrievalTriple> triples, const std::string& path) {
    auto out = open_output(path);
    for (const RetrievalTriple& t : triples)
        out << Json{{"format", 1},
                    {"query", t.query},
                    {"positive", t.positive_doc_id},
                    {"negatives", t.negative_doc_ids}}
                   .dump()
            << '\n';
}

std::vector<RetrievalTriple> load_triples(const std::string& path) {
    std::vector<RetrievalTriple> triples;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        if (record.contains("format") && record["format"] != 1)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": unsupported format version");
        RetrievalTriple t;
        t.query = field_as<std::string>(record, "query", path, lineno);
        t.positive_doc_id = field_as<std::string>(record, "positive", path, lineno);
        t.negative_doc_ids =
            field_as<std::vector<std::string>>(record, "negatives", path, lineno);
        triples.push_back(std::move(t));
    });
    return triples;
}

}  // namespace psc
