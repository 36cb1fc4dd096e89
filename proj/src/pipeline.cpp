#include "psc/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "psc/jsonl.hpp"
#include "psc/parallel.hpp"

namespace psc {

QuerySource QuerySource::raw_context() { return {}; }

QuerySource QuerySource::mapping_file(std::map<std::string, std::string> mapping) {
    QuerySource s;
    s.kind = Kind::MappingFile;
    s.mapping = std::move(mapping);
    return s;
}

QuerySource QuerySource::generation_service(std::string endpoint, RetryPolicy retry) {
    QuerySource s;
    s.kind = Kind::GenerationService;
    s.endpoint = std::move(endpoint);
    s.retry = retry;
    return s;
}

std::string query_via_service(const std::string& endpoint, TaskSetting setting,
                              const PromptParts& parts, const RetryPolicy& retry) {
    const Json reply = post_json(endpoint, "/conv2query",
                                 Json{{"prompt", render_prompt(parts, setting)}}, retry);
    if (!reply.contains("query") || !reply["query"].is_string())
        throw ProtocolError("query service reply lacks a string 'query'");

    // First non-empty line, trimmed.
    std::istringstream lines(reply["query"].get<std::string>());
    std::string line;
    while (std::getline(lines, line)) {
        const std::string cleaned = trim(line);
        if (!cleaned.empty()) return cleaned;
    }
    throw ProtocolError("query service returned an empty query");
}

RunSet run_retrieval(std::span<const Conversation> convs, const InvertedIndex& index,
                     const Bm25Params& params, TaskSetting setting,
                     const QuerySource& source, int k, int threads,
                     const std::string& tag) {
    validate_params(params);
    if (k < 1) throw ValidationError("k must be >= 1");

    struct Turn {
        const Conversation* conv;
        int t;
        std::string qid;
    };
    std::vector<Turn> turns;
    for (const Conversation& conv : convs)
        for (int t : judged_turns(conv))
            turns.push_back({&conv, t, make_qid(conv.conv_id, t)});

    if (source.kind == QuerySource::Kind::MappingFile) {
        std::vector<std::string> missing;
        for (const Turn& turn : turns)
            if (!source.mapping.count(turn.qid)) missing.push_back(turn.qid);
        if (!missing.empty()) {
            std::string list;
            for (const std::string& qid : missing) {
                if (!list.empty()) list += ", ";
                list += qid;
            }
            throw ValidationError("mapping file misses " + std::to_string(missing.size()) +
                                  " judged qid(s): " + list);
        }
    }
    if (source.kind == QuerySource::Kind::GenerationService && source.endpoint.empty())
        throw ValidationError("generation-service source requires an endpoint");

    std::vector<RankedList> lists(turns.size());
    parallel_for(turns.size(), threads, [&](std::size_t i) {
        const Turn& turn = turns[i];
        std::string query;
        switch (source.kind) {
            case QuerySource::Kind::RawContext:
                query = assemble_context(*turn.conv, turn.t, setting);
                break;
            case QuerySource::Kind::MappingFile:
                query = source.mapping.at(turn.qid);
                break;
            case QuerySource::Kind::GenerationService:
                query = query_via_service(source.endpoint, setting,
                                          prompt_parts(*turn.conv, turn.t), source.retry);
                break;
        }
        lists[i] = index.search(params, query, k, turn.qid);
    });

    RunSet runs;
    runs.tag = tag;
    for (std::size_t i = 0; i < turns.size(); ++i)
        runs.lists.emplace(turns[i].qid, std::move(lists[i]));
    return runs;
}

void write_run(const RunSet& runs, const std::string& path) {
    auto out = open_output(path);
    char score_buf[64];
    for (const auto& [qid, list] : runs.lists) {
        int rank = 1;
        for (const RankedEntry& e : list.entries) {
            std::snprintf(score_buf, sizeof score_buf, "%.6f", e.score);
            out << qid << " Q0 " << e.doc_id << ' ' << rank << ' ' << score_buf << ' '
                << runs.tag << '\n';
            ++rank;
        }
    }
    if (!out) throw IoError("write failed for " + path);
}

RunSet read_run(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    RunSet runs;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string qid, q0, doc_id, tag;
        int rank = 0;
        double score = 0.0;
        if (!(fields >> qid >> q0 >> doc_id >> rank >> score >> tag) || q0 != "Q0")
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": malformed run line");
        auto [it, inserted] = runs.lists.try_emplace(qid);
        if (inserted) it->second.qid = qid;
        if (rank != static_cast<int>(it->second.entries.size()) + 1)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": non-contiguous rank for qid '" + qid + "'");
        it->second.entries.push_back({doc_id, score});
        runs.tag = tag;
    }
    for (auto& [qid, list] : runs.lists)
        list.cutoff = static_cast<int>(list.entries.size());
    return runs;
}

std::map<std::string, std::string> load_mapping(const std::string& path) {
    std::map<std::string, std::string> mapping;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        const std::string qid = field_as<std::string>(record, "qid", path, lineno);
        if (mapping.count(qid))
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": duplicate qid '" + qid + "'");
        mapping.emplace(qid, field_as<std::string>(record, "query", path, lineno));
    });
    return mapping;
}

void write_mapping(const std::map<std::string, std::string>& mapping,
                   const std::string& path) {
    auto out = open_output(path);
    for (const auto& [qid, query] : mapping)
        out << Json{{"qid", qid}, {"query", query}}.dump() << '\n';
}

}  // namespace psc
