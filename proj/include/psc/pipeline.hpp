#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "psc/corpus.hpp"
#include "psc/http_service.hpp"
#include "psc/lexindex.hpp"
#include "psc/traindata.hpp"

namespace psc {

struct QuerySource {
    enum class Kind {
        RawContext,         // the serialized context is the query
        MappingFile,        // qid -> query (e.g. an external mapper's output)
        GenerationService,  // "POST /conv2query" {prompt} -> {query}
    };

    Kind kind = Kind::RawContext;
    std::map<std::string, std::string> mapping;
    std::string endpoint;
    RetryPolicy retry;

    static QuerySource raw_context();
    static QuerySource mapping_file(std::map<std::string, std::string> mapping);
    static QuerySource generation_service(std::string endpoint, RetryPolicy retry = {});
};

struct RunSet {
    std::string tag = "psc";
    std::map<std::string, RankedList> lists;  // qid -> ranked docs

    bool operator==(const RunSet&) const = default;
};

// Sends the rendered prompt and returns the first non-empty line of the
// reply's query field, whitespace-trimmed.
std::string query_via_service(const std::string& endpoint, TaskSetting setting,
                              const PromptParts& parts, const RetryPolicy& retry = {});

// One RankedList per judged turn. A MappingFile must cover every judged
// qid or the run aborts listing the missing ones. RawContext under
// Anticipation at t=1 issues the empty query and yields an empty list.
RunSet run_retrieval(std::span<const Conversation> convs, const InvertedIndex& index,
                     const Bm25Params& params, TaskSetting setting,
                     const QuerySource& source, int k, int threads = 1,
                     const std::string& tag = "psc");

// Six-column run format "<qid> Q0 <doc_id> <rank> <score> <tag>", qids
// sorted, ranks contiguous from 1, scores with 6 decimals.
void write_run(const RunSet& runs, const std::string& path);
RunSet read_run(const std::string& path);

// Line-delimited {"qid":..., "query":...} records.
std::map<std::string, std::string> load_mapping(const std::string& path);
void write_mapping(const std::map<std::string, std::string>& mapping,
                   const std::string& path);

}  // namespace psc
