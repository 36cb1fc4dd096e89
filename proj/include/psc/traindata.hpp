#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psc/corpus.hpp"
#include "psc/lexindex.hpp"
#include "psc/qfilter.hpp"

namespace psc {

// Instruction templates for the conversation-to-query mapper, one per
// task setting, with {history} and {current} slots.
std::string_view prompt_template(TaskSetting setting);

struct PromptParts {
    std::string history;                 // turns 1..t-1, serialized
    std::optional<std::string> current;  // turn t, serialized
};

// Splits a conversation at turn t into template slots.
PromptParts prompt_parts(const Conversation& conv, int t);

// Substitutes the slots; Contextualisation requires a current utterance.
std::string render_prompt(const PromptParts& parts, TaskSetting setting);

struct TrainingPair {
    std::string qid;     // "<conv_id>.<turn_index>"
    std::string prompt;
    std::string target;  // merged selected queries

    bool operator==(const TrainingPair&) const = default;
};

struct BuildStats {
    std::size_t conversations = 0;
    std::size_t total_turns = 0;   // T summed over conversations
    std::size_t judged_turns = 0;  // Z, equals the number of pairs
};

// One pair per judged turn; targets come from merge_turn_targets over the
// turn's filter results. Output is ordered by (conv_id, turn_index).
std::vector<TrainingPair> build_pairs(std::span<const Conversation> convs,
                                      std::span<const FilterResult> results,
                                      TaskSetting setting,
                                      BuildStats* stats = nullptr);

struct RetrievalTriple {
    std::string query;  // merged target for the turn
    std::string positive_doc_id;
    std::vector<std::string> negative_doc_ids;

    bool operator==(const RetrievalTriple&) const = default;
};

// Candidate pool = union of the top-pool_depth BM25 results for the
// history-only context and for history+current, minus the positives.
// Samples m without replacement, seeded by (seed, conv_id, t); a pool
// smaller than m is returned whole. An empty pool is an error.
std::vector<std::string> mine_negatives(const InvertedIndex& index,
                                        const Bm25Params& params,
                                        const Conversation& conv, int t,
                                        std::span<const std::string> positives,
                                        int m, uint64_t seed, int pool_depth = 200);

struct TripleConfig {
    int m = 7;
    int pool_depth = 200;
    uint64_t seed = 0;
    bool skip_empty_pools = false;  // default: fail, silent skips bias the set
};

// One triple per (judged turn, positive doc): the turn's merged query,
// that positive, and the turn's mined negatives.
std::vector<RetrievalTriple> build_triples(std::span<const Conversation> convs,
                                           std::span<const FilterResult> results,
                                           const InvertedIndex& index,
                                           const Bm25Params& params,
                                           const TripleConfig& cfg);

void export_pairs(std::span<const TrainingPair> pairs, const std::string& path);
std::vector<TrainingPair> load_pairs(const std::string& path);

void export_triples(std::span<const RetrievalTriple> triples, const std::string& path);
std::vector<RetrievalTriple> load_triples(const std::string& path);

}  // namespace psc
