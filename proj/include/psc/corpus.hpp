#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace psc {

struct Utterance {
    int turn_index = 0;  // 1-based, contiguous within a conversation
    std::string speaker_id;
    std::string text;

    bool operator==(const Utterance&) const = default;
};

struct Judgment {
    std::string doc_id;
    int grade = 1;  // >= 1; both source datasets are binary but grades stay general

    bool operator==(const Judgment&) const = default;
};

struct Conversation {
    std::string conv_id;
    std::vector<Utterance> turns;
    std::map<int, std::vector<Judgment>> judgments;  // turn_index -> positives

    bool operator==(const Conversation&) const = default;
};

struct Document {
    std::string doc_id;
    std::string text;

    bool operator==(const Document&) const = default;
};

class DocumentCorpus {
public:
    // Rejects duplicate ids, empty ids/text, and ids containing whitespace
    // (ids appear as columns in run/qrels files).
    void add(Document doc);

    std::size_t size() const { return docs_.size(); }
    bool contains(const std::string& doc_id) const { return by_id_.count(doc_id) > 0; }
    const Document& at(const std::string& doc_id) const;
    const Document& at_index(std::size_t i) const { return docs_[i]; }
    const std::vector<Document>& docs() const { return docs_; }

    // Order-sensitive digest over (doc_id, text) pairs; persisted into the
    // index file so stale indexes are detected on reload.
    uint64_t checksum() const;

private:
    std::vector<Document> docs_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

enum class TaskSetting {
    Contextualisation,  // context = turns 1..t
    Anticipation,       // context = turns 1..t-1
};

TaskSetting parse_setting(std::string_view name);
std::string_view setting_name(TaskSetting setting);

// Line-delimited conversation records, one conversation per line:
//   {"format":1,"conv_id":"c1",
//    "turns":[{"turn":1,"speaker":"s1","text":"..."}],
//    "judgments":[{"turn":3,"doc_id":"d7","grade":1}]}
std::vector<Conversation> load_conversations(const std::string& path);
void write_conversations(std::span<const Conversation> convs, const std::string& path);

// Line-delimited corpus records: {"doc_id":"d1","text":"..."}
DocumentCorpus load_corpus(const std::string& path);
void write_corpus(const DocumentCorpus& corpus, const std::string& path);

std::string render_utterance(const Utterance& u);

// "<speaker_id>: <text>" per turn, joined by single newlines.
// Contextualisation serializes turns 1..t; Anticipation serializes
// turns 1..t-1 and is empty at t=1.
std::string assemble_context(const Conversation& conv, int t, TaskSetting setting);

// Ascending indices of turns carrying at least one judgment; the only
// turns at which the pipeline retrieves.
std::vector<int> judged_turns(const Conversation& conv);

std::string make_qid(const std::string& conv_id, int turn_index);
// Splits on the last '.' with an integer suffix, so conv_ids may contain dots.
std::pair<std::string, int> parse_qid(const std::string& qid);

// Fails with conv/turn/doc named when a judgment points at a document
// the corpus does not contain.
void check_judgments_resolvable(std::span<const Conversation> convs,
                                const DocumentCorpus& corpus);

// Four-column qrels: "<conv_id>.<turn> 0 <doc_id> <grade>".
void export_qrels(std::span<const Conversation> convs, const std::string& path);

}  // namespace psc
