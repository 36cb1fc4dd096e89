#include "psc/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "psc/jsonl.hpp"

namespace psc {

namespace {

bool has_whitespace(std::string_view s) {
    return s.find_first_of(" \t\r\n") != std::string_view::npos;
}

void check_id(const std::string& id, const char* what) {
    if (id.empty()) throw ValidationError(std::string(what) + " is empty");
    if (has_whitespace(id))
        throw ValidationError(std::string(what) + " '" + id + "' contains whitespace");
}

void validate_conversation(const Conversation& conv, const std::string& where) {
    check_id(conv.conv_id, "conv_id");
    for (std::size_t i = 0; i < conv.turns.size(); ++i) {
        const Utterance& u = conv.turns[i];
        if (u.turn_index != static_cast<int>(i) + 1)
            throw ValidationError(where + ": conversation '" + conv.conv_id +
                                  "' has non-contiguous turns (expected " +
                                  std::to_string(i + 1) + ", got " +
                                  std::to_string(u.turn_index) + ")");
        if (trim(u.text).empty())
            throw ValidationError(where + ": conversation '" + conv.conv_id +
                                  "' turn " + std::to_string(u.turn_index) +
                                  " has empty text");
    }
    for (const auto& [turn, docs] : conv.judgments) {
        if (turn < 1 || turn > static_cast<int>(conv.turns.size()))
            throw ValidationError(where + ": conversation '" + conv.conv_id +
                                  "' judges missing turn " + std::to_string(turn));
        std::vector<std::string> seen;
        for (const Judgment& j : docs) {
            check_id(j.doc_id, "doc_id");
            if (j.grade < 1)
                throw ValidationError(where + ": conversation '" + conv.conv_id +
                                      "' turn " + std::to_string(turn) +
                                      " has grade < 1 for doc '" + j.doc_id + "'");
            if (std::find(seen.begin(), seen.end(), j.doc_id) != seen.end())
                throw ValidationError(where + ": conversation '" + conv.conv_id +
                                      "' turn " + std::to_string(turn) +
                                      " judges doc '" + j.doc_id + "' twice");
            seen.push_back(j.doc_id);
        }
    }
}

}  // namespace

void DocumentCorpus::add(Document doc) {
    check_id(doc.doc_id, "doc_id");
    if (doc.text.empty())
        throw ValidationError("document '" + doc.doc_id + "' has empty text");
    if (by_id_.count(doc.doc_id))
        throw ValidationError("duplicate doc_id '" + doc.doc_id + "'");
    by_id_.emplace(doc.doc_id, docs_.size());
    docs_.push_back(std::move(doc));
}

const Document& DocumentCorpus::at(const std::string& doc_id) const {
    auto it = by_id_.find(doc_id);
    if (it == by_id_.end())
        throw ValidationError("unknown doc_id '" + doc_id + "'");
    return docs_[it->second];
}

uint64_t DocumentCorpus::checksum() const {
    Fnv1a64 h;
    for (const Document& d : docs_) {
        h.update(d.doc_id);
        h.update_byte(0x1f);
        h.update(d.text);
        h.update_byte(0x1e);
    }
    return h.digest();
}

TaskSetting parse_setting(std::string_view name) {
    if (name == "contextualisation" || name == "cc") return TaskSetting::Contextualisation;
    if (name == "anticipation" || name == "ia") return TaskSetting::Anticipation;
    throw ValidationError("unknown setting '" + std::string(name) +
                          "' (expected contextualisation|anticipation)");
}

std::string_view setting_name(TaskSetting setting) {
    return setting == TaskSetting::Contextualisation ? "contextualisation"
                                                     : "anticipation";
}

std::vector<Conversation> load_conversations(const std::string& path) {
    std::vector<Conversation> convs;
    std::unordered_map<std::string, std::size_t> seen;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        const std::string where = path + ":" + std::to_string(lineno);
        if (record.contains("format") && record["format"] != 1)
            throw ValidationError(where + ": unsupported format version");

        Conversation conv;
        conv.conv_id = field_as<std::string>(record, "conv_id", path, lineno);
        for (const Json& t : field_as<Json>(record, "turns", path, lineno)) {
            Utterance u;
            u.turn_index = field_as<int>(t, "turn", path, lineno);
            u.speaker_id = field_as<std::string>(t, "speaker", path, lineno);
            u.text = field_as<std::string>(t, "text", path, lineno);
            conv.turns.push_back(std::move(u));
        }
        if (record.contains("judgments")) {
            for (const Json& j : record["judgments"]) {
                int turn = field_as<int>(j, "turn", path, lineno);
                Judgment jm;
                jm.doc_id = field_as<std::string>(j, "doc_id", path, lineno);
                jm.grade = j.contains("grade") ? field_as<int>(j, "grade", path, lineno) : 1;
                conv.judgments[turn].push_back(std::move(jm));
            }
        }
        validate_conversation(conv, where);
        if (seen.count(conv.conv_id))
            throw ValidationError(where + ": duplicate conv_id '" + conv.conv_id + "'");
        seen.emplace(conv.conv_id, lineno);
        convs.push_back(std::move(conv));
    });
    return convs;
}

void write_conversations(std::span<const Conversation> convs, const std::string& path) {
    auto out = open_output(path);
    for (const Conversation& conv : convs) {
        validate_conversation(conv, path);
        Json turns = Json::array();
        for (const Utterance& u : conv.turns)
            turns.push_back({{"turn", u.turn_index},
                             {"speaker", u.speaker_id},
                             {"text", u.text}});
        Json judgments = Json::array();
        for (const auto& [turn, docs] : conv.judgments) {
            std::vector<Judgment> sorted(docs);
            std::sort(sorted.begin(), sorted.end(),
                      [](const Judgment& a, const Judgment& b) { return a.doc_id < b.doc_id; });
            for (const Judgment& j : sorted)
                judgments.push_back({{"turn", turn}, {"doc_id", j.doc_id}, {"grade", j.grade}});
        }
        Json record{{"format", 1},
                    {"conv_id", conv.conv_id},
                    {"turns", std::move(turns)},
                    {"judgments", std::move(judgments)}};
        out << record.dump() << '\n';
    }
}

DocumentCorpus load_corpus(const std::string& path) {
    DocumentCorpus corpus;
    for_each_jsonl_record(path, [&](std::size_t lineno, const Json& record) {
        Document doc;
        doc.doc_id = field_as<std::string>(record, "doc_id", path, lineno);
        doc.text = field_as<std::string>(record, "text", path, lineno);
        try {
            corpus.add(std::move(doc));
        } catch (const ValidationError& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    });
    return corpus;
}

void write_corpus(const DocumentCorpus& corpus, const std::string& path) {
    auto out = open_output(path);
    for (const Document& d : corpus.docs())
        out << Json{{"doc_id", d.doc_id}, {"text", d.text}}.dump() << '\n';
}

std::string render_utterance(const Utterance& u) {
    return u.speaker_id + ": " + u.text;
}

std::string assemble_context(const Conversation& conv, int t, TaskSetting setting) {
    if (t < 1 || t > static_cast<int>(conv.turns.size()))
        throw ValidationError("turn " + std::to_string(t) +
                              " out of range for conversation '" + conv.conv_id + "'");
    const int last = setting == TaskSetting::Contextualisation ? t : t - 1;
    std::string context;
    for (int i = 1; i <= last; ++i) {
        if (i > 1) context += '\n';
        context += render_utterance(conv.turns[static_cast<std::size_t>(i) - 1]);
    }
    return context;
}

std::vector<int> judged_turns(const Conversation& conv) {
    std::vector<int> turns;
    for (const auto& [turn, docs] : conv.judgments)
        if (!docs.empty()) turns.push_back(turn);
    return turns;  // std::map keys are already ascending
}

std::string make_qid(const std::string& conv_id, int turn_index) {
    return conv_id + "." + std::to_string(turn_index);
}

std::pair<std::string, int> parse_qid(const std::string& qid) {
    auto dot = qid.rfind('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 >= qid.size())
        throw ValidationError("malformed qid '" + qid + "'");
    const std::string suffix = qid.substr(dot + 1);
    for (char c : suffix)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw ValidationError("malformed qid '" + qid + "'");
    return {qid.substr(0, dot), std::stoi(suffix)};
}

void check_judgments_resolvable(std::span<const Conversation> convs,
                                const DocumentCorpus& corpus) {
    for (const Conversation& conv : convs)
        for (const auto& [turn, docs] : conv.judgments)
            for (const Judgment& j : docs)
                if (!corpus.contains(j.doc_id))
                    throw ValidationError("conversation '" + conv.conv_id + "' turn " +
                                          std::to_string(turn) + " judges doc '" +
                                          j.doc_id + "' not present in corpus");
}

void export_qrels(std::span<const Conversation> convs, const std::string& path) {
    auto out = open_output(path);
    for (const Conversation& conv : convs) {
        for (const auto& [turn, docs] : conv.judgments) {
            std::vector<Judgment> sorted(docs);
            std::sort(sorted.begin(), sorted.end(),
                      [](const Judgment& a, const Judgment& b) { return a.doc_id < b.doc_id; });
            for (const Judgment& j : sorted)
                out << make_qid(conv.conv_id, turn) << " 0 " << j.doc_id << ' '
                    << j.grade << '\n';
        }
    }
}

}  // namespace psc
