#include "psc/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "psc/jsonl.hpp"

namespace psc {

Qrels load_qrels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    Qrels qrels;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::istringstream fields(line);
        std::string qid, zero, doc_id;
        int grade = 0;
        if (!(fields >> qid >> zero >> doc_id >> grade))
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": malformed qrels line");
        if (grade < 0)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": negative grade");
        if (grade == 0) continue;  // judged non-relevant
        qrels[qid][doc_id] = grade;
    }
    return qrels;
}

Qrels qrels_from_conversations(std::span<const Conversation> convs) {
    Qrels qrels;
    for (const Conversation& conv : convs)
        for (const auto& [turn, docs] : conv.judgments)
            for (const Judgment& j : docs)
                qrels[make_qid(conv.conv_id, turn)][j.doc_id] = j.grade;
    return qrels;
}

double precision_at_1(const RankedList& run, const QrelsForQid& judged) {
    if (run.entries.empty()) return 0.0;
    auto it = judged.find(run.entries.front().doc_id);
    return it != judged.end() && it->second >= 1 ? 1.0 : 0.0;
}

double reciprocal_rank(const RankedList& run, const QrelsForQid& judged, int cutoff) {
    const std::size_t limit =
        std::min(run.entries.size(), static_cast<std::size_t>(cutoff));
    for (std::size_t r = 0; r < limit; ++r) {
        auto it = judged.find(run.entries[r].doc_id);
        if (it != judged.end() && it->second >= 1)
            return 1.0 / static_cast<double>(r + 1);
    }
    return 0.0;
}

NpdcgResult npdcg_conversation(
    std::span<const std::pair<int, const RankedList*>> turn_runs,
    const std::map<int, QrelsForQid>& conv_qrels, int k) {
    if (k < 1) throw ValidationError("npDCG cutoff must be >= 1");
    for (std::size_t i = 1; i < turn_runs.size(); ++i)
        if (turn_runs[i].first <= turn_runs[i - 1].first)
            throw ValidationError("npDCG turns out of order");

    NpdcgResult result;

    // System pass: a doc is credited the first time it contributes gain.
    std::set<std::string> credited;
    for (const auto& [turn, list] : turn_runs) {
        auto rel_it = conv_qrels.find(turn);
        if (rel_it == conv_qrels.end()) continue;
        const QrelsForQid& rel = rel_it->second;
        if (list == nullptr) continue;
        const std::size_t limit =
            std::min(list->entries.size(), static_cast<std::size_t>(k));
        for (std::size_t r = 0; r < limit; ++r) {
            const std::string& doc = list->entries[r].doc_id;
            auto grade_it = rel.find(doc);
            if (grade_it == rel.end() || credited.count(doc)) continue;
            result.dcg_sum += static_cast<double>(grade_it->second) /
                              std::log2(static_cast<double>(r) + 2.0);
            credited.insert(doc);
        }
    }

    // Ideal pass: same crediting rule; each turn places its not-yet-used
    // relevant docs in (grade desc, doc_id asc) order.
    std::set<std::string> ideal_credited;
    for (const auto& [turn, list] : turn_runs) {
        (void)list;
        auto rel_it = conv_qrels.find(turn);
        if (rel_it == conv_qrels.end()) continue;
        std::vector<std::pair<std::string, int>> available;
        for (const auto& [doc, grade] : rel_it->second)
            if (!ideal_credited.count(doc)) available.emplace_back(doc, grade);
        std::sort(available.begin(), available.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                  });
        const std::size_t limit =
            std::min(available.size(), static_cast<std::size_t>(k));
        for (std::size_t r = 0; r < limit; ++r) {
            result.idcg_sum += static_cast<double>(available[r].second) /
                               std::log2(static_cast<double>(r) + 2.0);
            ideal_credited.insert(available[r].first);
        }
    }
    return result;
}

std::string MetricSpec::name() const {
    switch (kind) {
        case Kind::P1: return "p1";
        case Kind::Mrr: return "mrr" + std::to_string(cutoff);
        case Kind::Npdcg: return "npdcg" + std::to_string(cutoff);
    }
    return "p1";
}

std::vector<MetricSpec> parse_metrics(std::string_view csv) {
    std::vector<MetricSpec> specs;
    std::string token;
    std::istringstream stream{std::string(csv)};
    while (std::getline(stream, token, ',')) {
        const std::string name = trim(token);
        if (name.empty()) continue;
        auto cutoff_of = [&](std::string_view prefix) {
            const std::string digits(name.substr(prefix.size()));
            if (digits.empty() ||
                digits.find_first_not_of("0123456789") != std::string::npos)
                throw ValidationError("bad metric '" + name + "'");
            return std::stoi(digits);
        };
        if (name == "p1") {
            specs.push_back({MetricSpec::Kind::P1, 0});
        } else if (name.rfind("mrr", 0) == 0) {
            specs.push_back({MetricSpec::Kind::Mrr, cutoff_of("mrr")});
        } else if (name.rfind("npdcg", 0) == 0) {
            specs.push_back({MetricSpec::Kind::Npdcg, cutoff_of("npdcg")});
        } else {
            throw ValidationError("unknown metric '" + name +
                                  "' (expected p1|mrr<k>|npdcg<k>)");
        }
        if (!specs.empty() && specs.back().cutoff < 0)
            throw ValidationError("bad metric cutoff in '" + name + "'");
    }
    if (specs.empty()) throw ValidationError("no metrics requested");
    return specs;
}

MetricReport evaluate(const RunSet& runs, const Qrels& qrels,
                      std::span<const MetricSpec> metrics) {
    if (qrels.empty()) throw ValidationError("empty qrels");

    MetricReport report;
    for (const auto& [qid, list] : runs.lists)
        if (!qrels.count(qid)) report.unjudged_run_qids.push_back(qid);
    for (const auto& [qid, judged] : qrels)
        if (!runs.lists.count(qid)) report.judged_missing_qids.push_back(qid);

    static const RankedList kEmptyList;

    // Conversation grouping for npDCG.
    std::map<std::string, std::map<int, QrelsForQid>> by_conv;
    for (const auto& [qid, judged] : qrels) {
        auto [conv_id, turn] = parse_qid(qid);
        by_conv[conv_id][turn] = judged;
    }

    for (const MetricSpec& spec : metrics) {
        MetricValue value;
        if (spec.kind == MetricSpec::Kind::Npdcg) {
            for (const auto& [conv_id, turns] : by_conv) {
                std::vector<std::pair<int, const RankedList*>> turn_runs;
                for (const auto& [turn, judged] : turns) {
                    auto it = runs.lists.find(make_qid(conv_id, turn));
                    turn_runs.emplace_back(
                        turn, it == runs.lists.end() ? &kEmptyList : &it->second);
                }
                const NpdcgResult r = npdcg_conversation(turn_runs, turns, spec.cutoff);
                if (!r.defined()) {
                    ++value.excluded;
                    continue;
                }
                value.breakdown.emplace(conv_id, r.value());
            }
        } else {
            for (const auto& [qid, judged] : qrels) {
                auto it = runs.lists.find(qid);
                const RankedList& list = it == runs.lists.end() ? kEmptyList : it->second;
                const double v = spec.kind == MetricSpec::Kind::P1
                                     ? precision_at_1(list, judged)
                                     : reciprocal_rank(list, judged, spec.cutoff);
                value.breakdown.emplace(qid, v);
            }
        }
        value.evaluated = value.breakdown.size();
        double sum = 0.0;
        for (const auto& [unit, v] : value.breakdown) sum += v;
        value.aggregate =
            value.evaluated > 0 ? sum / static_cast<double>(value.evaluated) : 0.0;
        report.metrics.emplace_back(spec, std::move(value));
    }
    return report;
}

void write_report(const MetricReport& report, std::ostream& out,
                  std::string_view format) {
    char buf[64];
    if (format == "jsonl") {
        for (const auto& [spec, value] : report.metrics) {
            out << Json{{"kind", "aggregate"},
                        {"metric", spec.name()},
                        {"value", value.aggregate},
                        {"evaluated", value.evaluated},
                        {"excluded", value.excluded}}
                       .dump()
                << '\n';
            for (const auto& [unit, v] : value.breakdown)
                out << Json{{"kind", "unit"},
                            {"metric", spec.name()},
                            {"unit", unit},
                            {"value", v}}
                           .dump()
                    << '\n';
        }
        for (const std::string& qid : report.unjudged_run_qids)
            out << Json{{"kind", "unjudged_run_qid"}, {"qid", qid}}.dump() << '\n';
        for (const std::string& qid : report.judged_missing_qids)
            out << Json{{"kind", "judged_missing_qid"}, {"qid", qid}}.dump() << '\n';
        return;
    }
    if (format != "human")
        throw ValidationError("unknown report format '" + std::string(format) +
                              "' (expected human|jsonl)");

    out << "metric        value     evaluated  excluded\n";
    for (const auto& [spec, value] : report.metrics) {
        std::snprintf(buf, sizeof buf, "%-12s  %.6f  %-9zu  %zu\n", spec.name().c_str(),
                      value.aggregate, value.evaluated, value.excluded);
        out << buf;
    }
    if (!report.unjudged_run_qids.empty()) {
        out << "unjudged run qids (" << report.unjudged_run_qids.size() << "):";
        for (const std::string& qid : report.unjudged_run_qids) out << ' ' << qid;
        out << '\n';
    }
    if (!report.judged_missing_qids.empty()) {
        out << "judged qids missing from run (" << report.judged_missing_qids.size()
            << "):";
        for (const std::string& qid : report.judged_missing_qids) out << ' ' << qid;
        out << '\n';
    }
}

void write_report_file(const MetricReport& report, const std::string& path,
                       std::string_view format) {
    auto out = open_output(path);
    write_report(report, out, format);
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace psc
