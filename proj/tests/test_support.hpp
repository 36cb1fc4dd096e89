#pragma once

// Shared test scaffolding: scratch directories and an independent
// brute-force retrieval oracle. The oracle recomputes everything from raw
// document text with its own code path so it can stand as the reference
// the engine is checked against.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace testsupport {

class ScratchDir {
public:
    explicit ScratchDir(const std::string& label) {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("psc_" + label + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter.fetch_add(1)));
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return data;
}

namespace oracle {

// Same documented analysis rule, separate implementation.
inline std::vector<std::string> tokens(const std::string& text) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const auto c = static_cast<unsigned char>(text[i]);
        const bool alnum = (c >= '0' && c <= '9') || (c >= 'A' && c <= 'Z') ||
                           (c >= 'a' && c <= 'z');
        if (!alnum) {
            ++i;
            continue;
        }
        std::string word;
        while (i < text.size()) {
            const auto d = static_cast<unsigned char>(text[i]);
            if (d >= '0' && d <= '9') word.push_back(static_cast<char>(d));
            else if (d >= 'a' && d <= 'z') word.push_back(static_cast<char>(d));
            else if (d >= 'A' && d <= 'Z') word.push_back(static_cast<char>(d - 'A' + 'a'));
            else break;
            ++i;
        }
        out.push_back(word);
    }
    return out;
}

struct Corpus {
    // (doc_id, text) in corpus order
    std::vector<std::pair<std::string, std::string>> docs;
};

inline std::size_t count_tf(const Corpus& corpus, std::size_t doc, const std::string& term) {
    std::size_t tf = 0;
    for (const std::string& t : tokens(corpus.docs[doc].second))
        if (t == term) ++tf;
    return tf;
}

inline std::size_t count_df(const Corpus& corpus, const std::string& term) {
    std::size_t df = 0;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d)
        if (count_tf(corpus, d, term) > 0) ++df;
    return df;
}

inline double doc_length(const Corpus& corpus, std::size_t doc) {
    return static_cast<double>(tokens(corpus.docs[doc].second).size());
}

inline double avg_doc_length(const Corpus& corpus) {
    double total = 0.0;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) total += doc_length(corpus, d);
    return total / static_cast<double>(corpus.docs.size());
}

inline double bm25(const Corpus& corpus, double k1, double b,
                   const std::vector<std::string>& query_terms, std::size_t doc) {
    const double avgdl = avg_doc_length(corpus);
    const double n = static_cast<double>(corpus.docs.size());
    const double dl = doc_length(corpus, doc);
    double score = 0.0;
    for (const std::string& term : query_terms) {
        const double df = static_cast<double>(count_df(corpus, term));
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        const double tf = static_cast<double>(count_tf(corpus, doc, term));
        if (tf == 0.0) continue;
        const double norm = k1 * (1.0 - b + b * dl / avgdl);
        score += idf * (tf * (k1 + 1.0)) / (tf + norm);
    }
    return score;
}

// Exhaustive scoring of every document, (score desc, doc_id asc) sort,
// zero scores dropped, top-k cut.
inline std::vector<std::pair<std::string, double>> search(const Corpus& corpus, double k1,
                                                          double b,
                                                          const std::string& query,
                                                          std::size_t k) {
    const auto query_terms = tokens(query);
    std::vector<std::pair<std::string, double>> scored;
    if (query_terms.empty()) return scored;
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        const double s = bm25(corpus, k1, b, query_terms, d);
        if (s > 0.0) scored.emplace_back(corpus.docs[d].first, s);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b2) {
        if (a.second != b2.second) return a.second > b2.second;
        return a.first < b2.first;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

// Plain nDCG@k with linear gains; ideal = grades sorted descending.
inline double ndcg(const std::vector<std::string>& ranking,
                   const std::map<std::string, int>& grades, std::size_t k) {
    double dcg = 0.0;
    for (std::size_t r = 0; r < std::min(ranking.size(), k); ++r) {
        auto it = grades.find(ranking[r]);
        if (it != grades.end())
            dcg += static_cast<double>(it->second) / std::log2(static_cast<double>(r) + 2.0);
    }
    std::vector<int> ideal;
    for (const auto& [doc, grade] : grades) ideal.push_back(grade);
    std::sort(ideal.rbegin(), ideal.rend());
    double idcg = 0.0;
    for (std::size_t r = 0; r < std::min(ideal.size(), k); ++r)
        idcg += static_cast<double>(ideal[r]) / std::log2(static_cast<double>(r) + 2.0);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

}  // namespace oracle
}  // namespace testsupport
