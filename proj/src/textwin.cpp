#include "psc/textwin.hpp"

#include <cmath>

#include "psc/common.hpp"

namespace psc {

void validate_window_config(const WindowConfig& cfg) {
    if (cfg.window_size < 1) throw ValidationError("window_size must be >= 1");
    if (cfg.stride < 1) throw ValidationError("stride must be >= 1");
    if (cfg.nqc_depth < 2) throw ValidationError("nqc_depth must be >= 2");
}

std::vector<std::string> enumerate_windows(const std::string& context,
                                           const WindowConfig& cfg) {
    validate_window_config(cfg);
    const auto tokens = tokenize(context);
    if (tokens.empty()) return {};

    auto join = [&](std::size_t begin, std::size_t end) {
        std::string window;
        for (std::size_t i = begin; i < end; ++i) {
            if (i > begin) window += ' ';
            window += tokens[i];
        }
        return window;
    };

    const auto size = static_cast<std::size_t>(cfg.window_size);
    if (tokens.size() <= size) return {join(0, tokens.size())};

    std::vector<std::string> windows;
    for (std::size_t start = 0; start + size <= tokens.size();
         start += static_cast<std::size_t>(cfg.stride))
        windows.push_back(join(start, start + size));
    return windows;
}

double nqc(const InvertedIndex& index, const Bm25Params& params,
           const std::string& query, int depth) {
    if (depth < 2) throw ValidationError("nqc depth must be >= 2");

    double mu = 0.0;
    for (const std::string& term : tokenize(query))
        if (index.df(term) > 0) mu += index.idf(term);
    if (mu == 0.0) return 0.0;

    const RankedList top = index.search(params, query, depth);
    const std::size_t d = top.entries.size();
    if (d < 2) return 0.0;

    double mean = 0.0;
    for (const RankedEntry& e : top.entries) mean += e.score;
    mean /= static_cast<double>(d);

    double variance = 0.0;
    for (const RankedEntry& e : top.entries)
        variance += (e.score - mean) * (e.score - mean);
    variance /= static_cast<double>(d);

    return std::sqrt(variance) / mu;
}

std::string best_window_query(const std::string& context, const InvertedIndex& index,
                              const Bm25Params& params, const WindowConfig& cfg) {
    const auto windows = enumerate_windows(context, cfg);
    if (windows.empty()) return "";

    std::size_t best = 0;
    double best_score = nqc(index, params, windows[0], cfg.nqc_depth);
    for (std::size_t i = 1; i < windows.size(); ++i) {
        const double score = nqc(index, params, windows[i], cfg.nqc_depth);
        if (score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return windows[best];
}

}  // namespace psc
