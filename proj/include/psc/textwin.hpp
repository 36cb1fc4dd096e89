#pragma once

#include <string>
#include <vector>

#include "psc/lexindex.hpp"

namespace psc {

struct WindowConfig {
    int window_size = 5;  // tokens
    int stride = 1;
    int nqc_depth = 100;
};

void validate_window_config(const WindowConfig& cfg);

// Sliding token windows over the serialized context. Fewer tokens than
// window_size yield a single window of everything; an empty context
// yields nothing.
std::vector<std::string> enumerate_windows(const std::string& context,
                                           const WindowConfig& cfg);

// Normalized Query Commitment: population standard deviation of the
// top-depth retrieval scores divided by mu_D = sum of IDF over query-term
// occurrences with df > 0. Degenerates to 0 when fewer than two documents
// match or mu_D is 0.
double nqc(const InvertedIndex& index, const Bm25Params& params,
           const std::string& query, int depth);

// Window with maximal NQC; ties go to the earliest window; empty context
// yields the empty string.
std::string best_window_query(const std::string& context, const InvertedIndex& index,
                              const Bm25Params& params, const WindowConfig& cfg);

}  // namespace psc
