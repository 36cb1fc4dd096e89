#include "psc/lexindex.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "psc/common.hpp"

namespace psc {

namespace {

constexpr char kMagic[8] = {'P', 'S', 'C', 'L', 'X', 'I', 'D', 'X'};
constexpr uint32_t kFormatVersion = 1;

bool is_ascii_alnum(unsigned char c) {
    return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

char ascii_lower(unsigned char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c + 0x20) : static_cast<char>(c);
}

// Little-endian writer that also feeds the running payload checksum.
class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}

    void bytes(const char* data, std::size_t n) {
        out_.write(data, static_cast<std::streamsize>(n));
        hash_.update(std::string_view(data, n));
    }
    void u32(uint32_t v) {
        char buf[4];
        for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        bytes(buf, 4);
    }
    void u64(uint64_t v) {
        char buf[8];
        for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        bytes(buf, 8);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    uint64_t digest() const { return hash_.digest(); }

private:
    std::ostream& out_;
    Fnv1a64 hash_;
};

class Reader {
public:
    Reader(std::istream& in, const std::string& path) : in_(in), path_(path) {}

    uint32_t u32() {
        char buf[4];
        raw(buf, 4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return v;
    }
    uint64_t u64() {
        char buf[8];
        raw(buf, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return v;
    }
    std::string str() {
        uint32_t n = u32();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    void magic(const char* expected, std::size_t n) {
        std::string got(n, '\0');
        raw(got.data(), n);
        if (std::memcmp(got.data(), expected, n) != 0)
            throw ValidationError(path_ + ": not an index file (bad magic)");
    }
    uint64_t digest() const { return hash_.digest(); }
    // Reads the trailing checksum without feeding the hash.
    uint64_t trailing_u64() {
        char buf[8];
        in_.read(buf, 8);
        if (!in_) throw ValidationError(path_ + ": truncated index file");
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
        return v;
    }

private:
    void raw(char* data, std::size_t n) {
        in_.read(data, static_cast<std::streamsize>(n));
        if (!in_) throw ValidationError(path_ + ": truncated index file");
        hash_.update(std::string_view(data, n));
    }

    std::istream& in_;
    std::string path_;
    Fnv1a64 hash_;
};

}  // namespace

void validate_params(const Bm25Params& params) {
    if (params.k1 < 0.0) throw ValidationError("k1 must be >= 0");
    if (params.b < 0.0 || params.b > 1.0) throw ValidationError("b must be in [0, 1]");
}

Bm25Params bm25_profile(std::string_view name) {
    if (name == "procis") return {0.9, 0.4};
    if (name == "webdisc-cc") return {8.0, 0.99};
    if (name == "webdisc-ia") return {7.0, 0.99};
    throw ValidationError("unknown profile '" + std::string(name) +
                          "' (expected procis|webdisc-cc|webdisc-ia)");
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> terms;
    std::string current;
    for (unsigned char c : text) {
        if (is_ascii_alnum(c)) {
            current.push_back(ascii_lower(c));
        } else if (!current.empty()) {
            terms.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) terms.push_back(std::move(current));
    return terms;
}

InvertedIndex InvertedIndex::build(const DocumentCorpus& corpus) {
    if (corpus.size() == 0) throw ValidationError("cannot index an empty corpus");

    InvertedIndex index;
    index.corpus_checksum_ = corpus.checksum();
    index.doc_ids_.reserve(corpus.size());
    index.doc_lengths_.reserve(corpus.size());

    uint64_t total_length = 0;
    for (const Document& doc : corpus.docs()) {
        const auto terms = tokenize(doc.text);
        if (terms.empty())
            throw ValidationError("document '" + doc.doc_id + "' reduces to zero tokens");
        const auto internal = static_cast<uint32_t>(index.doc_ids_.size());
        index.internal_.emplace(doc.doc_id, internal);
        index.doc_ids_.push_back(doc.doc_id);
        index.doc_lengths_.push_back(static_cast<uint32_t>(terms.size()));
        total_length += terms.size();

        std::map<std::string, uint32_t> tf;
        for (const std::string& t : terms) ++tf[t];
        for (const auto& [term, freq] : tf)
            index.postings_[term].push_back({internal, freq});
    }
    index.avg_doc_length_ =
        static_cast<double>(total_length) / static_cast<double>(corpus.size());
    return index;
}

InvertedIndex InvertedIndex::from_parts(std::vector<std::string> doc_ids,
                                        std::vector<uint32_t> doc_lengths,
                                        std::map<std::string, std::vector<Posting>> postings,
                                        uint64_t corpus_checksum) {
    if (doc_ids.size() != doc_lengths.size())
        throw ValidationError("doc_ids and doc_lengths differ in size");
    InvertedIndex index;
    index.doc_ids_ = std::move(doc_ids);
    index.doc_lengths_ = std::move(doc_lengths);
    index.postings_ = std::move(postings);
    index.corpus_checksum_ = corpus_checksum;
    for (uint32_t i = 0; i < index.doc_ids_.size(); ++i)
        index.internal_.emplace(index.doc_ids_[i], i);
    if (index.internal_.size() != index.doc_ids_.size())
        throw ValidationError("duplicate doc_id in index parts");
    uint64_t total = 0;
    for (uint32_t len : index.doc_lengths_) total += len;
    index.avg_doc_length_ = index.doc_lengths_.empty()
                                ? 0.0
                                : static_cast<double>(total) /
                                      static_cast<double>(index.doc_lengths_.size());
    for (const auto& [term, plist] : index.postings_) {
        if (!std::is_sorted(plist.begin(), plist.end(),
                            [](const Posting& a, const Posting& b) { return a.doc < b.doc; }))
            throw ValidationError("postings for term '" + term + "' not sorted");
        for (const Posting& p : plist)
            if (p.doc >= index.doc_ids_.size())
                throw ValidationError("posting for term '" + term + "' names unknown doc");
    }
    return index;
}

uint32_t InvertedIndex::df(std::string_view term) const {
    auto it = postings_.find(std::string(term));
    return it == postings_.end() ? 0 : static_cast<uint32_t>(it->second.size());
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(doc_count());
    const double d = static_cast<double>(df(term));
    return std::log(1.0 + (n - d + 0.5) / (d + 0.5));
}

double InvertedIndex::term_doc_score(const Bm25Params& params, double idf_value,
                                     uint32_t tf, uint32_t doc_length) const {
    if (tf == 0) return 0.0;
    const double ratio = avg_doc_length_ > 0.0
                             ? static_cast<double>(doc_length) / avg_doc_length_
                             : 0.0;
    const double norm = params.k1 * (1.0 - params.b + params.b * ratio);
    const double tfd = static_cast<double>(tf);
    return idf_value * (tfd * (params.k1 + 1.0)) / (tfd + norm);
}

double InvertedIndex::bm25_score(const Bm25Params& params,
                                 std::span<const std::string> query_terms,
                                 const std::string& doc_id) const {
    validate_params(params);
    auto it = internal_.find(doc_id);
    if (it == internal_.end())
        throw ValidationError("doc '" + doc_id + "' not in index");
    const uint32_t doc = it->second;

    double score = 0.0;
    for (const std::string& term : query_terms) {
        auto pit = postings_.find(term);
        uint32_t tf = 0;
        if (pit != postings_.end()) {
            const auto& plist = pit->second;
            auto p = std::lower_bound(plist.begin(), plist.end(), doc,
                                      [](const Posting& a, uint32_t d) { return a.doc < d; });
            if (p != plist.end() && p->doc == doc) tf = p->tf;
        }
        score += term_doc_score(params, idf(term), tf, doc_lengths_[doc]);
    }
    return score;
}

double InvertedIndex::score_text(const Bm25Params& params,
                                 std::span<const std::string> query_terms,
                                 std::string_view text) const {
    validate_params(params);
    const auto tokens = tokenize(text);
    std::map<std::string, uint32_t> tf;
    for (const std::string& t : tokens) ++tf[t];
    const auto length = static_cast<uint32_t>(tokens.size());

    double score = 0.0;
    for (const std::string& term : query_terms) {
        auto it = tf.find(term);
        const uint32_t f = it == tf.end() ? 0 : it->second;
        score += term_doc_score(params, idf(term), f, length);
    }
    return score;
}

RankedList InvertedIndex::search(const Bm25Params& params, const std::string& query,
                                 int k, std::string qid) const {
    validate_params(params);
    if (k < 1) throw ValidationError("k must be >= 1");

    RankedList out;
    out.qid = std::move(qid);
    out.cutoff = k;

    const auto terms = tokenize(query);
    if (terms.empty()) return out;

    std::vector<uint32_t> candidates;
    for (const std::string& term : terms) {
        auto it = postings_.find(term);
        if (it == postings_.end()) continue;
        for (const Posting& p : it->second) candidates.push_back(p.doc);
    }
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    out.entries.reserve(candidates.size());
    for (uint32_t doc : candidates) {
        double score = 0.0;
        for (const std::string& term : terms) {
            auto pit = postings_.find(term);
            uint32_t tf = 0;
            if (pit != postings_.end()) {
                const auto& plist = pit->second;
                auto p = std::lower_bound(plist.begin(), plist.end(), doc,
                                          [](const Posting& a, uint32_t d) { return a.doc < d; });
                if (p != plist.end() && p->doc == doc) tf = p->tf;
            }
            score += term_doc_score(params, idf(term), tf, doc_lengths_[doc]);
        }
        if (score > 0.0) out.entries.push_back({doc_ids_[doc], score});
    }

    std::sort(out.entries.begin(), out.entries.end(),
              [](const RankedEntry& a, const RankedEntry& b) {
                  if (a.score != b.score) return a.score > b.score;
                  return a.doc_id < b.doc_id;
              });
    if (out.entries.size() > static_cast<std::size_t>(k))
        out.entries.resize(static_cast<std::size_t>(k));
    return out;
}

void InvertedIndex::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    Writer writer(out);

    writer.bytes(kMagic, sizeof kMagic);
    writer.u32(kFormatVersion);
    writer.u64(corpus_checksum_);
    writer.u64(static_cast<uint64_t>(doc_count()));
    for (std::size_t i = 0; i < doc_ids_.size(); ++i) {
        writer.str(doc_ids_[i]);
        writer.u32(doc_lengths_[i]);
    }
    writer.u64(static_cast<uint64_t>(postings_.size()));
    for (const auto& [term, plist] : postings_) {
        writer.str(term);
        writer.u32(static_cast<uint32_t>(plist.size()));
        for (const Posting& p : plist) {
            writer.u32(p.doc);
            writer.u32(p.tf);
        }
    }
    const uint64_t digest = writer.digest();
    // Trailing checksum, not part of its own hash.
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((digest >> (8 * i)) & 0xff);
    out.write(buf, 8);
    if (!out) throw IoError("write failed for " + path);
}

InvertedIndex InvertedIndex::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);

    Reader r(in, path);
    r.magic(kMagic, sizeof kMagic);
    const uint32_t version = r.u32();
    if (version != kFormatVersion)
        throw ValidationError(path + ": unsupported index format version " +
                              std::to_string(version));
    const uint64_t corpus_checksum = r.u64();
    const uint64_t docs = r.u64();

    std::vector<std::string> doc_ids;
    std::vector<uint32_t> doc_lengths;
    doc_ids.reserve(docs);
    doc_lengths.reserve(docs);
    for (uint64_t i = 0; i < docs; ++i) {
        doc_ids.push_back(r.str());
        doc_lengths.push_back(r.u32());
    }

    std::map<std::string, std::vector<Posting>> postings;
    const uint64_t terms = r.u64();
    for (uint64_t i = 0; i < terms; ++i) {
        std::string term = r.str();
        const uint32_t count = r.u32();
        std::vector<Posting> plist;
        plist.reserve(count);
        for (uint32_t j = 0; j < count; ++j) {
            Posting p;
            p.doc = r.u32();
            p.tf = r.u32();
            plist.push_back(p);
        }
        postings.emplace(std::move(term), std::move(plist));
    }

    const uint64_t expected = r.digest();
    const uint64_t stored = r.trailing_u64();
    if (expected != stored)
        throw ValidationError(path + ": index checksum mismatch");

    return from_parts(std::move(doc_ids), std::move(doc_lengths), std::move(postings),
                      corpus_checksum);
}

}  // namespace psc
