#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "psc/common.hpp"

namespace psc {

using Json = nlohmann::json;

// Iterates a line-delimited JSON file; fn(line_number, record) is called
// for every non-empty line. Parse failures name the offending line.
template <typename Fn>
void for_each_jsonl_record(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        Json record;
        try {
            record = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": malformed record: " + e.what());
        }
        if (!record.is_object())
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": record is not an object");
        fn(lineno, record);
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    return out;
}

// Extracts a field, rewrapping json type errors as ValidationError with
// file:line context.
template <typename T>
T field_as(const Json& record, const char* key, const std::string& path,
           std::size_t lineno) {
    auto it = record.find(key);
    if (it == record.end())
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": missing field '" + key + "'");
    try {
        return it->get<T>();
    } catch (const Json::exception& e) {
        throw ValidationError(path + ":" + std::to_string(lineno) +
                              ": bad field '" + key + "': " + e.what());
    }
}

}  // namespace psc
