#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace psc {

// Bad inputs, malformed records, broken invariants. CLI exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem trouble. CLI exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Network failure that persisted through the retry budget.
class TransportError : public IoError {
public:
    using IoError::IoError;
};

// A service answered, but not with what its contract promises.
class ProtocolError : public IoError {
public:
    using IoError::IoError;
};

// Streaming FNV-1a (64-bit). Used for corpus checksums, index file
// integrity, and the reproducibility metadata a stage emits.
class Fnv1a64 {
public:
    void update(std::string_view data) {
        for (unsigned char c : data) {
            hash_ ^= c;
            hash_ *= 0x100000001b3ULL;
        }
    }
    void update_byte(unsigned char c) {
        hash_ ^= c;
        hash_ *= 0x100000001b3ULL;
    }
    uint64_t digest() const { return hash_; }

private:
    uint64_t hash_ = 0xcbf29ce484222325ULL;
};

inline uint64_t fnv1a64(std::string_view data) {
    Fnv1a64 h;
    h.update(data);
    return h.digest();
}

uint64_t fnv1a64_file(const std::string& path);

std::string trim(std::string_view s);

}  // namespace psc
