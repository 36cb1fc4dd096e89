#pragma once

#include <string>

#include "json.hpp"

namespace psc {

struct RetryPolicy {
    int attempts = 3;       // total tries, not re-tries
    int backoff_ms = 100;   // doubles after each failed attempt
};

// POSTs a JSON body to endpoint+path and returns the parsed JSON reply.
// Non-2xx statuses and connection failures count against the retry
// budget; exhaustion raises TransportError. An unparsable reply body
// raises ProtocolError.
nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& retry);

}  // namespace psc
