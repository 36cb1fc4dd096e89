#include "psc/http_service.hpp"

#include <chrono>
#include <iostream>
#include <thread>

#include "httplib.h"
#include "psc/common.hpp"

namespace psc {

nlohmann::json post_json(const std::string& endpoint, const std::string& path,
                         const nlohmann::json& body, const RetryPolicy& retry) {
    const std::string payload = body.dump();
    std::string last_failure = "no attempt made";
    const int attempts = std::max(retry.attempts, 1);

    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const auto delay = std::chrono::milliseconds(
                static_cast<long long>(retry.backoff_ms) << (attempt - 1));
            std::this_thread::sleep_for(delay);
            std::cerr << "psc: retry " << attempt << "/" << (attempts - 1) << " for "
                      << endpoint << path << "\n";
        }
        httplib::Client client(endpoint);
        client.set_connection_timeout(5, 0);
        client.set_read_timeout(30, 0);
        auto res = client.Post(path, payload, "application/json");
        if (!res) {
            last_failure = "connection failure (" + httplib::to_string(res.error()) + ")";
            continue;
        }
        if (res->status < 200 || res->status >= 300) {
            last_failure = "HTTP status " + std::to_string(res->status);
            continue;
        }
        try {
            return nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProtocolError("service " + endpoint + path +
                                " returned unparsable body: " + e.what());
        }
    }
    throw TransportError("service " + endpoint + path + " failed after " +
                         std::to_string(attempts) + " attempts: " + last_failure);
}

}  // namespace psc
