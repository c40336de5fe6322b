#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/util.hpp"

namespace personakit {

enum class ResponseFormat { free_text, json_object };

struct ChatRequest {
    std::string model_id;
    std::string system;
    std::vector<std::string> user_turns;
    // nullopt leaves the provider's default in place.
    std::optional<double> temperature;
    int max_tokens = 1024;
    ResponseFormat response_format = ResponseFormat::free_text;

    bool operator==(const ChatRequest&) const = default;
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;

    bool operator==(const Usage&) const = default;
};

struct ChatResponse {
    std::string text;
    std::string finish_reason;
    Usage usage;
    double latency_ms = 0.0;

    // Set by the gateway: cassette key and shot index this response came from.
    std::string request_hash;
    int shot = 0;
};

// Canonical JSON form: fixed key set, keys sorted, compact dump.
json canonical_json(const ChatRequest& request);
std::string canonical_string(const ChatRequest& request);
std::string request_hash(const ChatRequest& request);
ChatRequest request_from_json(const json& doc);

json response_to_json(const ChatResponse& response);
ChatResponse response_from_json(const json& doc);

} // namespace personakit
