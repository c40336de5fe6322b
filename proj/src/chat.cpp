#include "personakit/chat.hpp"

#include "personakit/error.hpp"

namespace personakit {

namespace {

std::string_view to_string(ResponseFormat format) {
    return format == ResponseFormat::json_object ? "json_object" : "free_text";
}

} // namespace

json canonical_json(const ChatRequest& request) {
    return json{{"model_id", request.model_id},
                {"system", request.system},
                {"user_turns", request.user_turns},
                {"temperature", request.temperature ? json(*request.temperature) : json(nullptr)},
                {"max_tokens", request.max_tokens},
                {"response_format", to_string(request.response_format)}};
}

std::string canonical_string(const ChatRequest& request) {
    return canonical_json(request).dump();
}

std::string request_hash(const ChatRequest& request) {
    return sha256_hex(canonical_string(request));
}

ChatRequest request_from_json(const json& doc) {
    try {
        ChatRequest request;
        request.model_id = doc.at("model_id").get<std::string>();
        request.system = doc.at("system").get<std::string>();
        request.user_turns = doc.at("user_turns").get<std::vector<std::string>>();
        if (doc.contains("temperature") && !doc.at("temperature").is_null()) {
            request.temperature = doc.at("temperature").get<double>();
        }
        request.max_tokens = doc.at("max_tokens").get<int>();
        const auto format = doc.at("response_format").get<std::string>();
        if (format == "json_object") {
            request.response_format = ResponseFormat::json_object;
        } else if (format == "free_text") {
            request.response_format = ResponseFormat::free_text;
        } else {
            throw ParseError("request.response_format", "unknown format " + format);
        }
        return request;
    } catch (const json::exception& e) {
        throw ParseError("request", e.what());
    }
}

json response_to_json(const ChatResponse& response) {
    return json{{"text", response.text},
                {"finish_reason", response.finish_reason},
                {"usage",
                 {{"prompt_tokens", response.usage.prompt_tokens},
                  {"completion_tokens", response.usage.completion_tokens}}},
                {"latency_ms", response.latency_ms}};
}

ChatResponse response_from_json(const json& doc) {
    ChatResponse response;
    response.text = doc.at("text").get<std::string>();
    response.finish_reason = doc.value("finish_reason", "");
    if (doc.contains("usage")) {
        response.usage.prompt_tokens = doc["usage"].value("prompt_tokens", std::int64_t{0});
        response.usage.completion_tokens = doc["usage"].value("completion_tokens", std::int64_t{0});
    }
    response.latency_ms = doc.value("latency_ms", 0.0);
    return response;
}

} // namespace personakit
