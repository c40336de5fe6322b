#include <httplib.h>

#include "personakit/providers.hpp"

#include "personakit/error.hpp"

#include <cstdlib>

namespace personakit {

namespace {

std::string api_key(const std::string& env) {
    const char* value = std::getenv(env.c_str());
    if (value == nullptr || *value == '\0') {
        throw ConfigError("environment variable " + env + " is not set");
    }
    return value;
}

json post(const HttpEndpoint& endpoint, const httplib::Headers& headers, const json& body) {
    httplib::Client client(endpoint.host);
    client.set_connection_timeout(std::chrono::seconds(30));
    client.set_read_timeout(endpoint.timeout);
    const auto result = client.Post(endpoint.path, headers, body.dump(), "application/json");
    if (!result) {
        throw TransportError(endpoint.host + ": " + httplib::to_string(result.error()));
    }
    if (result->status == 429 || result->status >= 500) {
        throw TransportError(endpoint.host + ": HTTP " + std::to_string(result->status));
    }
    if (result->status != 200) {
        // Body may echo the request but never the key, which travels in headers.
        throw Error(endpoint.host + ": HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 500));
    }
    auto parsed = json::parse(result->body, nullptr, false);
    if (parsed.is_discarded()) {
        throw TransportError(endpoint.host + ": unparseable response body");
    }
    return parsed;
}

} // namespace

OpenAIProvider::OpenAIProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

json OpenAIProvider::request_body(const ChatRequest& request) {
    json messages = json::array();
    if (!request.system.empty()) {
        messages.push_back({{"role", "system"}, {"content", request.system}});
    }
    for (const auto& turn : request.user_turns) {
        messages.push_back({{"role", "user"}, {"content", turn}});
    }
    json body = {{"model", request.model_id}, {"messages", messages}, {"max_tokens", request.max_tokens}};
    if (request.temperature) {
        body["temperature"] = *request.temperature;
    }
    if (request.response_format == ResponseFormat::json_object) {
        body["response_format"] = {{"type", "json_object"}};
    }
    return body;
}

ChatResponse OpenAIProvider::parse_response(const json& body) {
    try {
        ChatResponse response;
        const auto& choice = body.at("choices").at(0);
        const auto& content = choice.at("message").at("content");
        response.text = content.is_null() ? "" : content.get<std::string>();
        response.finish_reason = choice.value("finish_reason", "");
        if (body.contains("usage")) {
            response.usage.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
            response.usage.completion_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
        }
        return response;
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed chat completion: ") + e.what());
    }
}

ChatResponse OpenAIProvider::send(const ChatRequest& request) {
    const httplib::Headers headers = {{"Authorization", "Bearer " + api_key(endpoint_.api_key_env)}};
    return parse_response(post(endpoint_, headers, request_body(request)));
}

AnthropicProvider::AnthropicProvider(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {}

json AnthropicProvider::request_body(const ChatRequest& request) {
    json body = {{"model", request.model_id},
                 {"max_tokens", request.max_tokens},
                 {"messages", json::array({{{"role", "user"}, {"content", join(request.user_turns, "\n\n")}}})}};
    if (!request.system.empty()) {
        body["system"] = request.system;
    }
    if (request.temperature) {
        body["temperature"] = *request.temperature;
    }
    return body;
}

ChatResponse AnthropicProvider::parse_response(const json& body) {
    try {
        ChatResponse response;
        for (const auto& block : body.at("content")) {
            if (block.value("type", "") == "text") {
                response.text += block.at("text").get<std::string>();
            }
        }
        response.finish_reason = body.value("stop_reason", "");
        if (body.contains("usage")) {
            response.usage.prompt_tokens = body["usage"].value("input_tokens", std::int64_t{0});
            response.usage.completion_tokens = body["usage"].value("output_tokens", std::int64_t{0});
        }
        return response;
    } catch (const json::exception& e) {
        throw TransportError(std::string("malformed messages response: ") + e.what());
    }
}

ChatResponse AnthropicProvider::send(const ChatRequest& request) {
    const httplib::Headers headers = {{"x-api-key", api_key(endpoint_.api_key_env)},
                                      {"anthropic-version", "2023-06-01"}};
    return parse_response(post(endpoint_, headers, request_body(request)));
}

std::shared_ptr<ProviderRouter> default_provider_router() {
    auto router = std::make_shared<ProviderRouter>();
    auto openai = std::make_shared<OpenAIProvider>();
    for (const char* prefix : {"gpt-", "o1", "o3", "o4"}) {
        router->add_route(prefix, openai);
    }
    router->add_route("claude-", std::make_shared<AnthropicProvider>());
    return router;
}

} // namespace personakit
