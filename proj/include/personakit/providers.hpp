#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "personakit/gateway.hpp"

namespace personakit {

struct HttpEndpoint {
    std::string host;         // scheme + host, e.g. https://api.openai.com
    std::string path;         // e.g. /v1/chat/completions
    std::string api_key_env;  // environment variable holding the key
    std::chrono::seconds timeout{120};
};

// OpenAI-style chat completions.
class OpenAIProvider : public Provider {
public:
    explicit OpenAIProvider(HttpEndpoint endpoint = {"https://api.openai.com", "/v1/chat/completions",
                                                     "OPENAI_API_KEY"});
    ChatResponse send(const ChatRequest& request) override;

    static json request_body(const ChatRequest& request);
    static ChatResponse parse_response(const json& body);

private:
    HttpEndpoint endpoint_;
};

// Anthropic messages API. Consecutive user turns are sent as one message.
class AnthropicProvider : public Provider {
public:
    explicit AnthropicProvider(HttpEndpoint endpoint = {"https://api.anthropic.com", "/v1/messages",
                                                        "ANTHROPIC_API_KEY"});
    ChatResponse send(const ChatRequest& request) override;

    static json request_body(const ChatRequest& request);
    static ChatResponse parse_response(const json& body);

private:
    HttpEndpoint endpoint_;
};

// "gpt-", "o1", "o3", "o4" -> OpenAI; "claude-" -> Anthropic.
std::shared_ptr<ProviderRouter> default_provider_router();

} // namespace personakit
