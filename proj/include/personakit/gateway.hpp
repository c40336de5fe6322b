#pragma once

#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <semaphore>
#include <string>
#include <vector>

#include "personakit/cassette.hpp"
#include "personakit/chat.hpp"

namespace personakit {

// One chat-completion backend. Throws TransportError for failures worth
// retrying (network, 429, 5xx) and Error for everything else.
class Provider {
public:
    virtual ~Provider() = default;
    virtual ChatResponse send(const ChatRequest& request) = 0;
};

// Routes by model-id prefix; the longest matching prefix wins.
class ProviderRouter : public Provider {
public:
    void add_route(std::string prefix, std::shared_ptr<Provider> provider);
    ChatResponse send(const ChatRequest& request) override;

private:
    std::vector<std::pair<std::string, std::shared_ptr<Provider>>> routes_;
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{500};
    double multiplier = 2.0;
};

struct GatewayConfig {
    GatewayMode mode = GatewayMode::replay;
    int max_in_flight = 4;
    RetryPolicy retry;
};

enum class FailureKind { none, cassette_miss, transport, content, other };

struct BatchResult {
    std::optional<ChatResponse> response;
    FailureKind failure = FailureKind::none;
    std::string error;

    bool ok() const { return response.has_value(); }
};

struct GatewayStats {
    std::size_t completions = 0;
    std::size_t provider_calls = 0;
    std::size_t json_repairs = 0;
};

// Provider-agnostic completion service with record/replay. JSON-mode replies
// are validated; an invalid reply gets one repair turn, then ContentError.
//
// Replay never touches the provider. In replay, outputs depend only on the
// requests and the cassette: complete_batch reserves cassette shots in index
// order before dispatching, so the worker count cannot change which shot a
// request receives.
class Gateway {
public:
    Gateway(GatewayConfig config, std::shared_ptr<Cassette> cassette, std::shared_ptr<Provider> provider = nullptr);

    ChatResponse complete(const ChatRequest& request);

    // Results aligned with `requests`; a failing element does not stop the
    // others.
    std::vector<BatchResult> complete_batch(const std::vector<ChatRequest>& requests, int parallelism);

    GatewayMode mode() const { return config_.mode; }
    const std::shared_ptr<Cassette>& cassette() const { return cassette_; }
    GatewayStats stats() const;

private:
    int reserve(const ChatRequest& request);
    ChatResponse fetch(const ChatRequest& request, int shot);
    ChatResponse call_provider(const ChatRequest& request);

    GatewayConfig config_;
    std::shared_ptr<Cassette> cassette_;
    std::shared_ptr<Provider> provider_;
    std::counting_semaphore<1024> in_flight_;
    mutable std::mutex stats_mutex_;
    GatewayStats stats_;
};

// Non-empty description of what is wrong with a JSON-mode reply, or nullopt.
std::optional<std::string> json_reply_problem(std::string_view text);
ChatRequest json_repair_request(const ChatRequest& original, std::string_view reply, std::string_view problem);

// Runs `task(i)` for i in [0, count) on up to `parallelism` threads.
void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& task);

} // namespace personakit
