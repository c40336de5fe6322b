#include "personakit/gateway.hpp"

#include "personakit/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace personakit {

void ProviderRouter::add_route(std::string prefix, std::shared_ptr<Provider> provider) {
    routes_.emplace_back(std::move(prefix), std::move(provider));
}

ChatResponse ProviderRouter::send(const ChatRequest& request) {
    const std::pair<std::string, std::shared_ptr<Provider>>* best = nullptr;
    for (const auto& route : routes_) {
        if (request.model_id.rfind(route.first, 0) == 0 && (best == nullptr || route.first.size() > best->first.size())) {
            best = &route;
        }
    }
    if (best == nullptr) {
        throw ConfigError("no provider route for model '" + request.model_id + "'");
    }
    return best->second->send(request);
}

std::optional<std::string> json_reply_problem(std::string_view text) {
    if (trim(text).empty()) {
        return "empty reply";
    }
    if (!extract_json_object(text)) {
        return "no JSON object found";
    }
    return std::nullopt;
}

ChatRequest json_repair_request(const ChatRequest& original, std::string_view reply, std::string_view problem) {
    ChatRequest repair = original;
    repair.user_turns.push_back("Your previous reply was not valid JSON (" + std::string(problem) +
                                "). Respond with valid JSON only, with no surrounding text.\n\nPrevious reply:\n" +
                                std::string(reply));
    return repair;
}

void parallel_for(std::size_t count, int parallelism, const std::function<void(std::size_t)>& task) {
    if (parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(parallelism), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                task(i);
            }
        });
    }
}

Gateway::Gateway(GatewayConfig config, std::shared_ptr<Cassette> cassette, std::shared_ptr<Provider> provider)
    : config_(config), cassette_(std::move(cassette)), provider_(std::move(provider)),
      in_flight_(std::clamp(config.max_in_flight, 1, 1024)) {
    if (config_.mode != GatewayMode::live && !cassette_) {
        throw ConfigError(std::string(to_string(config_.mode)) + " mode requires a cassette");
    }
    if (config_.mode != GatewayMode::replay && !provider_) {
        throw ConfigError(std::string(to_string(config_.mode)) + " mode requires a provider");
    }
}

GatewayStats Gateway::stats() const {
    std::lock_guard lock(stats_mutex_);
    return stats_;
}

int Gateway::reserve(const ChatRequest& request) {
    return cassette_ ? cassette_->reserve(request_hash(request)) : 0;
}

ChatResponse Gateway::call_provider(const ChatRequest& request) {
    const int attempts = std::max(1, config_.retry.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            in_flight_.acquire();
            struct Release {
                std::counting_semaphore<1024>& s;
                ~Release() { s.release(); }
            } release{in_flight_};
            {
                std::lock_guard lock(stats_mutex_);
                ++stats_.provider_calls;
            }
            const auto started = std::chrono::steady_clock::now();
            ChatResponse response = provider_->send(request);
            response.latency_ms =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
            return response;
        } catch (const TransportError&) {
            if (attempt >= attempts) {
                throw;
            }
        }
        const auto delay = config_.retry.initial_backoff * std::pow(config_.retry.multiplier, attempt - 1);
        std::this_thread::sleep_for(std::chrono::duration_cast<std::chrono::milliseconds>(delay));
    }
}

ChatResponse Gateway::fetch(const ChatRequest& request, int shot) {
    const std::string hash = request_hash(request);
    {
        std::lock_guard lock(stats_mutex_);
        ++stats_.completions;
    }
    if (config_.mode == GatewayMode::replay) {
        auto recorded = cassette_->lookup(hash, shot);
        if (!recorded) {
            const std::size_t available = cassette_->shot_count(hash);
            throw CassetteMiss(available == 0
                                   ? "cassette miss for request " + hash + ": " + canonical_string(request)
                                   : "cassette exhausted for request " + hash + ": shot " + std::to_string(shot) +
                                         " requested, " + std::to_string(available) + " recorded");
        }
        return *recorded;
    }
    ChatResponse response = call_provider(request);
    response.request_hash = hash;
    response.shot = shot;
    if (config_.mode == GatewayMode::record) {
        cassette_->append(request, response, shot);
    }
    return response;
}

ChatResponse Gateway::complete(const ChatRequest& request) {
    if (request.model_id.empty()) {
        throw ConfigError("request without model_id");
    }
    ChatResponse response = fetch(request, reserve(request));
    if (request.response_format != ResponseFormat::json_object) {
        return response;
    }
    const auto problem = json_reply_problem(response.text);
    if (!problem) {
        return response;
    }
    {
        std::lock_guard lock(stats_mutex_);
        ++stats_.json_repairs;
    }
    const ChatRequest repair = json_repair_request(request, response.text, *problem);
    ChatResponse repaired = fetch(repair, reserve(repair));
    if (const auto again = json_reply_problem(repaired.text)) {
        throw ContentError("JSON parse error after repair: " + *again);
    }
    return repaired;
}

namespace {

BatchResult failure_from(const std::exception_ptr& error) {
    BatchResult result;
    try {
        std::rethrow_exception(error);
    } catch (const CassetteMiss& e) {
        result.failure = FailureKind::cassette_miss;
        result.error = e.what();
    } catch (const TransportError& e) {
        result.failure = FailureKind::transport;
        result.error = e.what();
    } catch (const ContentError& e) {
        result.failure = FailureKind::content;
        result.error = e.what();
    } catch (const std::exception& e) {
        result.failure = FailureKind::other;
        result.error = e.what();
    }
    return result;
}

} // namespace

std::vector<BatchResult> Gateway::complete_batch(const std::vector<ChatRequest>& requests, int parallelism) {
    if (parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    std::vector<BatchResult> results(requests.size());
    std::vector<int> shots(requests.size());
    for (std::size_t i = 0; i < requests.size(); ++i) {
        if (requests[i].model_id.empty()) {
            results[i].failure = FailureKind::other;
            results[i].error = "request without model_id";
            continue;
        }
        shots[i] = reserve(requests[i]);
    }
    parallel_for(requests.size(), parallelism, [&](std::size_t i) {
        if (results[i].failure != FailureKind::none) {
            return;
        }
        try {
            results[i].response = fetch(requests[i], shots[i]);
        } catch (...) {
            results[i] = failure_from(std::current_exception());
        }
    });

    // Second stage: one repair turn for JSON-mode replies that did not parse.
    std::vector<std::size_t> to_repair;
    std::vector<ChatRequest> repairs;
    std::vector<int> repair_shots;
    for (std::size_t i = 0; i < requests.size(); ++i) {
        if (!results[i].ok() || requests[i].response_format != ResponseFormat::json_object) {
            continue;
        }
        if (const auto problem = json_reply_problem(results[i].response->text)) {
            to_repair.push_back(i);
            repairs.push_back(json_repair_request(requests[i], results[i].response->text, *problem));
            repair_shots.push_back(reserve(repairs.back()));
        }
    }
    if (!to_repair.empty()) {
        std::lock_guard lock(stats_mutex_);
        stats_.json_repairs += to_repair.size();
    }
    parallel_for(to_repair.size(), parallelism, [&](std::size_t k) {
        const std::size_t i = to_repair[k];
        try {
            ChatResponse repaired = fetch(repairs[k], repair_shots[k]);
            if (const auto again = json_reply_problem(repaired.text)) {
                throw ContentError("JSON parse error after repair: " + *again);
            }
            results[i].response = std::move(repaired);
        } catch (...) {
            results[i] = failure_from(std::current_exception());
        }
    });
    return results;
}

} // namespace personakit
