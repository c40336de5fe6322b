#include "personakit/error.hpp"
#include "personakit/gateway.hpp"
#include "test_paths.hpp"

#include <gtest/gtest.h>

#include <atomic>

namespace {

using namespace personakit;
using personakit::testing::scratch_dir;

// Echoes a counter so repeated identical requests get distinct replies.
class CountingProvider : public Provider {
public:
    ChatResponse send(const ChatRequest& request) override {
        const int n = calls++;
        if (fail_first > 0) {
            --fail_first;
            throw TransportError("simulated 503");
        }
        ChatResponse r;
        if (request.response_format == ResponseFormat::json_object) {
            r.text = (n == 0 && broken_json) ? "not json" : R"({"n":)" + std::to_string(n) + "}";
        } else {
            r.text = request.user_turns.back() + "#" + std::to_string(n);
        }
        r.finish_reason = "stop";
        return r;
    }
    std::atomic<int> calls{0};
    std::atomic<int> fail_first{0};
    bool broken_json = false;
};

ChatRequest req(const std::string& text) {
    ChatRequest r;
    r.model_id = "test-model";
    r.system = "system";
    r.user_turns = {text};
    return r;
}

GatewayConfig config(GatewayMode mode) {
    GatewayConfig c;
    c.mode = mode;
    c.retry.initial_backoff = std::chrono::milliseconds(1);
    return c;
}

TEST(RequestHash, CanonicalAndSensitive) {
    const auto a = req("hello");
    auto b = a;
    EXPECT_EQ(request_hash(a), request_hash(b));
    EXPECT_EQ(request_hash(a).size(), 64u);
    b.temperature = 0.0;
    EXPECT_NE(request_hash(a), request_hash(b));
    b = a;
    b.response_format = ResponseFormat::json_object;
    EXPECT_NE(request_hash(a), request_hash(b));
    EXPECT_EQ(request_from_json(canonical_json(a)), a);
}

TEST(Cassette, RecordThenReplayInShotOrder) {
    const auto dir = scratch_dir("gateway_record");
    const auto path = dir / "c.jsonl";
    auto provider = std::make_shared<CountingProvider>();
    {
        Gateway g(config(GatewayMode::record), std::shared_ptr<Cassette>(Cassette::open(path, true)), provider);
        EXPECT_EQ(g.complete(req("x")).text, "x#0");
        EXPECT_EQ(g.complete(req("x")).text, "x#1");
        EXPECT_EQ(g.complete(req("y")).text, "y#2");
    }
    Gateway replay(config(GatewayMode::replay), std::shared_ptr<Cassette>(Cassette::open(path, false)));
    EXPECT_EQ(replay.complete(req("x")).text, "x#0");
    EXPECT_EQ(replay.complete(req("y")).text, "y#2");
    const auto second = replay.complete(req("x"));
    EXPECT_EQ(second.text, "x#1");
    EXPECT_EQ(second.shot, 1);
    EXPECT_THROW(replay.complete(req("x")), CassetteMiss);
    EXPECT_THROW(replay.complete(req("never recorded")), CassetteMiss);
    EXPECT_EQ(provider->calls, 3);
}

TEST(Cassette, DigestIgnoresLineOrder) {
    const auto dir = scratch_dir("gateway_digest");
    Cassette a;
    Cassette b;
    ChatResponse r1{"one", "stop", {}, 0.0, "", 0};
    ChatResponse r2{"two", "stop", {}, 0.0, "", 0};
    a.append(req("1"), r1, 0);
    a.append(req("2"), r2, 0);
    b.append(req("2"), r2, 0);
    b.append(req("1"), r1, 0);
    EXPECT_EQ(a.digest(), b.digest());
    EXPECT_EQ(a.size(), 2u);
}

TEST(Gateway, BatchShotsFollowIndexOrder) {
    const auto dir = scratch_dir("gateway_batch");
    const auto path = dir / "c.jsonl";
    std::vector<ChatRequest> requests;
    for (int i = 0; i < 12; ++i) {
        requests.push_back(req(i % 3 == 0 ? "same" : "r" + std::to_string(i)));
    }
    {
        Gateway g(config(GatewayMode::record), std::shared_ptr<Cassette>(Cassette::open(path, true)),
                  std::make_shared<CountingProvider>());
        g.complete_batch(requests, 1);
    }
    std::vector<std::string> baseline;
    for (const int parallelism : {1, 8}) {
        Gateway g(config(GatewayMode::replay), std::shared_ptr<Cassette>(Cassette::open(path, false)));
        const auto results = g.complete_batch(requests, parallelism);
        std::vector<std::string> texts;
        for (const auto& r : results) {
            ASSERT_TRUE(r.ok()) << r.error;
            texts.push_back(r.response->text);
        }
        if (baseline.empty()) {
            baseline = texts;
        }
        EXPECT_EQ(texts, baseline);
    }
    EXPECT_EQ(baseline[0], "same#0");
    EXPECT_EQ(baseline[3], "same#3");
}

TEST(Gateway, BatchFailureIsIsolated) {
    Gateway g(config(GatewayMode::replay), std::make_shared<Cassette>());
    const auto results = g.complete_batch({req("a"), req("b")}, 2);
    ASSERT_EQ(results.size(), 2u);
    EXPECT_EQ(results[0].failure, FailureKind::cassette_miss);
    EXPECT_EQ(results[1].failure, FailureKind::cassette_miss);
}

TEST(Gateway, RetriesTransportErrors) {
    auto provider = std::make_shared<CountingProvider>();
    provider->fail_first = 2;
    Gateway g(config(GatewayMode::live), nullptr, provider);
    EXPECT_EQ(g.complete(req("z")).text, "z#2");
    provider->fail_first = 3;
    EXPECT_THROW(g.complete(req("z")), TransportError);
}

TEST(Gateway, RepairsInvalidJsonOnce) {
    auto provider = std::make_shared<CountingProvider>();
    provider->broken_json = true;
    Gateway g(config(GatewayMode::live), nullptr, provider);
    auto r = req("give json");
    r.response_format = ResponseFormat::json_object;
    EXPECT_EQ(g.complete(r).text, R"({"n":1})");
    EXPECT_EQ(g.stats().json_repairs, 1u);
}

TEST(Gateway, JsonProblemDetection) {
    EXPECT_FALSE(json_reply_problem(R"({"a":1})").has_value());
    EXPECT_FALSE(json_reply_problem("```json\n{\"a\":1}\n```").has_value());
    EXPECT_TRUE(json_reply_problem("sure!").has_value());
    EXPECT_TRUE(json_reply_problem("[1,2]").has_value());
}

TEST(Gateway, ParallelForCoversEveryIndex) {
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 8, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) {
        EXPECT_EQ(h.load(), 1);
    }
}

} // namespace
