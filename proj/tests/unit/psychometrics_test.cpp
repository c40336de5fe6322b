#include "personakit/error.hpp"
#include "personakit/psychometrics.hpp"
#include "personakit/util.hpp"
#include "test_paths.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

namespace {

using namespace personakit;
using personakit::testing::data_dir;

// Recomputes means straight from the schema document, without InstrumentSchema.
std::map<std::string, double> oracle_groups(const json& doc, const std::map<std::string, int>& responses) {
    const int lo = doc["scale_min"];
    const int hi = doc["scale_max"];
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& item : doc["items"]) {
        int v = responses.at(item["item_id"].get<std::string>());
        if (item["reverse_keyed"].get<bool>()) {
            v = lo + hi - v;
        }
        auto& [sum, n] = acc[item["group_id"].get<std::string>()];
        sum += v;
        ++n;
    }
    std::map<std::string, double> out;
    for (const auto& [g, sn] : acc) {
        out[g] = sn.first / sn.second;
    }
    return out;
}

std::map<std::string, double> oracle_domains(const json& doc, const std::map<std::string, double>& groups) {
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& g : doc["groups"]) {
        if (g.contains("parent_domain")) {
            auto& [sum, n] = acc[g["parent_domain"].get<std::string>()];
            sum += groups.at(g["group_id"].get<std::string>());
            ++n;
        }
    }
    std::map<std::string, double> out;
    for (const auto& [d, sn] : acc) {
        out[d] = sn.first / sn.second;
    }
    return out;
}

ScaleResponseSet random_set(const json& doc, InstrumentId id, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> likert(1, 7);
    ScaleResponseSet set{id, {}};
    for (const auto& item : doc["items"]) {
        set.responses[item["item_id"].get<std::string>()] = likert(rng);
    }
    return set;
}

TEST(Schema, ShapeOfShippedInstruments) {
    const auto bfi = InstrumentSchema::load(data_dir() / "schemas" / "bfi2s.json");
    const auto pvq = InstrumentSchema::load(data_dir() / "schemas" / "pvq21.json");
    EXPECT_EQ(bfi.items().size(), 30u);
    EXPECT_EQ(bfi.groups().size(), 15u);
    EXPECT_EQ(bfi.domains().size(), 5u);
    for (const auto& g : bfi.groups()) {
        EXPECT_EQ(bfi.items_in_group(g.group_id).size(), 2u) << g.group_id;
    }
    EXPECT_EQ(pvq.items().size(), 21u);
    EXPECT_EQ(pvq.groups().size(), 10u);
    EXPECT_TRUE(pvq.domains().empty());
}

TEST(Score, MatchesOracleOnRandomSets) {
    for (const auto& [file, id] : {std::pair{"bfi2s.json", InstrumentId::bfi2s}, {"pvq21.json", InstrumentId::pvq21}}) {
        const json doc = read_json_file(data_dir() / "schemas" / file);
        const auto schema = InstrumentSchema::from_json(doc);
        std::mt19937_64 rng(99);
        for (int rep = 0; rep < 200; ++rep) {
            const auto set = random_set(doc, id, rng);
            const auto got = score(set, schema);
            const auto groups = oracle_groups(doc, set.responses);
            ASSERT_EQ(got.group_means.size(), groups.size());
            for (const auto& [g, m] : groups) {
                EXPECT_NEAR(got.group_means.at(g), m, 1e-12);
            }
            for (const auto& [d, m] : oracle_domains(doc, groups)) {
                EXPECT_NEAR(got.domain_means.at(d), m, 1e-12);
            }
        }
    }
}

TEST(Score, IncompleteAndOutOfRange) {
    const auto schema = InstrumentSchema::load(data_dir() / "schemas" / "pvq21.json");
    ScaleResponseSet set{InstrumentId::pvq21, {}};
    for (const auto& item : schema.items()) {
        set.responses[item.item_id] = 4;
    }
    set.responses.erase("pvq05");
    try {
        score(set, schema);
        FAIL() << "expected IncompleteResponses";
    } catch (const IncompleteResponses& e) {
        EXPECT_EQ(e.missing_items(), std::vector<std::string>{"pvq05"});
    }
    set.responses["pvq05"] = 8;
    EXPECT_THROW(score(set, schema), DomainError);
}

TEST(ReverseKey, InvolutionOnEveryLevel) {
    for (int v = 1; v <= 7; ++v) {
        EXPECT_EQ(apply_reverse_key(apply_reverse_key(v, true), true), v);
        EXPECT_EQ(apply_reverse_key(v, true), 8 - v);
        EXPECT_EQ(apply_reverse_key(v, false), v);
    }
    EXPECT_THROW(apply_reverse_key(0, true), DomainError);
}

TEST(Descriptor, CalibrationPoint) {
    EXPECT_EQ(level_phrase(3.0), "slightly below average");
    EXPECT_EQ(describe(3.0, "Extraversion").sentence, "Extraversion is slightly below average.");
}

TEST(Descriptor, TotalAndMonotoneOverSweep) {
    const std::vector<std::string_view> order{"extremely low",          "well below average", "slightly below average",
                                              "average",                "slightly above average",
                                              "well above average",     "extremely high"};
    std::size_t last = 0;
    std::set<std::string_view> seen;
    for (int i = 0; i <= 600; ++i) {
        const double s = 1.0 + i * 0.01;
        const auto phrase = level_phrase(s);
        EXPECT_EQ(phrase, level_phrase(s));
        const auto pos = std::find(order.begin(), order.end(), phrase) - order.begin();
        ASSERT_LT(static_cast<std::size_t>(pos), order.size());
        EXPECT_GE(static_cast<std::size_t>(pos), last);
        last = pos;
        seen.insert(phrase);
    }
    EXPECT_EQ(seen.size(), 7u);
    EXPECT_THROW(level_phrase(0.99), DomainError);
    EXPECT_THROW(level_phrase(NAN), DomainError);
}

TEST(Descriptor, ProfileSentenceOrder) {
    const auto schema = InstrumentSchema::load(data_dir() / "schemas" / "bfi2s.json");
    ScaleResponseSet set{InstrumentId::bfi2s, {}};
    for (const auto& item : schema.items()) {
        set.responses[item.item_id] = 4;
    }
    const auto d = describe_profile(score(set, schema), schema);
    ASSERT_EQ(d.size(), 20u);
    EXPECT_EQ(d[0].subject, schema.domains()[0].label);
    EXPECT_EQ(d[5].subject, schema.groups()[0].label);
    EXPECT_EQ(d[0].level_phrase, "average");
}

} // namespace
