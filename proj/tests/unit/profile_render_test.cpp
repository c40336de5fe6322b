#include "personakit/condition.hpp"
#include "personakit/error.hpp"
#include "personakit/profile.hpp"
#include "personakit/render.hpp"
#include "test_paths.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>

namespace {

using namespace personakit;
using personakit::testing::data_dir;
using personakit::testing::fixture_dir;

struct Env {
    SchemaSet schemas = SchemaSet::load(data_dir() / "schemas");
    TemplateSet templates = TemplateSet::load(data_dir() / "templates");
    Profile sheldon = load_profile(fixture_dir() / "profiles" / "tbbt-01.json");
};

const Env& env() {
    static const Env e;
    return e;
}

TEST(Condition, RoundTripAndMembership) {
    EXPECT_EQ(all_conditions().size(), 7u);
    for (const auto c : all_conditions()) {
        EXPECT_EQ(parse_condition(to_string(c)), c);
        const std::string name(to_string(c));
        EXPECT_EQ(includes(c, Component::social), name.find('S') != std::string::npos);
        EXPECT_EQ(includes(c, Component::personal), name.find('P') != std::string::npos);
        EXPECT_EQ(includes(c, Component::context), name.find('C') != std::string::npos);
    }
    EXPECT_THROW(parse_condition("CS"), ConfigError);
    EXPECT_THROW(parse_condition(""), ConfigError);
}

TEST(Render, InclusionExclusionMatrix) {
    const auto& e = env();
    for (const auto c : all_conditions()) {
        const auto r = render_condition(e.sheldon, c, e.templates, e.schemas.demographics);
        const bool s = includes(c, Component::social);
        const bool p = includes(c, Component::personal);
        const bool x = includes(c, Component::context);
        EXPECT_EQ(r.has_section(section::demographics), s) << to_string(c);
        EXPECT_EQ(r.has_section(section::personality), p) << to_string(c);
        EXPECT_EQ(r.has_section(section::values), p) << to_string(c);
        EXPECT_EQ(r.has_section(section::weekly), x) << to_string(c);
        EXPECT_EQ(r.has_section(section::loves), x) << to_string(c);
        EXPECT_EQ(r.has_section(section::hates), x) << to_string(c);
        const std::string text = r.profile_text();
        EXPECT_EQ(text.find(e.sheldon.context.weekday_essay) != std::string::npos, x);
        EXPECT_EQ(text.find(e.sheldon.personal_narrative->personality_everyday) != std::string::npos, p);
        EXPECT_EQ(text.find("Theoretical physicist") != std::string::npos, s);
    }
}

TEST(Render, SpcIsUnionOfSingletons) {
    const auto& e = env();
    std::set<std::string> singles;
    for (const auto c : {Condition::S, Condition::P, Condition::C}) {
        for (const auto& l : render_condition(e.sheldon, c, e.templates, e.schemas.demographics).section_labels()) {
            singles.insert(l);
        }
    }
    const auto spc = render_condition(e.sheldon, Condition::SPC, e.templates, e.schemas.demographics).section_labels();
    EXPECT_EQ(std::set<std::string>(spc.begin(), spc.end()), singles);
}

TEST(Render, ContextCopiedVerbatim) {
    const auto& e = env();
    const auto r = render_condition(e.sheldon, Condition::C, e.templates, e.schemas.demographics);
    const std::string text = r.profile_text();
    EXPECT_NE(text.find(e.sheldon.context.weekday_essay), std::string::npos);
    EXPECT_NE(text.find(e.sheldon.context.weekend_essay), std::string::npos);
    for (const auto& item : e.sheldon.context.loves) {
        EXPECT_NE(text.find(item), std::string::npos);
    }
    for (const auto& item : e.sheldon.context.hates) {
        EXPECT_NE(text.find(item), std::string::npos);
    }
}

TEST(Render, PersonalNeedsNarrative) {
    const auto& e = env();
    Profile raw = e.sheldon;
    raw.personal_narrative.reset();
    EXPECT_THROW(render_condition(raw, Condition::P, e.templates, e.schemas.demographics), PreconditionError);
    EXPECT_NO_THROW(render_condition(raw, Condition::SC, e.templates, e.schemas.demographics));
}

TEST(Profile, SerializationRoundTrip) {
    const auto& e = env();
    const std::string text = serialize_profile(e.sheldon);
    EXPECT_EQ(profile_from_json(json::parse(text)), e.sheldon);
    EXPECT_EQ(serialize_profile(profile_from_json(json::parse(text))), text);
}

TEST(Profile, ShippedFixturesValidate) {
    const auto& e = env();
    for (const auto* id : {"tbbt-01", "tbbt-02", "mf-32"}) {
        const auto p = load_profile(fixture_dir() / "profiles" / (std::string(id) + ".json"));
        const auto report = validate_profile(p, e.schemas);
        EXPECT_TRUE(report.ok()) << report.to_text();
        EXPECT_EQ(report.warning_count(), 0u) << report.to_text();
    }
}

TEST(Profile, ValidationFindsProblems) {
    const auto& e = env();
    Profile p = e.sheldon;
    p.social.answers["sex"] = "Robot";
    p.social.answers.erase("age");
    p.context.loves.pop_back();
    p.personal_raw.bfi_responses.responses.erase("bfi03");
    const auto report = validate_profile(p, e.schemas);
    EXPECT_FALSE(report.ok());
    const auto has = [&](const std::string& path) {
        return std::any_of(report.violations.begin(), report.violations.end(),
                           [&](const Violation& v) { return v.path == path; });
    };
    EXPECT_TRUE(has("social.sex"));
    EXPECT_TRUE(has("social.age"));
    EXPECT_TRUE(has("context.loves"));
    EXPECT_TRUE(has("personal.bfi.bfi03"));
}

TEST(Profile, HumanNameLeakIsAnError) {
    const auto& e = env();
    Profile p = e.sheldon;
    p.provenance = Provenance::human;
    p.display_name.reset();
    p.name_tokens = {"Sheldon"};
    p.context.weekend_essay += " Sheldon likes trains.";
    const auto report = validate_profile(p, e.schemas.demographics);
    EXPECT_FALSE(report.ok());
}

TEST(Profile, ConditionalItemsMayBeAbsent) {
    const auto penny = load_profile(fixture_dir() / "profiles" / "tbbt-02.json");
    EXPECT_FALSE(penny.social.answers.contains("major"));
    EXPECT_TRUE(validate_profile(penny, env().schemas.demographics).ok());
}

} // namespace
