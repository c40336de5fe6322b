#include "personakit/condition_report.hpp"

#include <gtest/gtest.h>

#include <algorithm>

namespace {

using namespace personakit::stats;

const std::vector<std::string> kGroups{"S", "P", "C", "SP", "SC", "PC", "SPC"};

void add(std::vector<Outcome>& out, const std::string& group, const std::string& model, int correct, int wrong,
         int abstain = 0) {
    for (int i = 0; i < correct; ++i) {
        out.push_back({group, model, true});
    }
    for (int i = 0; i < wrong; ++i) {
        out.push_back({group, model, false});
    }
    for (int i = 0; i < abstain; ++i) {
        out.push_back({group, model, std::nullopt});
    }
}

const PairwiseComparison& pair(const ConditionReport& r, const std::string& a, const std::string& b) {
    const auto it = std::find_if(r.pairwise.begin(), r.pairwise.end(),
                                 [&](const PairwiseComparison& p) { return p.a == a && p.b == b; });
    EXPECT_NE(it, r.pairwise.end());
    return *it;
}

TEST(ConditionReport, SingleModelHasNoPooledScope) {
    std::vector<Outcome> o;
    add(o, "C", "m1", 9, 1);
    add(o, "P", "m1", 2, 8);
    const auto reports = condition_report(o, kGroups);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].scope, "m1");
}

TEST(ConditionReport, AbstainsExcludedFromDenominator) {
    std::vector<Outcome> o;
    add(o, "C", "m", 9, 1, 3);
    add(o, "P", "m", 2, 8);
    const auto r = condition_report_scope(o, kGroups, "m");
    const auto& c = r.groups[2];
    EXPECT_EQ(c.label, "C");
    EXPECT_EQ(c.n, 10u);
    EXPECT_EQ(c.excluded, 3u);
    EXPECT_DOUBLE_EQ(*c.accuracy, 0.9);
}

TEST(ConditionReport, EmptyGroupsSkippedWithReason) {
    std::vector<Outcome> o;
    add(o, "C", "m", 9, 1);
    add(o, "P", "m", 2, 8);
    const auto r = condition_report_scope(o, kGroups, "m");
    EXPECT_EQ(r.pairwise.size(), 21u);
    std::size_t tested = 0;
    for (const auto& p : r.pairwise) {
        if (p.test) {
            ++tested;
        } else {
            EXPECT_FALSE(p.skipped.empty());
        }
    }
    EXPECT_EQ(tested, 1u);
    ASSERT_TRUE(r.omnibus.has_value());
    EXPECT_EQ(r.omnibus->df, 1);
}

TEST(ConditionReport, PooledAcrossModels) {
    std::vector<Outcome> o;
    add(o, "C", "a", 5, 0);
    add(o, "C", "b", 3, 2);
    add(o, "P", "a", 1, 4);
    add(o, "P", "b", 0, 5);
    const auto reports = condition_report(o, kGroups);
    ASSERT_EQ(reports.size(), 3u);
    EXPECT_EQ(reports.back().scope, "pooled");
    EXPECT_EQ(reports.back().groups[2].correct, 8u);
    EXPECT_EQ(reports.back().groups[2].n, 10u);
}

TEST(ConditionReport, OrderingAndDirection) {
    std::vector<Outcome> o;
    add(o, "S", "m", 5, 5);
    add(o, "P", "m", 2, 8);
    add(o, "C", "m", 9, 1);
    const auto r = condition_report_scope(o, kGroups, "m");
    const auto& pc = pair(r, "P", "C");
    EXPECT_EQ(pc.direction, 1);
    ASSERT_TRUE(pc.adjusted_p.has_value());
    EXPECT_GE(*pc.adjusted_p, *pc.raw_p);
    EXPECT_NE(std::find(r.ordering.begin(), r.ordering.end(), "P < C"), r.ordering.end());
    const auto& sp = pair(r, "S", "P");
    EXPECT_EQ(sp.direction, -1);
}

TEST(ConditionReport, CsvHeaders) {
    std::vector<Outcome> o;
    add(o, "C", "m", 9, 1);
    add(o, "P", "m", 2, 8);
    const auto reports = condition_report(o, kGroups);
    const std::string csv = accuracy_csv(reports);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "scope,condition,n,correct,excluded,accuracy");
    EXPECT_NE(csv.find("m,C,10,9,0,0.9"), std::string::npos);
    EXPECT_FALSE(pairwise_csv(reports).empty());
    EXPECT_EQ(to_json(reports[0])["scope"], "m");
}

} // namespace
