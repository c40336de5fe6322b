#pragma once

#include <optional>
#include <string>
#include <vector>

#include "personakit/stats.hpp"
#include "personakit/util.hpp"

namespace personakit::stats {

// One scored trial: a Guess Who verdict or a TST judgment. nullopt outcomes
// (abstains, failures) are counted but never enter a test.
struct Outcome {
    std::string group; // condition label
    std::string model;
    std::optional<bool> correct;
};

struct GroupSummary {
    std::string label;
    std::size_t n = 0; // scored outcomes
    std::size_t correct = 0;
    std::size_t excluded = 0;
    std::optional<double> accuracy;
};

struct PairwiseComparison {
    std::string a;
    std::string b;
    std::optional<TestResult> test;
    std::optional<double> raw_p;
    std::optional<double> adjusted_p;
    int direction = 0; // sign of accuracy(b) - accuracy(a)
    std::string skipped;
};

struct ConditionReport {
    std::string scope; // a model id, or "pooled"
    std::vector<GroupSummary> groups;
    std::optional<TestResult> omnibus;
    std::string omnibus_skipped;
    std::vector<PairwiseComparison> pairwise;
    std::vector<std::string> ordering; // "P < C" for each significant pair
};

struct ReportOptions {
    double alpha = 0.05;
    bool continuity_correction = false;
};

// Accuracy per group, a groups x {correct, incorrect} chi-squared test, every
// pairwise 2x2 test with BH adjustment over the testable pairs, and the pairs
// that stay significant. Empty groups are reported with n = 0 and left out of
// the tests. One report per model, plus a pooled one when several models are
// present. `group_order` fixes the row order and the pair enumeration.
std::vector<ConditionReport> condition_report(const std::vector<Outcome>& outcomes,
                                              const std::vector<std::string>& group_order,
                                              const ReportOptions& options = {});

ConditionReport condition_report_scope(const std::vector<Outcome>& outcomes, const std::vector<std::string>& group_order,
                                       const std::string& scope, const ReportOptions& options = {});

json to_json(const ConditionReport& report);
std::string accuracy_csv(const std::vector<ConditionReport>& reports);
std::string pairwise_csv(const std::vector<ConditionReport>& reports);

} // namespace personakit::stats
