#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace personakit::stats {

struct TestResult {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    // Set when the p-value comes from an approximation outside its comfort
    // zone (Spearman t-approximation with n < 10).
    bool approximate = false;
};

struct ContingencyTable {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<long long>> counts;
};

// Pearson chi-squared test of independence. Expected counts come from the
// margins; df = (r-1)(c-1); p is the chi-squared upper tail, computed with
// the regularized upper incomplete gamma Q(df/2, x/2) from Boost.Math.
// Yates' correction applies to 2x2 tables only. Throws InvalidTable for
// tables smaller than 2x2, negative counts, or an all-zero row/column.
TestResult chi_squared(const ContingencyTable& table, bool continuity_correction = false);

// Benjamini-Hochberg step-up adjustment, returned in input order:
// sort ascending, q(i) = min_{j >= i} m p(j) / j, capped at 1.
std::vector<double> bh_adjust(std::span<const double> p_values);

// Ranks starting at 1; ties share the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> values);

// Pearson product-moment coefficient, clamped to [-1, 1]. Throws
// UndefinedCorrelation when either input has zero variance, DomainError for
// mismatched lengths or n < 3.
double pearson_r(std::span<const double> xs, std::span<const double> ys);

// Pearson correlation of average ranks; p from the t-approximation with
// df = n - 2.
TestResult spearman_rho(std::span<const double> xs, std::span<const double> ys);

// Two-sided p for Student's t with `df` degrees of freedom.
double student_t_two_sided_p(double t, double df);
double chi_squared_upper_tail(double statistic, int df);

struct AccuracyResult {
    double accuracy = 0.0;
    std::size_t matches = 0;
    std::size_t total = 0;   // scored pairs, missing excluded
    std::size_t missing = 0; // predictions that were absent
};

// matches / scored pairs; missing predictions are excluded and counted.
// Throws UndefinedCorrelation when nothing is left to score.
AccuracyResult accuracy(const std::vector<std::pair<std::optional<std::string>, std::string>>& pairs);

// Same rule for outcomes that are already judged: nullopt is excluded.
AccuracyResult accuracy(const std::vector<std::optional<bool>>& outcomes);

double mean(std::span<const double> values);
// Sample standard deviation (n - 1); 0 for fewer than two values.
double sample_sd(std::span<const double> values);

} // namespace personakit::stats
