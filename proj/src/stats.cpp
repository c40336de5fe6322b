#include "personakit/stats.hpp"

#include "personakit/error.hpp"
#include "personakit/util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace personakit::stats {

double chi_squared_upper_tail(double statistic, int df) {
    if (df < 1) {
        throw DomainError("chi-squared df must be >= 1");
    }
    if (statistic <= 0.0) {
        return 1.0;
    }
    return boost::math::gamma_q(df / 2.0, statistic / 2.0);
}

TestResult chi_squared(const ContingencyTable& table, bool continuity_correction) {
    const std::size_t rows = table.counts.size();
    if (rows < 2) {
        throw InvalidTable("contingency table needs at least 2 rows");
    }
    const std::size_t cols = table.counts.front().size();
    if (cols < 2) {
        throw InvalidTable("contingency table needs at least 2 columns");
    }
    std::vector<double> row_sum(rows, 0.0);
    std::vector<double> col_sum(cols, 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (table.counts[r].size() != cols) {
            throw InvalidTable("ragged contingency table");
        }
        for (std::size_t c = 0; c < cols; ++c) {
            const long long count = table.counts[r][c];
            if (count < 0) {
                throw InvalidTable("negative count");
            }
            row_sum[r] += static_cast<double>(count);
            col_sum[c] += static_cast<double>(count);
            total += static_cast<double>(count);
        }
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_sum[r] == 0.0) {
            throw InvalidTable("all-zero row " + (r < table.row_labels.size() ? table.row_labels[r] : std::to_string(r)));
        }
    }
    for (std::size_t c = 0; c < cols; ++c) {
        if (col_sum[c] == 0.0) {
            throw InvalidTable("all-zero column " +
                               (c < table.col_labels.size() ? table.col_labels[c] : std::to_string(c)));
        }
    }
    const bool yates = continuity_correction && rows == 2 && cols == 2;
    double statistic = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double expected = row_sum[r] * col_sum[c] / total;
            double diff = std::abs(static_cast<double>(table.counts[r][c]) - expected);
            if (yates) {
                diff = std::max(0.0, diff - 0.5);
            }
            statistic += diff * diff / expected;
        }
    }
    TestResult result;
    result.statistic = statistic;
    result.df = static_cast<int>((rows - 1) * (cols - 1));
    result.p_value = chi_squared_upper_tail(statistic, result.df);
    return result;
}

std::vector<double> bh_adjust(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (const double p : p_values) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw DomainError("p-value outside [0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });

    std::vector<double> adjusted(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double rank = static_cast<double>(k + 1);
        // m / rank >= 1, so rounding can never pull an adjusted value below its raw p.
        running = std::min(running, p_values[order[k]] * (static_cast<double>(m) / rank));
        adjusted[order[k]] = std::min(running, 1.0);
    }
    return adjusted;
}

std::vector<double> average_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
            ++j;
        }
        // Positions i..j (0-based) hold ranks i+1..j+1.
        const double shared = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) {
            ranks[order[k]] = shared;
        }
        i = j + 1;
    }
    return ranks;
}

namespace {

void check_pair(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw DomainError("correlation inputs differ in length");
    }
    if (xs.size() < 3) {
        throw DomainError("correlation needs at least 3 pairs");
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) {
            throw DomainError("correlation inputs must be finite");
        }
    }
}

} // namespace

double mean(std::span<const double> values) {
    if (values.empty()) {
        throw DomainError("mean of empty sequence");
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double ss = 0.0;
    for (const double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double pearson_r(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const double mx = mean(xs);
    const double my = mean(ys);
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedCorrelation("zero variance");
    }
    // sqrt(sxx * syy) rather than sqrt(sxx) * sqrt(syy): with xs == ys the
    // former is exactly sxx, so r(x, x) is exactly 1.
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double student_t_two_sided_p(double t, double df) {
    if (df <= 0.0) {
        throw DomainError("t df must be positive");
    }
    if (!std::isfinite(t)) {
        return 0.0;
    }
    // P(|T| > t) = I_{df/(df+t^2)}(df/2, 1/2)
    return boost::math::ibeta(df / 2.0, 0.5, df / (df + t * t));
}

TestResult spearman_rho(std::span<const double> xs, std::span<const double> ys) {
    check_pair(xs, ys);
    const auto rx = average_ranks(xs);
    const auto ry = average_ranks(ys);
    const double rho = pearson_r(rx, ry);
    const std::size_t n = xs.size();
    TestResult result;
    result.statistic = rho;
    result.df = static_cast<int>(n - 2);
    if (std::abs(rho) >= 1.0) {
        result.p_value = 0.0;
    } else {
        const double t = rho * std::sqrt(static_cast<double>(n - 2) / (1.0 - rho * rho));
        result.p_value = student_t_two_sided_p(t, static_cast<double>(n - 2));
    }
    result.approximate = n < 10;
    return result;
}

AccuracyResult accuracy(const std::vector<std::pair<std::optional<std::string>, std::string>>& pairs) {
    AccuracyResult result;
    for (const auto& [predicted, golden] : pairs) {
        if (!predicted) {
            ++result.missing;
            continue;
        }
        ++result.total;
        if (to_lower(trim(*predicted)) == to_lower(trim(golden))) {
            ++result.matches;
        }
    }
    if (result.total == 0) {
        throw UndefinedCorrelation("accuracy undefined: every prediction is missing");
    }
    result.accuracy = static_cast<double>(result.matches) / static_cast<double>(result.total);
    return result;
}

AccuracyResult accuracy(const std::vector<std::optional<bool>>& outcomes) {
    AccuracyResult result;
    for (const auto& outcome : outcomes) {
        if (!outcome) {
            ++result.missing;
            continue;
        }
        ++result.total;
        if (*outcome) {
            ++result.matches;
        }
    }
    if (result.total == 0) {
        throw UndefinedCorrelation("accuracy undefined: no scored outcomes");
    }
    result.accuracy = static_cast<double>(result.matches) / static_cast<double>(result.total);
    return result;
}

} // namespace personakit::stats
