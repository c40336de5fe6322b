#include "personakit/error.hpp"
#include "personakit/stats.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

namespace {

using namespace personakit;
using namespace personakit::stats;

ContingencyTable table(std::vector<std::vector<long long>> counts) {
    ContingencyTable t;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        t.row_labels.push_back("r" + std::to_string(i));
    }
    for (std::size_t j = 0; j < counts.front().size(); ++j) {
        t.col_labels.push_back("c" + std::to_string(j));
    }
    t.counts = std::move(counts);
    return t;
}

// Rank = (# strictly smaller) + (# equal + 1) / 2, i.e. the average of the
// tied positions. Quadratic on purpose.
std::vector<double> naive_ranks(const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        double less = 0;
        double equal = 0;
        for (const double w : v) {
            less += w < v[i];
            equal += w == v[i];
        }
        r[i] = less + (equal + 1) / 2;
    }
    return r;
}

double naive_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double mx = 0;
    double my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i] / n;
        my += y[i] / n;
    }
    double cov = 0;
    double vx = 0;
    double vy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        cov += (x[i] - mx) * (y[i] - my);
        vx += (x[i] - mx) * (x[i] - mx);
        vy += (y[i] - my) * (y[i] - my);
    }
    return cov / std::sqrt(vx * vy);
}

TEST(ChiSquared, SymmetricTwoByTwo) {
    const auto r = chi_squared(table({{30, 10}, {10, 30}}));
    EXPECT_NEAR(r.statistic, 20.0, 1e-9);
    EXPECT_EQ(r.df, 1);
    EXPECT_NEAR(r.p_value, 7.744216431044088e-06, 1e-15);
}

TEST(ChiSquared, YatesMatchesReference) {
    const auto r = chi_squared(table({{12, 5}, {7, 9}}), true);
    EXPECT_NEAR(r.statistic, 1.455996378814684, 1e-9);
    EXPECT_NEAR(r.p_value, 0.22756821457580642, 1e-9);
}

TEST(ChiSquared, ThreeByTwo) {
    const auto r = chi_squared(table({{10, 0}, {5, 5}, {2, 8}}));
    EXPECT_NEAR(r.statistic, 13.303167420814479, 1e-9);
    EXPECT_EQ(r.df, 2);
    EXPECT_NEAR(r.p_value, 0.0012919743711273166, 1e-12);
}

TEST(ChiSquared, RejectsDegenerateTables) {
    EXPECT_THROW(chi_squared(table({{1, 2}})), InvalidTable);
    EXPECT_THROW(chi_squared(table({{0, 0}, {3, 4}})), InvalidTable);
    EXPECT_THROW(chi_squared(table({{1, 0}, {3, 0}})), InvalidTable);
    EXPECT_THROW(chi_squared(table({{1, -1}, {3, 4}})), InvalidTable);
}

TEST(ChiSquared, UpperTailReference) {
    EXPECT_NEAR(chi_squared_upper_tail(7.5, 3), 0.0575584519726364, 1e-12);
    EXPECT_NEAR(student_t_two_sided_p(2.1, 7), 0.0738711962129226, 1e-12);
}

TEST(BenjaminiHochberg, WorkedExample) {
    const std::vector<double> p{0.005, 0.03, 0.04};
    const auto adj = bh_adjust(p);
    ASSERT_EQ(adj.size(), 3u);
    EXPECT_NEAR(adj[0], 0.015, 1e-12);
    EXPECT_NEAR(adj[1], 0.04, 1e-12);
    EXPECT_NEAR(adj[2], 0.04, 1e-12);
}

TEST(BenjaminiHochberg, MonotoneAndBounded) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(1 + rep % 25);
        for (auto& v : p) {
            v = unit(rng);
        }
        const auto adj = bh_adjust(p);
        for (std::size_t i = 0; i < p.size(); ++i) {
            EXPECT_GE(adj[i], p[i]);
            EXPECT_LE(adj[i], 1.0);
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[i] <= p[j]) {
                    EXPECT_LE(adj[i], adj[j]);
                }
            }
        }
    }
}

TEST(BenjaminiHochberg, RejectsOutOfRange) {
    const std::vector<double> bad{0.1, 1.5};
    EXPECT_THROW(bh_adjust(bad), DomainError);
    EXPECT_TRUE(bh_adjust(std::vector<double>{}).empty());
}

TEST(Spearman, WorkedExamples) {
    const std::vector<double> x{1, 2, 3};
    const std::vector<double> y{30, 10, 20};
    EXPECT_NEAR(spearman_rho(x, y).statistic, -0.5, 1e-12);

    const std::vector<double> a{1, 2, 3, 4, 5, 6};
    const std::vector<double> b{2, 1, 4, 3, 6, 5};
    const auto r = spearman_rho(a, b);
    EXPECT_NEAR(r.statistic, 0.8285714285714287, 1e-12);
    EXPECT_NEAR(r.p_value, 0.04156268221574334, 1e-9);
    EXPECT_TRUE(r.approximate);
}

TEST(Spearman, TiesUseAverageRanks) {
    const std::vector<double> x{1, 2, 2, 3, 4};
    const std::vector<double> y{3, 1, 2, 2, 5};
    const auto r = spearman_rho(x, y);
    EXPECT_NEAR(r.statistic, 0.2894736842105264, 1e-12);
    EXPECT_NEAR(r.p_value, 0.6366447547494903, 1e-9);
    EXPECT_EQ(average_ranks(x), (std::vector<double>{1, 2.5, 2.5, 4, 5}));
}

TEST(Spearman, MatchesDefinitionOnRandomSmallSamples) {
    std::mt19937_64 rng(2024);
    for (int rep = 0; rep < 500; ++rep) {
        const std::size_t n = 3 + rep % 10;
        std::uniform_int_distribution<int> level(1, 5);
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = level(rng);
            y[i] = level(rng);
        }
        const auto rx = naive_ranks(x);
        const auto ry = naive_ranks(y);
        double vx = 0;
        double vy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            vx += (rx[i] - rx[0]) * (rx[i] - rx[0]);
            vy += (ry[i] - ry[0]) * (ry[i] - ry[0]);
        }
        if (vx == 0 || vy == 0) {
            EXPECT_THROW(spearman_rho(x, y), UndefinedCorrelation);
            continue;
        }
        EXPECT_NEAR(spearman_rho(x, y).statistic, naive_pearson(rx, ry), 1e-9);
    }
}

TEST(Pearson, WorkedExample) {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{2, 1, 4, 3};
    EXPECT_NEAR(pearson_r(x, y), 0.6, 1e-12);
    EXPECT_NEAR(pearson_r(x, y), naive_pearson(x, y), 1e-12);
}

TEST(Pearson, RejectsDegenerateInput) {
    const std::vector<double> flat{3, 3, 3, 3};
    const std::vector<double> x{1, 2, 3, 4};
    EXPECT_THROW(pearson_r(flat, x), UndefinedCorrelation);
    EXPECT_THROW(pearson_r(std::vector<double>{1, 2}, std::vector<double>{2, 1}), DomainError);
    EXPECT_THROW(pearson_r(x, std::vector<double>{1, 2, 3}), DomainError);
    EXPECT_THROW(pearson_r(x, std::vector<double>{1, 2, NAN, 4}), DomainError);
}

TEST(Pearson, BoundedAndSymmetric) {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> x(5 + rep % 20);
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = normal(rng);
            y[i] = 0.5 * x[i] + normal(rng);
        }
        const double r = pearson_r(x, y);
        EXPECT_LE(std::abs(r), 1.0);
        EXPECT_DOUBLE_EQ(r, pearson_r(y, x));
        EXPECT_NEAR(r, naive_pearson(x, y), 1e-12);
    }
}

TEST(Correlation, InvarianceProperties) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> x(4 + rep % 15);
        std::vector<double> y(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = normal(rng);
            y[i] = x[i] + normal(rng);
        }
        std::vector<double> mono(x.size());
        std::vector<double> affine(x.size());
        std::vector<double> negated(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            mono[i] = std::exp(x[i]) + x[i] * x[i] * x[i];
            affine[i] = 3.5 * x[i] - 2.0;
            negated[i] = -x[i];
        }
        EXPECT_NEAR(spearman_rho(mono, y).statistic, spearman_rho(x, y).statistic, 1e-12);
        EXPECT_NEAR(pearson_r(affine, y), pearson_r(x, y), 1e-12);
        EXPECT_NEAR(pearson_r(negated, y), -pearson_r(x, y), 1e-12);
        EXPECT_NEAR(pearson_r(x, x), 1.0, 1e-12);
    }
}

TEST(Accuracy, CaseInsensitiveAndMissing) {
    const auto r = accuracy({{std::string(" female "), "Female"}, {std::string("Male"), "Female"}, {std::nullopt, "Female"}});
    EXPECT_EQ(r.matches, 1u);
    EXPECT_EQ(r.total, 2u);
    EXPECT_EQ(r.missing, 1u);
    EXPECT_DOUBLE_EQ(r.accuracy, 0.5);
    EXPECT_THROW(accuracy(std::vector<std::optional<bool>>{std::nullopt}), UndefinedCorrelation);
}

TEST(Descriptive, MeanAndSampleSd) {
    const std::vector<double> v{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(v), 5.0);
    EXPECT_NEAR(sample_sd(v), std::sqrt(32.0 / 7.0), 1e-12);
}

} // namespace
