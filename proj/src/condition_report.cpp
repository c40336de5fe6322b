#include "personakit/condition_report.hpp"

#include "personakit/error.hpp"

#include <cstdio>
#include <map>
#include <set>

namespace personakit::stats {

ConditionReport condition_report_scope(const std::vector<Outcome>& outcomes, const std::vector<std::string>& group_order,
                                       const std::string& scope, const ReportOptions& options) {
    ConditionReport report;
    report.scope = scope;
    std::map<std::string, GroupSummary> by_group;
    for (const auto& label : group_order) {
        by_group[label].label = label;
    }
    for (const auto& o : outcomes) {
        if (!by_group.contains(o.group)) {
            throw ConfigError("outcome group " + o.group + " is not in the group order");
        }
        auto& g = by_group[o.group];
        if (!o.correct) {
            ++g.excluded;
            continue;
        }
        ++g.n;
        if (*o.correct) {
            ++g.correct;
        }
    }
    for (const auto& label : group_order) {
        auto& g = by_group[label];
        if (g.n > 0) {
            g.accuracy = static_cast<double>(g.correct) / static_cast<double>(g.n);
        }
        report.groups.push_back(g);
    }

    const auto row = [](const GroupSummary& g) {
        return std::vector<long long>{static_cast<long long>(g.correct), static_cast<long long>(g.n - g.correct)};
    };

    ContingencyTable omnibus;
    omnibus.col_labels = {"correct", "incorrect"};
    for (const auto& g : report.groups) {
        if (g.n > 0) {
            omnibus.row_labels.push_back(g.label);
            omnibus.counts.push_back(row(g));
        }
    }
    if (omnibus.counts.size() < 2) {
        report.omnibus_skipped = "fewer than two non-empty groups";
    } else {
        try {
            report.omnibus = chi_squared(omnibus);
        } catch (const InvalidTable& e) {
            report.omnibus_skipped = e.what();
        }
    }

    std::vector<std::size_t> testable;
    for (std::size_t i = 0; i < report.groups.size(); ++i) {
        for (std::size_t j = i + 1; j < report.groups.size(); ++j) {
            const auto& a = report.groups[i];
            const auto& b = report.groups[j];
            PairwiseComparison cmp;
            cmp.a = a.label;
            cmp.b = b.label;
            if (a.n == 0 || b.n == 0) {
                cmp.skipped = "empty group";
            } else {
                const double diff = *b.accuracy - *a.accuracy;
                cmp.direction = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
                try {
                    cmp.test = chi_squared(ContingencyTable{{a.label, b.label}, {"correct", "incorrect"}, {row(a), row(b)}},
                                           options.continuity_correction);
                    cmp.raw_p = cmp.test->p_value;
                    testable.push_back(report.pairwise.size());
                } catch (const InvalidTable& e) {
                    cmp.skipped = e.what();
                }
            }
            report.pairwise.push_back(std::move(cmp));
        }
    }

    std::vector<double> raw;
    for (const std::size_t k : testable) {
        raw.push_back(*report.pairwise[k].raw_p);
    }
    const auto adjusted = bh_adjust(raw);
    for (std::size_t t = 0; t < testable.size(); ++t) {
        auto& cmp = report.pairwise[testable[t]];
        cmp.adjusted_p = adjusted[t];
        if (adjusted[t] < options.alpha && cmp.direction != 0) {
            report.ordering.push_back(cmp.direction > 0 ? cmp.a + " < " + cmp.b : cmp.b + " < " + cmp.a);
        }
    }
    return report;
}

std::vector<ConditionReport> condition_report(const std::vector<Outcome>& outcomes,
                                              const std::vector<std::string>& group_order,
                                              const ReportOptions& options) {
    std::set<std::string> models;
    for (const auto& o : outcomes) {
        models.insert(o.model);
    }
    std::vector<ConditionReport> reports;
    for (const auto& model : models) {
        std::vector<Outcome> subset;
        for (const auto& o : outcomes) {
            if (o.model == model) {
                subset.push_back(o);
            }
        }
        reports.push_back(condition_report_scope(subset, group_order, model, options));
    }
    if (models.size() > 1) {
        reports.push_back(condition_report_scope(outcomes, group_order, "pooled", options));
    }
    return reports;
}

namespace {

json test_json(const std::optional<TestResult>& test) {
    if (!test) {
        return nullptr;
    }
    return json{{"statistic", test->statistic}, {"df", test->df}, {"p_value", test->p_value}};
}

json opt(const std::optional<double>& v) {
    return v ? json(*v) : json(nullptr);
}

std::string fmt(const std::optional<double>& v) {
    if (!v) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return buf;
}

} // namespace

json to_json(const ConditionReport& report) {
    json groups = json::array();
    for (const auto& g : report.groups) {
        groups.push_back(json{{"label", g.label},
                              {"n", g.n},
                              {"correct", g.correct},
                              {"excluded", g.excluded},
                              {"accuracy", opt(g.accuracy)}});
    }
    json pairwise = json::array();
    for (const auto& p : report.pairwise) {
        pairwise.push_back(json{{"a", p.a},
                                {"b", p.b},
                                {"test", test_json(p.test)},
                                {"raw_p", opt(p.raw_p)},
                                {"adjusted_p", opt(p.adjusted_p)},
                                {"direction", p.direction},
                                {"skipped", p.skipped}});
    }
    return json{{"scope", report.scope},
                {"groups", groups},
                {"omnibus", test_json(report.omnibus)},
                {"omnibus_skipped", report.omnibus_skipped},
                {"pairwise", pairwise},
                {"ordering", report.ordering}};
}

std::string accuracy_csv(const std::vector<ConditionReport>& reports) {
    std::string out = "scope,condition,n,correct,excluded,accuracy\n";
    for (const auto& r : reports) {
        for (const auto& g : r.groups) {
            out += r.scope + "," + g.label + "," + std::to_string(g.n) + "," + std::to_string(g.correct) + "," +
                   std::to_string(g.excluded) + "," + fmt(g.accuracy) + "\n";
        }
    }
    return out;
}

std::string pairwise_csv(const std::vector<ConditionReport>& reports) {
    std::string out = "scope,a,b,statistic,raw_p,adjusted_p,direction,skipped\n";
    for (const auto& r : reports) {
        for (const auto& p : r.pairwise) {
            out += r.scope + "," + p.a + "," + p.b + "," +
                   fmt(p.test ? std::optional<double>(p.test->statistic) : std::nullopt) + "," + fmt(p.raw_p) + "," +
                   fmt(p.adjusted_p) + "," + std::to_string(p.direction) + "," + p.skipped + "\n";
        }
    }
    return out;
}

} // namespace personakit::stats
