// Acceptance checks. One PASS/FAIL/SKIP line per criterion; the exit code is
// non-zero when any criterion fails.

#include "personakit/cli.hpp"
#include "personakit/condition_report.hpp"
#include "personakit/error.hpp"
#include "personakit/eval/guess_who.hpp"
#include "personakit/eval/inference.hpp"
#include "personakit/eval/records.hpp"
#include "personakit/eval/roster.hpp"
#include "personakit/eval/tst.hpp"
#include "personakit/psychometrics.hpp"
#include "personakit/render.hpp"
#include "personakit/stats.hpp"
#include "test_paths.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

namespace {

using namespace personakit;
using personakit::testing::data_dir;
using personakit::testing::fixture_dir;
using personakit::testing::scratch_dir;
namespace fs = std::filesystem;

// Collects failed expectations for one criterion.
struct Check {
    std::vector<std::string> failures;
    std::ostringstream info;

    void expect(bool ok, const std::string& what) {
        if (!ok) {
            failures.push_back(what);
        }
    }
};

struct Outcome {
    enum { pass, fail, skip } state = pass;
    std::string detail;
};

Outcome run_criterion(int id, const std::string& name, double budget_s, const std::function<void(Check&)>& body) {
    Check check;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(check);
    } catch (const std::exception& e) {
        check.failures.push_back(std::string("exception: ") + e.what());
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    check.expect(elapsed < budget_s, "runtime " + std::to_string(elapsed) + " s over budget");
    Outcome out;
    out.state = check.failures.empty() ? Outcome::pass : Outcome::fail;
    std::ostringstream line;
    line << (out.state == Outcome::pass ? "PASS" : "FAIL") << " [" << id << "] " << name << " ("
         << std::to_string(elapsed).substr(0, 5) << " s)";
    if (!check.info.str().empty()) {
        line << " " << check.info.str();
    }
    std::cout << line.str() << "\n";
    for (const auto& f : check.failures) {
        std::cout << "    - " << f << "\n";
    }
    return out;
}

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1 ------------------------------------------------------------------------

void scoring_oracle(Check& c) {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> likert(1, 7);
    for (const auto* file : {"bfi2s.json", "pvq21.json"}) {
        const json doc = read_json_file(data_dir() / "schemas" / file);
        const auto schema = InstrumentSchema::from_json(doc);
        const int lo = doc["scale_min"];
        const int hi = doc["scale_max"];
        double worst = 0.0;
        for (int rep = 0; rep < 1000; ++rep) {
            ScaleResponseSet set{schema.id(), {}};
            for (const auto& item : doc["items"]) {
                set.responses[item["item_id"].get<std::string>()] = likert(rng);
            }
            const auto got = score(set, schema);

            std::map<std::string, double> sums;
            std::map<std::string, int> counts;
            for (const auto& item : doc["items"]) {
                int v = set.responses.at(item["item_id"].get<std::string>());
                if (item["reverse_keyed"].get<bool>()) {
                    v = lo + hi - v;
                }
                sums[item["group_id"].get<std::string>()] += v;
                ++counts[item["group_id"].get<std::string>()];
            }
            std::map<std::string, double> domain_sums;
            std::map<std::string, int> domain_counts;
            for (const auto& g : doc["groups"]) {
                const std::string id = g["group_id"];
                const double m = sums[id] / counts[id];
                worst = std::max(worst, std::abs(got.group_means.at(id) - m));
                if (g.contains("parent_domain")) {
                    domain_sums[g["parent_domain"].get<std::string>()] += m;
                    ++domain_counts[g["parent_domain"].get<std::string>()];
                }
            }
            for (const auto& [d, s] : domain_sums) {
                worst = std::max(worst, std::abs(got.domain_means.at(d) - s / domain_counts[d]));
            }
            c.expect(got.group_means.size() == counts.size(), std::string(file) + ": group count");
        }
        c.expect(worst <= 1e-12, std::string(file) + ": max deviation " + std::to_string(worst));
        c.info << file << " max|d|=" << worst << " ";
    }
    for (int v = 1; v <= 7; ++v) {
        c.expect(apply_reverse_key(apply_reverse_key(v, true), true) == v, "involution at " + std::to_string(v));
    }
}

// 2 ------------------------------------------------------------------------

void descriptor_calibration(Check& c) {
    c.expect(level_phrase(3.0) == "slightly below average", "3.0 -> " + std::string(level_phrase(3.0)));
    const std::set<std::string_view> bins{"extremely low",          "well below average", "slightly below average",
                                          "average",                "slightly above average",
                                          "well above average",     "extremely high"};
    std::set<std::string_view> seen;
    for (int i = 0; i <= 600; ++i) {
        const double s = 1.0 + 0.01 * i;
        const auto a = level_phrase(s);
        const auto b = level_phrase(s);
        c.expect(a == b, "not single-valued at " + std::to_string(s));
        c.expect(bins.contains(a), "unknown phrase at " + std::to_string(s));
        seen.insert(a);
    }
    c.expect(seen == bins, "sweep does not reach all seven bins");
}

// 3 ------------------------------------------------------------------------

void condition_algebra(Check& c) {
    const auto schemas = SchemaSet::load(data_dir() / "schemas");
    const auto templates = TemplateSet::load(data_dir() / "templates");
    const auto profile = load_profile(fixture_dir() / "profiles" / "tbbt-01.json");
    const std::map<Component, std::vector<std::string_view>> owned{
        {Component::social, {section::demographics}},
        {Component::personal, {section::personality, section::values}},
        {Component::context, {section::weekly, section::loves, section::hates}},
    };
    std::set<std::string> singles;
    for (const auto cond : all_conditions()) {
        const auto r = render_condition(profile, cond, templates, schemas.demographics);
        for (const auto& [component, labels] : owned) {
            for (const auto label : labels) {
                c.expect(r.has_section(label) == includes(cond, component),
                         std::string(to_string(cond)) + ": section " + std::string(label));
            }
        }
        const std::string text = r.profile_text();
        const bool verbatim = text.find(profile.context.weekday_essay) != std::string::npos &&
                              text.find(profile.context.weekend_essay) != std::string::npos;
        c.expect(verbatim == includes(cond, Component::context), std::string(to_string(cond)) + ": context text");
        if (cond == Condition::S || cond == Condition::P || cond == Condition::C) {
            for (const auto& l : r.section_labels()) {
                singles.insert(l);
            }
        }
        if (cond == Condition::C) {
            for (const auto& item : profile.context.loves) {
                c.expect(text.find(item) != std::string::npos, "C: love item missing");
            }
        }
    }
    const auto spc = render_condition(profile, Condition::SPC, templates, schemas.demographics).section_labels();
    c.expect(std::set<std::string>(spc.begin(), spc.end()) == singles, "SPC labels differ from union of S, P, C");
}

// 4 ------------------------------------------------------------------------

std::vector<double> definitional_ranks(const std::vector<double>& v) {
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

double covariance_r(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0;
    double sxx = 0;
    double syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

void statistics_oracles(Check& c) {
    stats::ContingencyTable t{{"a", "b"}, {"yes", "no"}, {{30, 10}, {10, 30}}};
    const auto chi = stats::chi_squared(t);
    c.expect(near(chi.statistic, 20.0, 1e-9), "chi2 statistic " + std::to_string(chi.statistic));
    c.expect(chi.df == 1, "chi2 df");
    c.expect(chi.p_value < 1e-4, "chi2 p " + std::to_string(chi.p_value));

    const std::vector<double> p{0.005, 0.03, 0.04};
    const auto adj = stats::bh_adjust(p);
    const std::vector<double> want{0.015, 0.04, 0.04};
    for (std::size_t i = 0; i < 3; ++i) {
        c.expect(near(adj[i], want[i], 1e-12), "bh[" + std::to_string(i) + "]");
    }

    const std::vector<double> x3{1, 2, 3};
    const std::vector<double> y3{30, 10, 20};
    c.expect(near(stats::spearman_rho(x3, y3).statistic, -0.5, 1e-12), "spearman worked example");

    const std::vector<double> x4{1, 2, 3, 4};
    const std::vector<double> y4{2, 1, 4, 3};
    const double r = stats::pearson_r(x4, y4);
    c.expect(near(r, covariance_r(x4, y4), 1e-12) && near(r, 0.6, 1e-12), "pearson worked example");

    std::mt19937_64 rng(4);
    double worst = 0.0;
    int cases = 0;
    while (cases < 500) {
        const std::size_t n = 3 + rng() % 12;
        std::uniform_int_distribution<int> v(1, 6);
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = v(rng);
            y[i] = v(rng);
        }
        const auto rx = definitional_ranks(x);
        const auto ry = definitional_ranks(y);
        if (std::adjacent_find(rx.begin(), rx.end(), std::not_equal_to<>()) == rx.end() ||
            std::adjacent_find(ry.begin(), ry.end(), std::not_equal_to<>()) == ry.end()) {
            continue; // constant ranks: correlation undefined
        }
        worst = std::max(worst, std::abs(stats::spearman_rho(x, y).statistic - covariance_r(rx, ry)));
        ++cases;
    }
    c.expect(worst <= 1e-9, "random spearman max deviation " + std::to_string(worst));
    c.info << "spearman max|d|=" << worst;
}

// 5 ------------------------------------------------------------------------

void replay_determinism(Check& c) {
    std::map<int, cli::RunSummary> summaries;
    std::map<int, fs::path> dirs;
    for (const int parallelism : {1, 8}) {
        dirs[parallelism] = scratch_dir("acceptance_replay_p" + std::to_string(parallelism));
        auto config = cli::RunConfig::load(fixture_dir() / "run_config.json");
        config.paths.output = dirs[parallelism];
        config.parallelism = parallelism;
        summaries[parallelism] = cli::cmd_run(config);
    }
    c.expect(summaries[1].report_digest == summaries[8].report_digest, "report digests differ");
    for (const auto& battery : cli::kBatteries) {
        const auto rel = fs::path("records") / (battery + ".jsonl");
        c.expect(read_file(dirs[1] / rel) == read_file(dirs[8] / rel), battery + " records differ");
    }
    const std::size_t entities = 3;
    const std::map<std::string, std::size_t> expected{
        {"guesswho", entities * 7 * 1 * 1},
        {"tst", entities * 7 * 1 * 1},
        {"inference", entities * 1 * 1 * 5},
        {"essays", entities * 4 * 1 * 4},
    };
    for (const auto& [battery, n] : expected) {
        const auto got = summaries[1].record_counts.at(battery);
        c.expect(got == n, battery + ": " + std::to_string(got) + " records, expected " + std::to_string(n));
    }
    c.info << "digest " << summaries[1].report_digest.substr(0, 12);
}

// 6 ------------------------------------------------------------------------

void guess_who_fixture(Check& c) {
    const std::map<Condition, std::pair<int, int>> plan{
        {Condition::C, {9, 10}}, {Condition::P, {2, 10}}, {Condition::S, {5, 10}}};
    cli::RecordSet records;
    for (const auto& [cond, counts] : plan) {
        for (int i = 0; i < counts.second; ++i) {
            eval::GuessWhoVerdict v;
            v.entity_id = "e" + std::to_string(i);
            v.condition = cond;
            v.model_id = "m";
            v.overall_true = i < counts.first;
            v.character_match = v.overall_true;
            v.series_match = true;
            records.guesswho.push_back(eval::guess_who_record(v, Provenance::fictional));
        }
    }
    const auto schemas = SchemaSet::load(data_dir() / "schemas");
    const auto bundle = cli::analyze_records(records, schemas, {}, "");
    const json& report = bundle.report["guesswho"]["overall"].at(0);
    for (const auto& g : report["groups"]) {
        const auto cond = parse_condition(g["label"].get<std::string>());
        if (!plan.contains(cond)) {
            c.expect(g["n"] == 0, g["label"].get<std::string>() + " should be empty");
            continue;
        }
        const auto [k, n] = plan.at(cond);
        c.expect(g["accuracy"].get<double>() == static_cast<double>(k) / n,
                 g["label"].get<std::string>() + " accuracy " + g["accuracy"].dump());
    }
    bool flagged = false;
    for (const auto& p : report["pairwise"]) {
        if (p["a"] == "P" && p["b"] == "C") {
            flagged = p["adjusted_p"].get<double>() < 0.05 && p["direction"] == 1;
            c.info << "P<C adjusted p=" << p["adjusted_p"].get<double>();
        }
    }
    const auto& ordering = report["ordering"];
    c.expect(flagged, "P vs C not significant after adjustment");
    c.expect(std::find(ordering.begin(), ordering.end(), "P < C") != ordering.end(), "ordering lacks \"P < C\"");
}

// 7 ------------------------------------------------------------------------

eval::InferenceAnswerSet answers_from(const Profile& p, const std::string& entity, int iteration) {
    eval::InferenceAnswerSet a;
    a.entity_id = entity;
    a.model_id = "m";
    a.iteration = iteration;
    a.inferred_social = p.social;
    a.inferred_bfi = p.personal_raw.bfi_responses;
    a.inferred_pvq = p.personal_raw.pvq_responses;
    return a;
}

// Fraction of repetitions whose age rho stays inside (-0.3, 0.3) when each
// entity's answers come from a randomly chosen other entity.
double permuted_fraction(const Profile& base, const DemographicItem& age, const SchemaSet& schemas, int entities,
                         int iterations) {
    int inside = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::mt19937_64 rng(1000 + rep);
        std::vector<Profile> people(entities, base);
        std::map<std::string, const Profile*> golden;
        for (int i = 0; i < entities; ++i) {
            people[i].entity_id = "syn-" + std::to_string(i);
            people[i].social.answers["age"] = age.levels[rng() % age.levels.size()];
            golden[people[i].entity_id] = &people[i];
        }
        std::vector<eval::InferenceAnswerSet> answers;
        for (int k = 0; k < iterations; ++k) {
            std::vector<int> perm(entities);
            std::iota(perm.begin(), perm.end(), 0);
            std::shuffle(perm.begin(), perm.end(), rng);
            for (int i = 0; i < entities; ++i) {
                answers.push_back(answers_from(people[perm[i]], people[i].entity_id, k));
            }
        }
        const auto report = eval::compare_inference(answers, golden, schemas);
        for (const auto& o : report.ordinal) {
            if (o.item_id == "age" && o.rho && std::abs(*o.rho) < 0.3) {
                ++inside;
            }
        }
    }
    return inside / 100.0;
}

void inference_identity(Check& c) {
    const auto schemas = SchemaSet::load(data_dir() / "schemas");
    std::vector<Profile> people;
    for (const auto* id : {"tbbt-01", "tbbt-02", "mf-32"}) {
        people.push_back(load_profile(fixture_dir() / "profiles" / (std::string(id) + ".json")));
    }
    std::map<std::string, const Profile*> golden;
    std::vector<eval::InferenceAnswerSet> answers;
    for (const auto& p : people) {
        golden[p.entity_id] = &p;
        for (int k = 0; k < 5; ++k) {
            answers.push_back(answers_from(p, p.entity_id, k));
        }
    }
    const auto report = eval::compare_inference(answers, golden, schemas);
    for (const auto& a : report.categorical) {
        c.expect(!a.accuracy || *a.accuracy == 1.0, "accuracy " + a.item_id);
    }
    for (const auto& o : report.ordinal) {
        c.expect(!o.rho || *o.rho == 1.0, "rho " + o.item_id);
    }
    c.expect(report.bfi.mean_r == 1.0, "bfi mean r");
    c.expect(report.pvq.mean_r == 1.0, "pvq mean r");

    const auto* age = schemas.demographics.find("age");
    const double pooled = permuted_fraction(people[0], *age, schemas, 45, 5);
    const double single = permuted_fraction(people[0], *age, schemas, 45, 1);
    c.expect(pooled >= 0.95, "permuted |rho|<0.3 in " + std::to_string(pooled) + " of repetitions");
    c.info << "permuted |rho|<0.3: 45x5 answer sets " << pooled << ", 45x1 answer sets " << single
           << " (informational); live reference: sex 0.97, religion 0.40, age rho 0.59, BFI mean r 0.686";
}

// 8 ------------------------------------------------------------------------

void tst_shape(Check& c) {
    const auto schemas = SchemaSet::load(data_dir() / "schemas");
    const auto templates = TemplateSet::load(data_dir() / "templates");
    const auto roster = eval::Roster::load(data_dir() / "roster.json");
    auto gateway = cli::make_gateway(GatewayMode::replay, fixture_dir() / "cassette.jsonl");
    const auto sheldon = load_profile(fixture_dir() / "profiles" / "tbbt-01.json");
    const auto phil = load_profile(fixture_dir() / "profiles" / "mf-32.json");
    const auto good = render_condition(sheldon, Condition::S, templates, schemas.demographics);
    const auto bad = render_condition(phil, Condition::S, templates, schemas.demographics);

    const auto ok = eval::run_tst(good, templates, "gpt-4o", *gateway);
    c.expect(ok.battery && ok.battery->open_self.size() == 10 && ok.battery->hidden_self.size() == 10,
             "10+10 fixture did not pass");
    c.expect(ok.repair_attempts == 0, "10+10 fixture was repaired");

    const auto broken = eval::run_tst(bad, templates, "gpt-4o", *gateway);
    c.expect(!broken.battery, "9-statement fixture produced a battery");
    c.expect(broken.repair_attempts == 1 && broken.transcript.size() == 2, "expected exactly one repair attempt");
    const json record = eval::tst_record(broken, {}, eval::JudgingState::judged, "gpt-4o", Provenance::fictional);
    c.expect(!eval::tst_from_record(record).outcome.battery, "battery_failure not recorded");

    c.expect(eval::parse_judge_reply("Yes") == true, "Yes");
    c.expect(eval::parse_judge_reply("No") == false, "No");
    c.expect(eval::parse_judge_reply("It depends") == std::nullopt, "garbage");

    if (ok.battery) {
        const auto judgments = eval::judge_tst(*ok.battery, *roster.find("tbbt-01"), templates, "gpt-4o", *gateway, 4);
        std::vector<stats::Outcome> outcomes;
        std::size_t abstains = 0;
        std::size_t yes = 0;
        for (const auto& j : judgments) {
            outcomes.push_back({"S", "gpt-4o", j.verdict});
            abstains += !j.verdict;
            yes += j.verdict.value_or(false);
        }
        c.expect(abstains == 1, "expected one abstain in the replayed judging, got " + std::to_string(abstains));
        const auto report = stats::condition_report_scope(outcomes, {"S", "P", "C"}, "gpt-4o");
        const auto& s = report.groups[0];
        c.expect(s.n == judgments.size() - abstains && s.excluded == abstains, "abstain entered the denominator");
        c.expect(s.accuracy && *s.accuracy == static_cast<double>(yes) / s.n, "accuracy denominator");
        c.info << "judged " << judgments.size() << ", abstained " << abstains;
    }
}

// 9 ------------------------------------------------------------------------

Outcome live_smoke() {
    const char* model = std::getenv("PERSONAKIT_LIVE_MODEL");
    if (model == nullptr || *model == '\0') {
        std::cout << "SKIP [9] live smoke (set PERSONAKIT_LIVE_MODEL and the provider API key to run)\n";
        return {Outcome::skip, ""};
    }
    return run_criterion(9, "live smoke", 3600, [&](Check& c) {
        const auto dir = scratch_dir("acceptance_live");
        fs::create_directories(dir / "profiles");
        fs::copy_file(fixture_dir() / "profiles" / "tbbt-01.json", dir / "profiles" / "tbbt-01.json");
        auto config = cli::RunConfig::load(fixture_dir() / "run_config.json");
        config.mode = GatewayMode::record;
        config.models = {model};
        config.judge_model = model;
        config.paths.profiles = dir / "profiles";
        config.paths.cassette = dir / "cassette.jsonl";
        config.paths.output = dir / "out";
        config.parallelism = 2;
        const auto summary = cli::cmd_run(config);
        for (const auto& battery : cli::kBatteries) {
            c.expect(summary.record_counts.contains(battery), battery + " produced no records");
        }
        const json manifest = read_json_file(dir / "out" / "manifest.json");
        c.expect(manifest.contains("content_digest") && manifest["report_digest"] == summary.report_digest,
                 "manifest incomplete");
    });
}

} // namespace

int main() {
    std::vector<Outcome> results;
    results.push_back(run_criterion(1, "scoring oracle equivalence", 5, scoring_oracle));
    results.push_back(run_criterion(2, "descriptor calibration", 1, descriptor_calibration));
    results.push_back(run_criterion(3, "condition algebra", 1, condition_algebra));
    results.push_back(run_criterion(4, "statistics oracles", 10, statistics_oracles));
    results.push_back(run_criterion(5, "replay determinism end-to-end", 30, replay_determinism));
    results.push_back(run_criterion(6, "guess who scoring fixture", 5, guess_who_fixture));
    results.push_back(run_criterion(7, "inference comparator identity and noise", 20, inference_identity));
    results.push_back(run_criterion(8, "TST shape enforcement", 5, tst_shape));
    results.push_back(live_smoke());
    const bool failed =
        std::any_of(results.begin(), results.end(), [](const Outcome& o) { return o.state == Outcome::fail; });
    return failed ? 1 : 0;
}
