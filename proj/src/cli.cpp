#include "personakit/cli.hpp"

#include "personakit/error.hpp"
#include "personakit/eval/guess_who.hpp"
#include "personakit/eval/inference.hpp"
#include "personakit/eval/records.hpp"
#include "personakit/eval/roster.hpp"
#include "personakit/eval/tst.hpp"
#include "personakit/persona_runtime.hpp"
#include "personakit/providers.hpp"
#include "personakit/render.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>

namespace personakit::cli {

namespace {

fs::path resolve(const fs::path& base, const std::string& value) {
    const fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

std::vector<Condition> parse_conditions(const json& list, const char* key) {
    if (!list.is_array()) {
        throw ConfigError(std::string(key) + " must be a list");
    }
    std::vector<Condition> out;
    for (const auto& c : list) {
        out.push_back(parse_condition(c.get<std::string>()));
    }
    return out;
}

std::vector<std::string> condition_names(const std::vector<Condition>& conditions) {
    std::vector<std::string> out;
    for (const auto c : conditions) {
        out.emplace_back(to_string(c));
    }
    return out;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

void RunConfig::merge_json(const json& doc, const fs::path& base_dir) {
    try {
        if (doc.contains("mode")) {
            mode = parse_gateway_mode(doc["mode"].get<std::string>());
        }
        if (doc.contains("models")) {
            models = doc["models"].get<std::vector<std::string>>();
        }
        if (doc.contains("judge_model")) {
            judge_model = doc["judge_model"].get<std::string>();
        }
        if (doc.contains("conditions")) {
            conditions = parse_conditions(doc["conditions"], "conditions");
        }
        if (doc.contains("essay_conditions")) {
            essay_conditions = parse_conditions(doc["essay_conditions"], "essay_conditions");
        }
        if (doc.contains("batteries")) {
            const auto list = doc["batteries"].get<std::vector<std::string>>();
            batteries = {list.begin(), list.end()};
        }
        if (doc.contains("iterations")) {
            for (const auto& [k, v] : doc["iterations"].items()) {
                iterations[k] = v.get<int>();
            }
        }
        parallelism = doc.value("parallelism", parallelism);
        seed = doc.value("seed", seed);
        essay_max_tokens = doc.value("essay_max_tokens", essay_max_tokens);
        report.alpha = doc.value("alpha", report.alpha);
        report.continuity_correction = doc.value("continuity_correction", report.continuity_correction);
        if (doc.contains("paths")) {
            const auto& p = doc["paths"];
            const auto set = [&](const char* key, fs::path& target) {
                if (p.contains(key)) {
                    target = resolve(base_dir, p[key].get<std::string>());
                }
            };
            set("profiles", paths.profiles);
            set("schemas", paths.schemas);
            set("templates", paths.templates);
            set("roster", paths.roster);
            set("topics", paths.topics);
            set("output", paths.output);
            if (p.contains("cassette")) {
                paths.cassette = resolve(base_dir, p["cassette"].get<std::string>());
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
}

RunConfig RunConfig::load(const fs::path& path) {
    RunConfig config;
    config.merge_json(read_json_file(path), path.parent_path());
    return config;
}

void RunConfig::validate() const {
    if (models.empty()) {
        throw ConfigError("no models configured");
    }
    if (conditions.empty()) {
        throw ConfigError("condition list is empty");
    }
    if (batteries.empty()) {
        throw ConfigError("no batteries selected");
    }
    for (const auto& b : batteries) {
        if (std::find(kBatteries.begin(), kBatteries.end(), b) == kBatteries.end()) {
            throw ConfigError("unknown battery " + b);
        }
    }
    for (const auto& [b, n] : iterations) {
        if (n < 1) {
            throw ConfigError("iterations for " + b + " must be >= 1");
        }
    }
    if (parallelism < 1) {
        throw ConfigError("parallelism must be >= 1");
    }
    if (batteries.contains("essays") && essay_conditions.empty()) {
        throw ConfigError("essay condition list is empty");
    }
    const auto need = [](const fs::path& p, const char* what) {
        if (p.empty() || !fs::exists(p)) {
            throw ConfigError(std::string(what) + " path does not exist: " + p.string());
        }
    };
    need(paths.profiles, "profiles");
    need(paths.schemas, "schemas");
    need(paths.templates, "templates");
    if (batteries.contains("guesswho") || batteries.contains("tst")) {
        need(paths.roster, "roster");
    }
    if (batteries.contains("essays")) {
        need(paths.topics, "topics");
    }
    if (paths.output.empty()) {
        throw ConfigError("output path is not set");
    }
    if (mode == GatewayMode::replay) {
        if (!paths.cassette) {
            throw ConfigError("replay mode requires a cassette path");
        }
        need(*paths.cassette, "cassette");
    }
    if (mode == GatewayMode::record && !paths.cassette) {
        throw ConfigError("record mode requires a cassette path");
    }
}

int RunConfig::iterations_for(const std::string& battery) const {
    const auto it = iterations.find(battery);
    return it == iterations.end() ? 1 : it->second;
}

json RunConfig::content_json() const {
    return json{{"mode", to_string(mode)},
                {"models", models},
                {"judge_model", judge_model},
                {"conditions", condition_names(conditions)},
                {"essay_conditions", condition_names(essay_conditions)},
                {"batteries", batteries},
                {"iterations", iterations},
                {"seed", seed},
                {"essay_max_tokens", essay_max_tokens},
                {"alpha", report.alpha},
                {"continuity_correction", report.continuity_correction}};
}

json RunConfig::to_json() const {
    json doc = content_json();
    doc["parallelism"] = parallelism;
    doc["paths"] = json{{"profiles", paths.profiles.string()}, {"schemas", paths.schemas.string()},
                        {"templates", paths.templates.string()}, {"roster", paths.roster.string()},
                        {"topics", paths.topics.string()},       {"output", paths.output.string()},
                        {"cassette", paths.cassette ? json(paths.cassette->string()) : json(nullptr)}};
    return doc;
}

json RunManifest::to_json() const {
    return json{{"config", config},
                {"digests", digests},
                {"record_counts", record_counts},
                {"record_digests", record_digests},
                {"content_digest", content_digest},
                {"report_digest", report_digest},
                {"started_at", started_at},
                {"finished_at", finished_at}};
}

std::unique_ptr<Gateway> make_gateway(GatewayMode mode, const std::optional<fs::path>& cassette,
                                      std::shared_ptr<Provider> provider, int max_in_flight) {
    std::shared_ptr<Cassette> tape;
    if (mode == GatewayMode::replay) {
        if (!cassette) {
            throw ConfigError("replay mode requires a cassette path");
        }
        tape = Cassette::open(*cassette, false);
    } else if (mode == GatewayMode::record) {
        if (!cassette) {
            throw ConfigError("record mode requires a cassette path");
        }
        tape = Cassette::open(*cassette, true);
    }
    if (mode != GatewayMode::replay && !provider) {
        provider = default_provider_router();
    }
    GatewayConfig config;
    config.mode = mode;
    config.max_in_flight = max_in_flight;
    return std::make_unique<Gateway>(config, std::move(tape), std::move(provider));
}

BuildResult cmd_build_profile(const fs::path& input, const fs::path& out_dir, const SchemaSet& schemas,
                              const TemplateSet& templates, Gateway& gateway, const NarrativeOptions& options,
                              bool force) {
    BuildResult result;
    result.profile = load_profile(input);
    // Surfaces the exact unanswered items before anything else.
    score(result.profile.personal_raw.bfi_responses, schemas.bfi);
    score(result.profile.personal_raw.pvq_responses, schemas.pvq);

    result.validation = validate_profile(result.profile, schemas);
    if (!result.validation.ok() && !force) {
        return result;
    }
    try {
        result.profile.personal_narrative =
            build_narrative(result.profile, schemas, gateway, templates, options);
    } catch (const Error& e) {
        throw std::runtime_error("narrativizer step for " + result.profile.entity_id + ": " + e.what());
    }
    result.output = out_dir / (result.profile.entity_id + ".json");
    write_file(result.output, serialize_profile(result.profile));
    result.written = true;
    return result;
}

namespace {

std::vector<Profile> load_profiles(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<Profile> profiles;
    for (const auto& f : files) {
        profiles.push_back(load_profile(f));
    }
    std::sort(profiles.begin(), profiles.end(),
              [](const Profile& a, const Profile& b) { return a.entity_id < b.entity_id; });
    for (std::size_t i = 1; i < profiles.size(); ++i) {
        if (profiles[i].entity_id == profiles[i - 1].entity_id) {
            throw ConfigError("duplicate profile for entity " + profiles[i].entity_id);
        }
    }
    if (profiles.empty()) {
        throw ConfigError("no profiles in " + dir.string());
    }
    return profiles;
}

} // namespace

RenderSummary cmd_render(const fs::path& profiles_dir, const std::vector<Condition>& conditions,
                         const fs::path& out_dir, const SchemaSet& schemas, const TemplateSet& templates) {
    if (conditions.empty()) {
        throw ConfigError("condition list is empty");
    }
    RenderSummary summary;
    json index = json::array();
    for (const auto& profile : load_profiles(profiles_dir)) {
        for (const auto condition : conditions) {
            try {
                const auto persona = render_condition(profile, condition, templates, schemas.demographics);
                const fs::path file = out_dir / profile.entity_id / (std::string(to_string(condition)) + ".txt");
                const std::string text = embodiment_prompt(persona, templates) + "\n";
                write_file(file, text);
                summary.files.push_back(file);
                index.push_back(json{{"entity_id", profile.entity_id},
                                     {"condition", to_string(condition)},
                                     {"file", fs::relative(file, out_dir).generic_string()},
                                     {"sha256", sha256_hex(text)}});
            } catch (const PreconditionError& e) {
                summary.missing.push_back(profile.entity_id + "/" + std::string(to_string(condition)) + ": " +
                                          e.what());
            }
        }
    }
    write_file(out_dir / "render_manifest.json",
               dump_json(json{{"templates", templates.digest()}, {"files", index}, {"missing", summary.missing}}));
    return summary;
}

RecordSet load_records(const fs::path& records_dir) {
    RecordSet set;
    const auto read = [&](const char* name, std::vector<json>& into) {
        const fs::path p = records_dir / (std::string(name) + ".jsonl");
        if (fs::exists(p)) {
            into = eval::read_jsonl(p);
        }
    };
    read("guesswho", set.guesswho);
    read("tst", set.tst);
    read("inference", set.inference);
    read("essays", set.essays);
    if (set.size() == 0) {
        throw ConfigError("no records in " + records_dir.string());
    }
    return set;
}

namespace {

std::vector<std::string> condition_labels() {
    std::vector<std::string> out;
    for (const auto c : all_conditions()) {
        out.emplace_back(to_string(c));
    }
    return out;
}

json reports_json(const std::vector<stats::ConditionReport>& reports) {
    json out = json::array();
    for (const auto& r : reports) {
        out.push_back(stats::to_json(r));
    }
    return out;
}

std::string fmt(const std::optional<double>& v) {
    if (!v) {
        return "";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return buf;
}

// Item rows with one column per provenance present, fictional first.
std::string inference_table(const std::map<Provenance, eval::InferenceReport>& reports) {
    std::string header = "section,item_id,metric";
    for (const auto& [prov, _] : reports) {
        header += "," + std::string(to_string(prov));
    }
    std::map<std::string, std::map<Provenance, std::string>> rows;
    std::vector<std::string> order;
    const auto put = [&](const std::string& key, Provenance prov, const std::string& value) {
        if (!rows.contains(key)) {
            order.push_back(key);
        }
        rows[key][prov] = value;
    };
    for (const auto& [prov, report] : reports) {
        for (const auto& row : report.categorical) {
            put("S," + row.item_id + ",accuracy", prov, fmt(row.accuracy));
        }
        for (const auto& row : report.ordinal) {
            put("S," + row.item_id + ",spearman_rho", prov, fmt(row.rho));
        }
        put("P,bfi,mean_pearson_r", prov, fmt(report.bfi.mean_r));
        put("P,bfi,sd_pearson_r", prov, fmt(report.bfi.mean_r ? std::optional<double>(report.bfi.sd_r) : std::nullopt));
        put("P,pvq,mean_pearson_r", prov, fmt(report.pvq.mean_r));
        put("P,pvq,sd_pearson_r", prov, fmt(report.pvq.mean_r ? std::optional<double>(report.pvq.sd_r) : std::nullopt));
    }
    std::string out = header + "\n";
    for (const auto& key : order) {
        out += key;
        for (const auto& [prov, _] : reports) {
            const auto it = rows[key].find(prov);
            out += "," + (it == rows[key].end() ? std::string() : it->second);
        }
        out += "\n";
    }
    return out;
}

} // namespace

AnalysisBundle analyze_records(const RecordSet& records, const SchemaSet& schemas,
                               const stats::ReportOptions& options, const std::string& manifest_digest) {
    AnalysisBundle bundle;
    json report{{"schema_version", eval::kRecordSchemaVersion}, {"manifest_digest", manifest_digest}};
    const auto labels = condition_labels();

    if (!records.guesswho.empty()) {
        std::vector<stats::Outcome> overall;
        std::vector<stats::Outcome> character_only;
        std::size_t parse_failures = 0;
        std::size_t transport_failures = 0;
        for (const auto& r : records.guesswho) {
            const auto v = eval::guess_who_from_record(r);
            const std::string cond(to_string(v.condition));
            std::optional<bool> all;
            std::optional<bool> character;
            if (v.status == eval::TrialStatus::transport_failure) {
                ++transport_failures;
            } else {
                if (v.status == eval::TrialStatus::parse_failure) {
                    ++parse_failures;
                }
                all = v.overall_true;
                character = v.character_match;
            }
            overall.push_back({cond, v.model_id, all});
            character_only.push_back({cond, v.model_id, character});
        }
        const auto main = stats::condition_report(overall, labels, options);
        const auto secondary = stats::condition_report(character_only, labels, options);
        report["guesswho"] = json{{"records", records.guesswho.size()},
                                  {"parse_failures", parse_failures},
                                  {"transport_failures", transport_failures},
                                  {"overall", reports_json(main)},
                                  {"character_only", reports_json(secondary)}};
        bundle.tables["guesswho_accuracy.csv"] = stats::accuracy_csv(main);
        bundle.tables["guesswho_pairwise.csv"] = stats::pairwise_csv(main);
        bundle.tables["guesswho_character_only_accuracy.csv"] = stats::accuracy_csv(secondary);
    }

    if (!records.tst.empty()) {
        std::vector<stats::Outcome> outcomes;
        std::size_t abstains = 0;
        std::size_t battery_failures = 0;
        std::size_t unsupported = 0;
        std::size_t flagged = 0;
        for (const auto& r : records.tst) {
            const auto rec = eval::tst_from_record(r);
            if (!rec.outcome.battery) {
                ++battery_failures;
                continue;
            }
            flagged += rec.outcome.battery->flags.size();
            if (rec.judging == eval::JudgingState::unsupported) {
                ++unsupported;
                continue;
            }
            for (const auto& j : rec.judgments) {
                if (!j.verdict) {
                    ++abstains;
                }
                outcomes.push_back({std::string(to_string(rec.outcome.condition)), rec.outcome.model_id, j.verdict});
            }
        }
        const auto reports = stats::condition_report(outcomes, labels, options);
        report["tst"] = json{{"records", records.tst.size()},   {"battery_failures", battery_failures},
                             {"abstains", abstains},            {"unjudged_batteries", unsupported},
                             {"echo_flags", flagged},           {"reports", reports_json(reports)}};
        bundle.tables["tst_accuracy.csv"] = stats::accuracy_csv(reports);
        bundle.tables["tst_pairwise.csv"] = stats::pairwise_csv(reports);
    }

    if (!records.inference.empty()) {
        std::map<Provenance, std::vector<eval::InferenceRecord>> by_prov;
        for (const auto& r : records.inference) {
            auto rec = eval::inference_from_record(r);
            by_prov[rec.golden.provenance].push_back(std::move(rec));
        }
        std::map<Provenance, eval::InferenceReport> reports;
        json section = json::object();
        for (const auto& [prov, recs] : by_prov) {
            std::vector<eval::InferenceAnswerSet> answers;
            std::map<std::string, const Profile*> golden;
            for (const auto& rec : recs) {
                answers.push_back(rec.answers);
                golden.emplace(rec.golden.entity_id, &rec.golden);
            }
            reports[prov] = eval::compare_inference(answers, golden, schemas);
            section[std::string(to_string(prov))] = eval::to_json(reports[prov]);
        }
        report["inference"] = section;
        bundle.tables["inference_correlations.csv"] = inference_table(reports);
    }

    if (!records.essays.empty()) {
        std::size_t failures = 0;
        for (const auto& r : records.essays) {
            if (!eval::essay_from_record(r).answer) {
                ++failures;
            }
        }
        report["essays"] = json{{"records", records.essays.size()}, {"failures", failures}};
    }
    bundle.report = std::move(report);
    return bundle;
}

std::string write_bundle(const AnalysisBundle& bundle, const fs::path& out_dir) {
    const std::string text = dump_json(bundle.report);
    write_file(out_dir / "report.json", text);
    for (const auto& [name, csv] : bundle.tables) {
        write_file(out_dir / name, csv);
    }
    return sha256_hex(text);
}

std::string cmd_report(const fs::path& records_dir, const fs::path& out_dir, const SchemaSet& schemas,
                       const stats::ReportOptions& options) {
    const RecordSet records = load_records(records_dir);
    std::string digest;
    const fs::path manifest = records_dir.parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
        digest = read_json_file(manifest).value("content_digest", "");
    }
    return write_bundle(analyze_records(records, schemas, options, digest), out_dir);
}

namespace {

struct Workspace {
    SchemaSet schemas;
    TemplateSet templates;
    std::vector<Profile> profiles;
    std::optional<eval::Roster> roster;
    std::optional<TopicSet> topics;
};

std::vector<json> run_guess_who(const RunConfig& config, Workspace& ws,
                                const std::map<std::pair<std::string, Condition>, RenderedPersona>& personas,
                                Gateway& gateway) {
    std::vector<eval::GuessWhoTrial> trials;
    std::vector<Provenance> provenance;
    for (const auto& profile : ws.profiles) {
        if (profile.provenance != Provenance::fictional) {
            continue; // no golden identity to guess
        }
        for (const auto condition : config.conditions) {
            for (const auto& model : config.models) {
                for (int it = 0; it < config.iterations_for("guesswho"); ++it) {
                    trials.push_back({&personas.at({profile.entity_id, condition}), model, it});
                    provenance.push_back(profile.provenance);
                }
            }
        }
    }
    const auto verdicts = eval::run_guess_who_batch(trials, *ws.roster, ws.templates, gateway, config.parallelism);
    std::vector<json> records;
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        records.push_back(eval::guess_who_record(verdicts[i], provenance[i]));
    }
    return records;
}

std::vector<json> run_tst(const RunConfig& config, Workspace& ws,
                          const std::map<std::pair<std::string, Condition>, RenderedPersona>& personas,
                          Gateway& gateway) {
    std::vector<eval::TSTTrial> trials;
    std::vector<const Profile*> owners;
    for (const auto& profile : ws.profiles) {
        for (const auto condition : config.conditions) {
            for (const auto& model : config.models) {
                for (int it = 0; it < config.iterations_for("tst"); ++it) {
                    trials.push_back({&personas.at({profile.entity_id, condition}), model, it});
                    owners.push_back(&profile);
                }
            }
        }
    }
    const auto outcomes = eval::run_tst_batch(trials, ws.templates, gateway, config.parallelism);

    std::vector<eval::JudgeJob> jobs;
    std::vector<std::size_t> judged;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].battery || owners[i]->provenance != Provenance::fictional) {
            continue;
        }
        const auto* golden = ws.roster->find(owners[i]->entity_id);
        if (golden == nullptr) {
            throw ConfigError("fictional entity " + owners[i]->entity_id + " is not in the roster");
        }
        jobs.push_back({&*outcomes[i].battery, golden});
        judged.push_back(i);
    }
    const auto judgments =
        eval::judge_tst_batch(jobs, ws.templates, config.judge_model, gateway, config.parallelism);

    std::vector<std::vector<eval::TSTJudgment>> per_outcome(outcomes.size());
    for (std::size_t k = 0; k < judged.size(); ++k) {
        per_outcome[judged[k]] = judgments[k];
    }
    std::vector<json> records;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        // Hidden-self statements have no ground truth for real people.
        const auto state = owners[i]->provenance == Provenance::fictional ? eval::JudgingState::judged
                                                                          : eval::JudgingState::unsupported;
        records.push_back(eval::tst_record(outcomes[i], per_outcome[i], state, config.judge_model,
                                           owners[i]->provenance));
    }
    return records;
}

std::vector<json> run_inference(const RunConfig& config, Workspace& ws,
                                const std::map<std::pair<std::string, Condition>, RenderedPersona>& personas,
                                Gateway& gateway) {
    std::vector<eval::InferenceJob> jobs;
    for (const auto& profile : ws.profiles) {
        for (const auto& model : config.models) {
            jobs.push_back({&personas.at({profile.entity_id, Condition::C}), model, config.iterations_for("inference")});
        }
    }
    const auto sets = eval::run_inference_batch(jobs, ws.schemas, ws.templates, gateway, config.parallelism);
    std::map<std::string, const Profile*> golden;
    for (const auto& p : ws.profiles) {
        golden[p.entity_id] = &p;
    }
    std::vector<json> records;
    for (const auto& set : sets) {
        records.push_back(eval::inference_record(set, *golden.at(set.entity_id)));
    }
    return records;
}

std::vector<json> run_essays(const RunConfig& config, Workspace& ws,
                             const std::map<std::pair<std::string, Condition>, RenderedPersona>& personas,
                             Gateway& gateway) {
    std::map<std::string, Provenance> provenance;
    for (const auto& p : ws.profiles) {
        provenance[p.entity_id] = p.provenance;
    }
    std::vector<json> records;
    std::vector<PersonaAnswer> answers;
    for (const auto& model : config.models) {
        std::vector<EssayJob> jobs;
        for (const auto& profile : ws.profiles) {
            for (const auto condition : config.essay_conditions) {
                for (const auto& task : ws.topics->tasks()) {
                    jobs.push_back({&personas.at({profile.entity_id, condition}), task});
                }
            }
        }
        const auto outcomes =
            answer_essays(jobs, ws.templates, model, gateway, config.parallelism, config.essay_max_tokens);
        for (const auto& o : outcomes) {
            records.push_back(eval::essay_record(o, model, provenance.at(o.entity_id)));
            if (o.answer) {
                answers.push_back(*o.answer);
            }
        }
        const fs::path dir = config.models.size() == 1 ? config.paths.output / "essays"
                                                       : config.paths.output / "essays" / model;
        export_blinded_bundle(answers, dir, config.seed);
        answers.clear();
    }
    return records;
}

} // namespace

RunSummary cmd_run(const RunConfig& config, std::shared_ptr<Provider> provider) {
    config.validate();
    RunManifest manifest;
    manifest.started_at = utc_now();
    manifest.config = config.to_json();

    Workspace ws;
    ws.schemas = SchemaSet::load(config.paths.schemas);
    ws.templates = TemplateSet::load(config.paths.templates);
    ws.profiles = load_profiles(config.paths.profiles);
    if (config.batteries.contains("guesswho") || config.batteries.contains("tst")) {
        ws.roster = eval::Roster::load(config.paths.roster);
    }
    if (config.batteries.contains("essays")) {
        ws.topics = TopicSet::load(config.paths.topics);
    }
    for (const auto& profile : ws.profiles) {
        const auto report = validate_profile(profile, ws.schemas);
        if (!report.ok()) {
            throw ValidationFailure("profile " + profile.entity_id + " failed validation:\n" + report.to_text());
        }
    }

    std::set<Condition> needed(config.conditions.begin(), config.conditions.end());
    if (config.batteries.contains("inference")) {
        needed.insert(Condition::C);
    }
    if (config.batteries.contains("essays")) {
        needed.insert(config.essay_conditions.begin(), config.essay_conditions.end());
    }
    std::map<std::pair<std::string, Condition>, RenderedPersona> personas;
    for (const auto& profile : ws.profiles) {
        for (const auto condition : needed) {
            try {
                personas.emplace(std::make_pair(profile.entity_id, condition),
                                 render_condition(profile, condition, ws.templates, ws.schemas.demographics));
            } catch (const PreconditionError& e) {
                throw ConfigError(e.what());
            }
        }
    }

    auto gateway = make_gateway(config.mode, config.paths.cassette, std::move(provider),
                                std::max(config.parallelism, 1));
    const fs::path records_dir = config.paths.output / "records";
    std::map<std::string, std::vector<json>> produced;
    if (config.batteries.contains("guesswho")) {
        produced["guesswho"] = run_guess_who(config, ws, personas, *gateway);
    }
    if (config.batteries.contains("tst")) {
        produced["tst"] = run_tst(config, ws, personas, *gateway);
    }
    if (config.batteries.contains("inference")) {
        produced["inference"] = run_inference(config, ws, personas, *gateway);
    }
    if (config.batteries.contains("essays")) {
        produced["essays"] = run_essays(config, ws, personas, *gateway);
    }

    for (const auto& [battery, records] : produced) {
        const fs::path file = records_dir / (battery + ".jsonl");
        eval::write_jsonl(file, records);
        manifest.record_counts[battery] = records.size();
        manifest.record_digests[battery] = file_digest(file);
    }

    manifest.digests["schemas/demographics"] = file_digest(config.paths.schemas / "demographics.json");
    manifest.digests["schemas/bfi2s"] = file_digest(config.paths.schemas / "bfi2s.json");
    manifest.digests["schemas/pvq21"] = file_digest(config.paths.schemas / "pvq21.json");
    manifest.digests["templates"] = ws.templates.digest();
    if (ws.roster) {
        manifest.digests["roster"] = file_digest(config.paths.roster);
    }
    if (ws.topics) {
        manifest.digests["topics"] = file_digest(config.paths.topics);
    }
    if (gateway->cassette()) {
        manifest.digests["cassette"] = gateway->cassette()->digest();
    }
    std::vector<std::string> profile_digests;
    for (const auto& p : ws.profiles) {
        profile_digests.push_back(p.entity_id + ":" + sha256_hex(serialize_profile(p)));
    }
    manifest.digests["profiles"] = sha256_hex(join(profile_digests, "\n"));

    // Mode changes the cassette digest in record runs, so only replay-stable
    // inputs enter the content digest.
    json content{{"config", config.content_json()},
                 {"record_counts", manifest.record_counts},
                 {"record_digests", manifest.record_digests}};
    for (const auto& [k, v] : manifest.digests) {
        if (k != "cassette" || config.mode == GatewayMode::replay) {
            content["digests"][k] = v;
        }
    }
    manifest.content_digest = sha256_hex(content.dump());

    RecordSet set;
    set.guesswho = produced["guesswho"];
    set.tst = produced["tst"];
    set.inference = produced["inference"];
    set.essays = produced["essays"];
    RunSummary summary;
    summary.report_digest = write_bundle(analyze_records(set, ws.schemas, config.report, manifest.content_digest),
                                         config.paths.output / "reports");
    manifest.report_digest = summary.report_digest;
    manifest.finished_at = utc_now();
    write_file(config.paths.output / "manifest.json", dump_json(manifest.to_json()));
    summary.record_counts = manifest.record_counts;
    summary.manifest = std::move(manifest);
    return summary;
}

CassetteInfo cmd_cassette_inspect(const fs::path& path) {
    const auto tape = Cassette::open(path, false);
    CassetteInfo info;
    std::set<std::string> hashes;
    for (const auto& e : tape->entries()) {
        ++info.entries;
        hashes.insert(e.request_hash);
        ++info.per_model[e.canonical_request.value("model_id", "")];
    }
    info.hashes = hashes.size();
    info.digest = tape->digest();
    return info;
}

CassetteInfo cmd_cassette_verify(const fs::path& path) {
    // open() re-hashes every canonical request and rejects mismatches.
    const auto tape = Cassette::open(path, false);
    for (const auto& e : tape->entries()) {
        if (request_hash(request_from_json(e.canonical_request)) != e.request_hash) {
            throw ParseError(path.string(), "request hash mismatch for " + e.request_hash);
        }
    }
    return cmd_cassette_inspect(path);
}

} // namespace personakit::cli
