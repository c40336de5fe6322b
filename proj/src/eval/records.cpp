#include "personakit/eval/records.hpp"

#include "personakit/error.hpp"

namespace personakit::eval {

namespace {

json header(std::string_view battery, const std::string& entity, Condition condition, const std::string& model,
            int iteration, Provenance provenance) {
    return json{{"schema_version", kRecordSchemaVersion},
                {"battery", battery},
                {"entity_id", entity},
                {"condition", to_string(condition)},
                {"model_id", model},
                {"iteration", iteration},
                {"provenance", to_string(provenance)}};
}

json social_json(const SocialIdentity& social) {
    json out = json::object();
    for (const auto& [k, v] : social.answers) {
        out[k] = v;
    }
    return out;
}

SocialIdentity social_from(const json& doc) {
    SocialIdentity social;
    for (const auto& [k, v] : doc.items()) {
        social.answers[k] = v.get<std::string>();
    }
    return social;
}

} // namespace

void check_record(const json& record, std::string_view battery, std::string_view origin) {
    if (!record.is_object() || record.value("schema_version", -1) != kRecordSchemaVersion) {
        throw ParseError(std::string(origin), "record schema_version " +
                                                  (record.contains("schema_version")
                                                       ? record["schema_version"].dump()
                                                       : std::string("missing")) +
                                                  " is not " + std::to_string(kRecordSchemaVersion));
    }
    if (record.value("battery", "") != battery) {
        throw ParseError(std::string(origin), "expected a " + std::string(battery) + " record");
    }
}

json guess_who_record(const GuessWhoVerdict& v, Provenance provenance) {
    json r = header("guesswho", v.entity_id, v.condition, v.model_id, v.iteration, provenance);
    r["status"] = to_string(v.status);
    r["guessed_character"] = v.guessed_character;
    r["guessed_series"] = v.guessed_series;
    r["reason"] = v.reason;
    r["character_match"] = v.character_match;
    r["series_match"] = v.series_match;
    r["overall_true"] = v.overall_true;
    r["raw_reply"] = v.raw_reply;
    r["error"] = v.error;
    r["transcript_ref"] = v.transcript_ref;
    return r;
}

GuessWhoVerdict guess_who_from_record(const json& r) {
    check_record(r, "guesswho", "guesswho record");
    GuessWhoVerdict v;
    v.entity_id = r.at("entity_id").get<std::string>();
    v.condition = parse_condition(r.at("condition").get<std::string>());
    v.model_id = r.at("model_id").get<std::string>();
    v.iteration = r.at("iteration").get<int>();
    v.status = parse_trial_status(r.at("status").get<std::string>());
    v.guessed_character = r.value("guessed_character", "");
    v.guessed_series = r.value("guessed_series", "");
    v.reason = r.value("reason", "");
    v.character_match = r.at("character_match").get<bool>();
    v.series_match = r.at("series_match").get<bool>();
    v.overall_true = r.at("overall_true").get<bool>();
    v.raw_reply = r.value("raw_reply", "");
    v.error = r.value("error", "");
    v.transcript_ref = r.value("transcript_ref", "");
    return v;
}

json tst_record(const TSTOutcome& o, const std::vector<TSTJudgment>& judgments, JudgingState judging,
                const std::string& judge_model, Provenance provenance) {
    json r = header("tst", o.entity_id, o.condition, o.model_id, o.iteration, provenance);
    r["status"] = o.battery ? "ok" : "battery_failure";
    r["open_self"] = o.battery ? o.battery->open_self : std::vector<std::string>{};
    r["hidden_self"] = o.battery ? o.battery->hidden_self : std::vector<std::string>{};
    r["flags"] = o.battery ? o.battery->flags : std::vector<std::string>{};
    r["repair_attempts"] = o.repair_attempts;
    r["error"] = o.error;
    r["transcript"] = o.transcript;
    r["judging"] = judging == JudgingState::judged ? "judged" : "unsupported";
    r["judge_model"] = judge_model;
    json js = json::array();
    for (const auto& j : judgments) {
        js.push_back(json{{"statement_ref", j.statement_ref},
                          {"statement", j.statement},
                          {"verdict", j.verdict ? json(*j.verdict) : json(nullptr)},
                          {"explanation", j.explanation},
                          {"repaired", j.repaired},
                          {"transcript_ref", j.transcript_ref}});
    }
    r["judgments"] = js;
    return r;
}

TSTRecord tst_from_record(const json& r) {
    check_record(r, "tst", "tst record");
    TSTRecord rec;
    auto& o = rec.outcome;
    o.entity_id = r.at("entity_id").get<std::string>();
    o.condition = parse_condition(r.at("condition").get<std::string>());
    o.model_id = r.at("model_id").get<std::string>();
    o.iteration = r.at("iteration").get<int>();
    o.repair_attempts = r.value("repair_attempts", 0);
    o.error = r.value("error", "");
    o.transcript = r.value("transcript", std::vector<std::string>{});
    if (r.at("status") == "ok") {
        TSTBattery b;
        b.entity_id = o.entity_id;
        b.condition = o.condition;
        b.model_id = o.model_id;
        b.iteration = o.iteration;
        b.open_self = r.at("open_self").get<std::vector<std::string>>();
        b.hidden_self = r.at("hidden_self").get<std::vector<std::string>>();
        b.flags = r.value("flags", std::vector<std::string>{});
        o.battery = std::move(b);
    }
    rec.judging = r.value("judging", "judged") == "judged" ? JudgingState::judged : JudgingState::unsupported;
    rec.provenance = parse_provenance(r.at("provenance").get<std::string>());
    for (const auto& j : r.value("judgments", json::array())) {
        TSTJudgment judgment;
        judgment.statement_ref = j.at("statement_ref").get<std::string>();
        judgment.statement = j.value("statement", "");
        if (!j.at("verdict").is_null()) {
            judgment.verdict = j.at("verdict").get<bool>();
        }
        judgment.explanation = j.value("explanation", "");
        judgment.repaired = j.value("repaired", false);
        judgment.transcript_ref = j.value("transcript_ref", "");
        rec.judgments.push_back(std::move(judgment));
    }
    return rec;
}

json inference_record(const InferenceAnswerSet& a, const Profile& golden) {
    json r = header("inference", a.entity_id, Condition::C, a.model_id, a.iteration, golden.provenance);
    r["answers"] = json{{"social", social_json(a.inferred_social)},
                        {"bfi", to_json(a.inferred_bfi)},
                        {"pvq", to_json(a.inferred_pvq)}};
    r["golden"] = json{{"social", social_json(golden.social)},
                       {"bfi", to_json(golden.personal_raw.bfi_responses)},
                       {"pvq", to_json(golden.personal_raw.pvq_responses)}};
    r["reasked"] = a.reasked;
    r["missing"] = a.missing;
    r["failed"] = a.failed;
    r["error"] = a.error;
    return r;
}

InferenceRecord inference_from_record(const json& r) {
    check_record(r, "inference", "inference record");
    InferenceRecord rec;
    auto& a = rec.answers;
    a.entity_id = r.at("entity_id").get<std::string>();
    a.model_id = r.at("model_id").get<std::string>();
    a.iteration = r.at("iteration").get<int>();
    a.inferred_social = social_from(r.at("answers").at("social"));
    a.inferred_bfi = response_set_from_json(r.at("answers").at("bfi"));
    a.inferred_pvq = response_set_from_json(r.at("answers").at("pvq"));
    a.reasked = r.value("reasked", std::vector<std::string>{});
    a.missing = r.value("missing", std::vector<std::string>{});
    a.failed = r.value("failed", false);
    a.error = r.value("error", "");
    rec.golden.entity_id = a.entity_id;
    rec.golden.provenance = parse_provenance(r.at("provenance").get<std::string>());
    rec.golden.social = social_from(r.at("golden").at("social"));
    rec.golden.personal_raw.bfi_responses = response_set_from_json(r.at("golden").at("bfi"));
    rec.golden.personal_raw.pvq_responses = response_set_from_json(r.at("golden").at("pvq"));
    return rec;
}

json essay_record(const EssayOutcome& o, const std::string& model_id, Provenance provenance) {
    json r = header("essays", o.entity_id, o.condition, model_id, 0, provenance);
    r["topic_id"] = o.topic_id;
    r["status"] = o.answer ? "ok" : "failure";
    r["text"] = o.answer ? o.answer->text : "";
    r["transcript_ref"] = o.answer ? o.answer->transcript_ref : "";
    r["error"] = o.error;
    return r;
}

EssayOutcome essay_from_record(const json& r) {
    check_record(r, "essays", "essay record");
    EssayOutcome o;
    o.entity_id = r.at("entity_id").get<std::string>();
    o.condition = parse_condition(r.at("condition").get<std::string>());
    o.topic_id = r.at("topic_id").get<std::string>();
    o.error = r.value("error", "");
    if (r.value("status", "") == "ok") {
        PersonaAnswer a;
        a.entity_id = o.entity_id;
        a.condition = o.condition;
        a.topic_id = o.topic_id;
        a.text = r.at("text").get<std::string>();
        a.transcript_ref = r.value("transcript_ref", "");
        a.model_id = r.at("model_id").get<std::string>();
        o.answer = std::move(a);
    }
    return o;
}

void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records) {
    std::string out;
    for (const auto& r : records) {
        out += r.dump();
        out += '\n';
    }
    write_file(path, out);
}

std::vector<json> read_jsonl(const std::filesystem::path& path) {
    std::vector<json> records;
    const auto lines = split_lines(read_file(path));
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (trim(lines[i]).empty()) {
            continue;
        }
        try {
            records.push_back(json::parse(lines[i]));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ":" + std::to_string(i + 1), e.what());
        }
    }
    return records;
}

} // namespace personakit::eval
