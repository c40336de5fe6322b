#include "personakit/profile.hpp"

#include "personakit/error.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace personakit {

namespace {

AnswerKind parse_kind(const std::string& text, std::string_view origin) {
    if (text == "categorical") {
        return AnswerKind::categorical;
    }
    if (text == "ordinal") {
        return AnswerKind::ordinal;
    }
    if (text == "free") {
        return AnswerKind::free;
    }
    throw ParseError(std::string(origin), "unknown answer kind '" + text + "'");
}

// Reads doc[key] as T, reporting the JSON pointer on failure.
template <typename T>
T read(const json& doc, const std::string& pointer, std::string_view origin) {
    try {
        return doc.at(json::json_pointer(pointer)).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string(origin) + "#" + pointer, e.what());
    }
}

std::vector<std::string> word_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (const char c : text) {
        const auto uc = static_cast<unsigned char>(c);
        if (std::isalnum(uc) != 0 || uc >= 0x80) {
            current.push_back(static_cast<char>(std::tolower(uc)));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

// True when the token sequence of `name` occurs contiguously in `text`.
bool mentions_name(std::string_view text, std::string_view name) {
    const auto hay = word_tokens(text);
    const auto needle = word_tokens(name);
    if (needle.empty() || needle.size() > hay.size()) {
        return false;
    }
    return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

} // namespace

std::optional<int> DemographicItem::ordinal_code(std::string_view value) const {
    if (kind != AnswerKind::ordinal) {
        return std::nullopt;
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (to_lower(levels[i]) == to_lower(trim(value))) {
            return static_cast<int>(i);
        }
    }
    return std::nullopt;
}

std::optional<std::string> DemographicItem::canonical_answer(std::string_view value) const {
    const std::string cleaned = trim(value);
    if (cleaned.empty() || cleaned.find('\n') != std::string::npos) {
        return std::nullopt;
    }
    const std::vector<std::string>* allowed = nullptr;
    if (kind == AnswerKind::ordinal) {
        allowed = &levels;
    } else if (kind == AnswerKind::categorical && !options.empty()) {
        allowed = &options;
    }
    if (allowed == nullptr) {
        return cleaned;
    }
    for (const auto& option : *allowed) {
        if (to_lower(option) == to_lower(cleaned)) {
            return option;
        }
    }
    return std::nullopt;
}

DemographicSchema DemographicSchema::from_json(const json& doc, std::string_view origin) {
    DemographicSchema schema;
    schema.version_ = doc.value("version", 1);
    const auto& items = doc.at("items");
    for (std::size_t i = 0; i < items.size(); ++i) {
        const std::string where = "/items/" + std::to_string(i);
        const auto& entry = items[i];
        DemographicItem item;
        item.item_id = read<std::string>(doc, where + "/item_id", origin);
        item.label = read<std::string>(doc, where + "/label", origin);
        item.kind = parse_kind(read<std::string>(doc, where + "/kind", origin), origin);
        item.levels = entry.value("levels", std::vector<std::string>{});
        item.options = entry.value("options", std::vector<std::string>{});
        if (entry.contains("conditional_on")) {
            item.conditional_on = entry.at("conditional_on").get<std::string>();
        }
        if (item.kind == AnswerKind::ordinal && item.levels.size() < 2) {
            throw ParseError(std::string(origin) + "#" + where, "ordinal item needs at least 2 levels");
        }
        if (schema.find(item.item_id) != nullptr) {
            throw ParseError(std::string(origin) + "#" + where, "duplicate item id " + item.item_id);
        }
        schema.items_.push_back(std::move(item));
    }
    for (const auto& item : schema.items_) {
        if (item.conditional_on && schema.find(*item.conditional_on) == nullptr) {
            throw ParseError(std::string(origin),
                             item.item_id + " is conditional on unknown item " + *item.conditional_on);
        }
    }
    return schema;
}

DemographicSchema DemographicSchema::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.string());
}

const DemographicItem* DemographicSchema::find(std::string_view item_id) const {
    for (const auto& item : items_) {
        if (item.item_id == item_id) {
            return &item;
        }
    }
    return nullptr;
}

std::size_t DemographicSchema::base_count() const {
    return static_cast<std::size_t>(
        std::count_if(items_.begin(), items_.end(), [](const auto& item) { return !item.conditional(); }));
}

bool PersonalIdentityNarrative::complete() const {
    return !personality_expert.empty() && !personality_everyday.empty() && !values_expert.empty() &&
           !values_everyday.empty();
}

std::string_view to_string(Provenance provenance) {
    return provenance == Provenance::human ? "human" : "fictional";
}

Provenance parse_provenance(std::string_view text) {
    if (text == "fictional") {
        return Provenance::fictional;
    }
    if (text == "human") {
        return Provenance::human;
    }
    throw ConfigError("unknown provenance '" + std::string(text) + "'");
}

json to_json(const Profile& profile) {
    json meta = {{"entity_id", profile.entity_id}, {"provenance", to_string(profile.provenance)}};
    if (profile.display_name) {
        meta["display_name"] = *profile.display_name;
    }
    if (!profile.name_tokens.empty()) {
        meta["name_tokens"] = profile.name_tokens;
    }
    json social = json::object();
    for (const auto& [id, value] : profile.social.answers) {
        social[id] = value;
    }
    json personal = {{"bfi", to_json(profile.personal_raw.bfi_responses)},
                     {"pvq", to_json(profile.personal_raw.pvq_responses)}};
    if (profile.personal_narrative) {
        const auto& n = *profile.personal_narrative;
        personal["narrative"] = {{"personality_expert", n.personality_expert},
                                 {"personality_everyday", n.personality_everyday},
                                 {"values_expert", n.values_expert},
                                 {"values_everyday", n.values_everyday}};
    }
    json context = {{"weekday_essay", profile.context.weekday_essay},
                    {"weekend_essay", profile.context.weekend_essay},
                    {"loves", profile.context.loves},
                    {"hates", profile.context.hates}};
    return json{{"meta", meta}, {"social", social}, {"personal", personal}, {"context", context}};
}

Profile profile_from_json(const json& doc, std::string_view origin) {
    if (!doc.is_object()) {
        throw ParseError(std::string(origin), "profile document must be a JSON object");
    }
    for (const char* key : {"meta", "social", "personal", "context"}) {
        if (!doc.contains(key)) {
            throw ParseError(std::string(origin) + "#/" + key, "missing top-level key");
        }
    }
    Profile p;
    p.entity_id = read<std::string>(doc, "/meta/entity_id", origin);
    p.provenance = parse_provenance(read<std::string>(doc, "/meta/provenance", origin));
    if (doc["meta"].contains("display_name")) {
        p.display_name = read<std::string>(doc, "/meta/display_name", origin);
    }
    if (doc["meta"].contains("name_tokens")) {
        p.name_tokens = read<std::vector<std::string>>(doc, "/meta/name_tokens", origin);
    }
    for (const auto& [id, value] : doc.at("social").items()) {
        p.social.answers[id] = read<std::string>(doc, "/social/" + id, origin);
    }
    const auto response_set = [&](const std::string& pointer, InstrumentId expected) {
        ScaleResponseSet set;
        set.instrument_id = parse_instrument_id(read<std::string>(doc, pointer + "/instrument_id", origin));
        if (set.instrument_id != expected) {
            throw ParseError(std::string(origin) + "#" + pointer, "wrong instrument");
        }
        for (const auto& [item, value] : doc.at(json::json_pointer(pointer + "/responses")).items()) {
            set.responses[item] = read<int>(doc, pointer + "/responses/" + item, origin);
        }
        return set;
    };
    p.personal_raw.bfi_responses = response_set("/personal/bfi", InstrumentId::bfi2s);
    p.personal_raw.pvq_responses = response_set("/personal/pvq", InstrumentId::pvq21);
    if (doc["personal"].contains("narrative")) {
        PersonalIdentityNarrative n;
        n.personality_expert = read<std::string>(doc, "/personal/narrative/personality_expert", origin);
        n.personality_everyday = read<std::string>(doc, "/personal/narrative/personality_everyday", origin);
        n.values_expert = read<std::string>(doc, "/personal/narrative/values_expert", origin);
        n.values_everyday = read<std::string>(doc, "/personal/narrative/values_everyday", origin);
        p.personal_narrative = std::move(n);
    }
    p.context.weekday_essay = read<std::string>(doc, "/context/weekday_essay", origin);
    p.context.weekend_essay = read<std::string>(doc, "/context/weekend_essay", origin);
    p.context.loves = read<std::vector<std::string>>(doc, "/context/loves", origin);
    p.context.hates = read<std::vector<std::string>>(doc, "/context/hates", origin);
    return p;
}

Profile load_profile(const std::filesystem::path& path) {
    return profile_from_json(read_json_file(path), path.string());
}

std::string serialize_profile(const Profile& profile) {
    return dump_json(to_json(profile));
}

SchemaSet SchemaSet::load(const std::filesystem::path& dir) {
    return SchemaSet{DemographicSchema::load(dir / "demographics.json"), InstrumentSchema::load(dir / "bfi2s.json"),
                     InstrumentSchema::load(dir / "pvq21.json")};
}

bool ValidationReport::ok() const {
    return error_count() == 0;
}

std::size_t ValidationReport::error_count() const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [](const auto& v) { return v.severity == Severity::error; }));
}

std::size_t ValidationReport::warning_count() const {
    return violations.size() - error_count();
}

std::string ValidationReport::to_text() const {
    std::ostringstream ss;
    for (const auto& v : violations) {
        ss << (v.severity == Severity::error ? "error" : "warning") << ' ' << v.path << ": " << v.message << '\n';
    }
    return ss.str();
}

ValidationReport validate_profile(const Profile& profile, const DemographicSchema& schema,
                                  const LengthPolicy& policy) {
    ValidationReport report;
    const auto error = [&](std::string path, std::string message) {
        report.violations.push_back({std::move(path), std::move(message), Severity::error});
    };
    const auto warning = [&](std::string path, std::string message) {
        report.violations.push_back({std::move(path), std::move(message), Severity::warning});
    };

    if (trim(profile.entity_id).empty()) {
        error("meta.entity_id", "empty entity id");
    }
    if (profile.provenance == Provenance::human && profile.display_name) {
        error("meta.display_name", "human profiles carry no display name");
    }

    for (const auto& item : schema.items()) {
        const auto it = profile.social.answers.find(item.item_id);
        const std::string path = "social." + item.item_id;
        if (it == profile.social.answers.end()) {
            if (!item.conditional()) {
                error(path, "required item is unanswered");
            }
            continue;
        }
        const std::string& value = it->second;
        if (trim(value).empty()) {
            error(path, "empty answer");
            continue;
        }
        if (value.find('\n') != std::string::npos || utf8_length(value) > 120) {
            error(path, "answer must be a short plain value, not a paragraph");
            continue;
        }
        if (!item.canonical_answer(value)) {
            error(path, "'" + value + "' is not one of the declared " +
                            (item.kind == AnswerKind::ordinal ? "levels" : "options"));
        }
    }
    for (const auto& [id, value] : profile.social.answers) {
        if (schema.find(id) == nullptr) {
            error("social." + id, "unknown demographic item");
        }
    }

    const auto check_list = [&](const std::vector<std::string>& list, const std::string& name) {
        if (list.size() != 5) {
            error("context." + name, name + ": expected 5, found " + std::to_string(list.size()));
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            if (trim(list[i]).empty()) {
                error("context." + name + "[" + std::to_string(i) + "]", "empty entry");
            }
        }
    };
    check_list(profile.context.loves, "loves");
    check_list(profile.context.hates, "hates");

    const std::size_t weekday = utf8_length(profile.context.weekday_essay);
    const std::size_t weekend = utf8_length(profile.context.weekend_essay);
    if (weekday == 0) {
        error("context.weekday_essay", "empty essay");
    }
    if (weekend == 0) {
        error("context.weekend_essay", "empty essay");
    }
    if (profile.provenance == Provenance::human) {
        for (const auto& [name, length] : {std::pair{"weekday_essay", weekday}, std::pair{"weekend_essay", weekend}}) {
            if (length > 0 && (length < policy.human_essay_min || length > policy.human_essay_max)) {
                warning(std::string("context.") + name,
                        std::to_string(length) + " characters, outside [" + std::to_string(policy.human_essay_min) +
                            ", " + std::to_string(policy.human_essay_max) + "]");
            }
        }
    } else {
        const std::size_t combined = weekday + weekend;
        if (combined < policy.fictional_combined_min || combined > policy.fictional_combined_max) {
            warning("context", "combined essay length " + std::to_string(combined) + " characters, outside [" +
                                   std::to_string(policy.fictional_combined_min) + ", " +
                                   std::to_string(policy.fictional_combined_max) + "]");
        }
    }

    if (profile.provenance == Provenance::human && !profile.name_tokens.empty()) {
        std::vector<std::pair<std::string, std::string>> fields = {
            {"context.weekday_essay", profile.context.weekday_essay},
            {"context.weekend_essay", profile.context.weekend_essay},
        };
        for (std::size_t i = 0; i < profile.context.loves.size(); ++i) {
            fields.emplace_back("context.loves[" + std::to_string(i) + "]", profile.context.loves[i]);
        }
        for (std::size_t i = 0; i < profile.context.hates.size(); ++i) {
            fields.emplace_back("context.hates[" + std::to_string(i) + "]", profile.context.hates[i]);
        }
        for (const auto& [id, value] : profile.social.answers) {
            fields.emplace_back("social." + id, value);
        }
        if (profile.personal_narrative) {
            const auto& n = *profile.personal_narrative;
            fields.emplace_back("personal.narrative.personality_expert", n.personality_expert);
            fields.emplace_back("personal.narrative.personality_everyday", n.personality_everyday);
            fields.emplace_back("personal.narrative.values_expert", n.values_expert);
            fields.emplace_back("personal.narrative.values_everyday", n.values_everyday);
        }
        for (const auto& [path, text] : fields) {
            for (const auto& name : profile.name_tokens) {
                if (mentions_name(text, name)) {
                    error(path, "contains the declared real name '" + name + "'");
                }
            }
        }
    }
    return report;
}

ValidationReport validate_profile(const Profile& profile, const SchemaSet& schemas, const LengthPolicy& policy) {
    ValidationReport report = validate_profile(profile, schemas.demographics, policy);
    const auto check = [&](const ScaleResponseSet& set, const InstrumentSchema& schema, const std::string& key) {
        for (const auto& id : missing_items(set, schema)) {
            report.violations.push_back({"personal." + key + "." + id, "unanswered item", Severity::error});
        }
        for (const auto& [id, value] : set.responses) {
            if (schema.find_item(id) == nullptr) {
                report.violations.push_back({"personal." + key + "." + id, "unknown item", Severity::error});
            } else if (value < schema.scale_min() || value > schema.scale_max()) {
                report.violations.push_back(
                    {"personal." + key + "." + id, "response " + std::to_string(value) + " out of range",
                     Severity::error});
            }
        }
    };
    check(profile.personal_raw.bfi_responses, schemas.bfi, "bfi");
    check(profile.personal_raw.pvq_responses, schemas.pvq, "pvq");
    return report;
}

} // namespace personakit
