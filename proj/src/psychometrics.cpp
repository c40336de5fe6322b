#include "personakit/psychometrics.hpp"

#include "personakit/error.hpp"

#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>

namespace personakit {

std::string_view to_string(InstrumentId id) {
    switch (id) {
    case InstrumentId::bfi2s:
        return "BFI2S";
    case InstrumentId::pvq21:
        return "PVQ21";
    }
    return "?";
}

InstrumentId parse_instrument_id(std::string_view text) {
    if (text == "BFI2S") {
        return InstrumentId::bfi2s;
    }
    if (text == "PVQ21") {
        return InstrumentId::pvq21;
    }
    throw ConfigError("unknown instrument id '" + std::string(text) + "'");
}

namespace {

template <typename T>
T field(const json& obj, const char* key, std::string_view origin) {
    if (!obj.contains(key)) {
        throw ParseError(std::string(origin), std::string("missing key '") + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ParseError(std::string(origin) + "/" + key, e.what());
    }
}

void check_shape(const InstrumentSchema& schema, std::string_view origin) {
    std::set<std::string> item_ids;
    for (const auto& item : schema.items()) {
        if (!item_ids.insert(item.item_id).second) {
            throw ParseError(std::string(origin), "duplicate item id " + item.item_id);
        }
        if (schema.find_group(item.group_id) == nullptr) {
            throw ParseError(std::string(origin),
                             "item " + item.item_id + " references unknown group " + item.group_id);
        }
    }
    const auto fail = [&](const std::string& message) { throw ParseError(std::string(origin), message); };

    if (schema.id() == InstrumentId::bfi2s) {
        if (schema.items().size() != 30) {
            fail("BFI2S expects 30 items, found " + std::to_string(schema.items().size()));
        }
        if (schema.groups().size() != 15) {
            fail("BFI2S expects 15 facets, found " + std::to_string(schema.groups().size()));
        }
        if (schema.domains().size() != 5) {
            fail("BFI2S expects 5 domains, found " + std::to_string(schema.domains().size()));
        }
        for (const auto& group : schema.groups()) {
            if (schema.items_in_group(group.group_id).size() != 2) {
                fail("BFI2S facet " + group.group_id + " must have 2 items");
            }
        }
        for (const auto& domain : schema.domains()) {
            if (schema.groups_in_domain(domain.domain_id).size() != 3) {
                fail("BFI2S domain " + domain.domain_id + " must have 3 facets");
            }
        }
    } else {
        if (schema.items().size() != 21) {
            fail("PVQ21 expects 21 items, found " + std::to_string(schema.items().size()));
        }
        if (schema.groups().size() != 10) {
            fail("PVQ21 expects 10 values, found " + std::to_string(schema.groups().size()));
        }
        for (const auto& group : schema.groups()) {
            if (schema.items_in_group(group.group_id).empty()) {
                fail("PVQ21 value " + group.group_id + " has no items");
            }
        }
    }
}

} // namespace

InstrumentSchema InstrumentSchema::from_json(const json& doc, std::string_view origin) {
    InstrumentSchema schema;
    schema.id_ = parse_instrument_id(field<std::string>(doc, "instrument_id", origin));
    schema.scale_min_ = field<int>(doc, "scale_min", origin);
    schema.scale_max_ = field<int>(doc, "scale_max", origin);
    if (schema.scale_min_ != 1 || schema.scale_max_ != 7) {
        throw ParseError(std::string(origin), "instruments are administered on a 1-7 scale");
    }
    schema.stem_ = doc.value("stem", "");
    for (const auto& d : doc.value("domains", json::array())) {
        schema.domains_.push_back({field<std::string>(d, "domain_id", origin), field<std::string>(d, "label", origin)});
    }
    for (const auto& g : field<json>(doc, "groups", origin)) {
        schema.groups_.push_back({field<std::string>(g, "group_id", origin), g.value("parent_domain", ""),
                                  field<std::string>(g, "label", origin)});
    }
    for (const auto& i : field<json>(doc, "items", origin)) {
        schema.items_.push_back({field<std::string>(i, "item_id", origin), field<std::string>(i, "text", origin),
                                 field<std::string>(i, "group_id", origin), i.value("reverse_keyed", false)});
    }
    check_shape(schema, origin);
    return schema;
}

InstrumentSchema InstrumentSchema::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.string());
}

const InstrumentItem* InstrumentSchema::find_item(std::string_view item_id) const {
    for (const auto& item : items_) {
        if (item.item_id == item_id) {
            return &item;
        }
    }
    return nullptr;
}

const InstrumentGroup* InstrumentSchema::find_group(std::string_view group_id) const {
    for (const auto& group : groups_) {
        if (group.group_id == group_id) {
            return &group;
        }
    }
    return nullptr;
}

std::vector<const InstrumentItem*> InstrumentSchema::items_in_group(std::string_view group_id) const {
    std::vector<const InstrumentItem*> out;
    for (const auto& item : items_) {
        if (item.group_id == group_id) {
            out.push_back(&item);
        }
    }
    return out;
}

std::vector<const InstrumentGroup*> InstrumentSchema::groups_in_domain(std::string_view domain_id) const {
    std::vector<const InstrumentGroup*> out;
    for (const auto& group : groups_) {
        if (group.parent_domain == domain_id) {
            out.push_back(&group);
        }
    }
    return out;
}

json to_json(const ScaleResponseSet& set) {
    json responses = json::object();
    for (const auto& [item, value] : set.responses) {
        responses[item] = value;
    }
    return json{{"instrument_id", to_string(set.instrument_id)}, {"responses", responses}};
}

ScaleResponseSet response_set_from_json(const json& doc) {
    ScaleResponseSet set;
    set.instrument_id = parse_instrument_id(doc.at("instrument_id").get<std::string>());
    for (const auto& [item, value] : doc.at("responses").items()) {
        set.responses[item] = value.get<int>();
    }
    return set;
}

std::vector<std::string> missing_items(const ScaleResponseSet& set, const InstrumentSchema& schema) {
    std::vector<std::string> missing;
    for (const auto& item : schema.items()) {
        if (!set.responses.count(item.item_id)) {
            missing.push_back(item.item_id);
        }
    }
    return missing;
}

std::vector<double> ScoreProfile::group_vector(const InstrumentSchema& schema) const {
    std::vector<double> out;
    out.reserve(schema.groups().size());
    for (const auto& group : schema.groups()) {
        out.push_back(group_means.at(group.group_id));
    }
    return out;
}

int apply_reverse_key(int value, bool reverse, int scale_min, int scale_max) {
    if (value < scale_min || value > scale_max) {
        throw DomainError("response " + std::to_string(value) + " outside [" + std::to_string(scale_min) + ", " +
                          std::to_string(scale_max) + "]");
    }
    return reverse ? scale_min + scale_max - value : value;
}

ScoreProfile score(const ScaleResponseSet& responses, const InstrumentSchema& schema) {
    if (responses.instrument_id != schema.id()) {
        throw DomainError("response set for " + std::string(to_string(responses.instrument_id)) +
                          " scored against " + std::string(to_string(schema.id())));
    }
    if (auto missing = missing_items(responses, schema); !missing.empty()) {
        throw IncompleteResponses(std::string(to_string(schema.id())), std::move(missing));
    }
    for (const auto& [item_id, value] : responses.responses) {
        if (schema.find_item(item_id) == nullptr) {
            throw DomainError("unknown item " + item_id + " for " + std::string(to_string(schema.id())));
        }
    }

    ScoreProfile profile;
    profile.instrument_id = schema.id();
    for (const auto& group : schema.groups()) {
        double sum = 0.0;
        const auto items = schema.items_in_group(group.group_id);
        for (const auto* item : items) {
            sum += apply_reverse_key(responses.responses.at(item->item_id), item->reverse_keyed,
                                     schema.scale_min(), schema.scale_max());
        }
        profile.group_means[group.group_id] = sum / static_cast<double>(items.size());
    }
    for (const auto& domain : schema.domains()) {
        double sum = 0.0;
        const auto facets = schema.groups_in_domain(domain.domain_id);
        for (const auto* facet : facets) {
            sum += profile.group_means.at(facet->group_id);
        }
        profile.domain_means[domain.domain_id] = sum / static_cast<double>(facets.size());
    }
    return profile;
}

std::string_view level_phrase(double score) {
    if (!(score >= 1.0 && score <= 7.0)) {
        throw DomainError("score outside [1, 7]");
    }
    if (score < 1.5) {
        return "extremely low";
    }
    if (score < 2.5) {
        return "well below average";
    }
    if (score < 3.5) {
        return "slightly below average";
    }
    if (score < 4.5) {
        return "average";
    }
    if (score < 5.5) {
        return "slightly above average";
    }
    if (score < 6.5) {
        return "well above average";
    }
    return "extremely high";
}

TraitDescription describe(double score, std::string_view subject_label) {
    TraitDescription d;
    d.subject = std::string(subject_label);
    d.level_phrase = std::string(level_phrase(score));
    d.sentence = d.subject + " is " + d.level_phrase + ".";
    return d;
}

std::vector<TraitDescription> describe_profile(const ScoreProfile& profile, const InstrumentSchema& schema) {
    std::vector<TraitDescription> out;
    for (const auto& domain : schema.domains()) {
        out.push_back(describe(profile.domain_means.at(domain.domain_id), domain.label));
    }
    for (const auto& group : schema.groups()) {
        out.push_back(describe(profile.group_means.at(group.group_id), group.label));
    }
    return out;
}

std::string scores_csv(const std::vector<ScoreRow>& rows) {
    std::ostringstream ss;
    ss << "entity_id,group_id,mean\n";
    ss << std::setprecision(17);
    for (const auto& row : rows) {
        ss << row.entity_id << ',' << row.group_id << ',' << row.mean << '\n';
    }
    return ss.str();
}

} // namespace personakit
