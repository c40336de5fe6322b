#include "personakit/render.hpp"

#include "personakit/error.hpp"

#include <algorithm>

namespace personakit {

TemplateSet TemplateSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ConfigError("template directory not found: " + dir.string());
    }
    std::map<std::string, std::string> templates;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".txt") {
            templates[entry.path().stem().string()] = read_file(entry.path());
        }
    }
    return from_map(std::move(templates));
}

TemplateSet TemplateSet::from_map(std::map<std::string, std::string> templates) {
    TemplateSet set;
    for (auto& [name, text] : templates) {
        set.templates_.emplace(name, std::move(text));
    }
    return set;
}

const std::string& TemplateSet::get(std::string_view name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) {
        throw ConfigError("missing template '" + std::string(name) + "'");
    }
    return it->second;
}

bool TemplateSet::contains(std::string_view name) const {
    return templates_.find(name) != templates_.end();
}

std::string TemplateSet::digest() const {
    std::string material;
    for (const auto& [name, text] : templates_) {
        material += name + '\0' + sha256_hex(text) + '\n';
    }
    return sha256_hex(material);
}

bool RenderedPersona::has_section(std::string_view label) const {
    return std::any_of(profile_sections.begin(), profile_sections.end(),
                       [&](const auto& s) { return s.label == label; });
}

std::vector<std::string> RenderedPersona::section_labels() const {
    std::vector<std::string> labels;
    for (const auto& s : profile_sections) {
        labels.push_back(s.label);
    }
    return labels;
}

std::string RenderedPersona::profile_text() const {
    std::vector<std::string> blocks;
    for (const auto& s : profile_sections) {
        blocks.push_back(s.text);
    }
    return join(blocks, "\n\n");
}

namespace {

std::string bullet_list(const std::vector<std::string>& entries) {
    std::vector<std::string> lines;
    for (const auto& e : entries) {
        lines.push_back("- " + e);
    }
    return join(lines, "\n");
}

std::string demographics_block(const SocialIdentity& social, const DemographicSchema& schema) {
    std::vector<std::string> lines;
    for (const auto& item : schema.items()) {
        const auto it = social.answers.find(item.item_id);
        if (it != social.answers.end()) {
            lines.push_back("- " + item.label + ": " + it->second);
        }
    }
    return join(lines, "\n");
}

std::string registers(const TemplateSet& templates, const std::string& kind, const std::string& expert,
                      const std::string& everyday) {
    return fill_template(templates.get("register_layout"),
                         {{"kind", kind}, {"expert", expert}, {"everyday", everyday}});
}

} // namespace

RenderedPersona render_condition(const Profile& profile, Condition condition, const TemplateSet& templates,
                                 const DemographicSchema& schema) {
    const ComponentSet parts = components(condition);
    if (parts.personal && !(profile.personal_narrative && profile.personal_narrative->complete())) {
        throw PreconditionError("profile " + profile.entity_id + " has no personality/value narratives; run " +
                                "the narrativizer (build-profile) before rendering condition " +
                                std::string(to_string(condition)));
    }

    RenderedPersona persona;
    persona.entity_id = profile.entity_id;
    persona.condition = condition;
    persona.system_prompt = templates.get("base_embodiment");

    const auto add = [&](std::string_view label, const std::string& text) {
        persona.profile_sections.push_back({std::string(label), text});
    };

    if (parts.social) {
        add(section::demographics,
            fill_template(templates.get("section_demographics"),
                          {{"demographics", demographics_block(profile.social, schema)}}));
    }
    if (parts.personal) {
        const auto& n = *profile.personal_narrative;
        add(section::personality,
            fill_template(templates.get("section_personality"),
                          {{"personality", registers(templates, "Personality", n.personality_expert,
                                                     n.personality_everyday)}}));
        add(section::values,
            fill_template(templates.get("section_values"),
                          {{"values", registers(templates, "Value", n.values_expert, n.values_everyday)}}));
    }
    if (parts.context) {
        const auto& c = profile.context;
        add(section::weekly, fill_template(templates.get("section_weekly"),
                                           {{"weekly", "1. " + c.weekday_essay + "\n\n2. " + c.weekend_essay}}));
        add(section::loves, fill_template(templates.get("section_loves"), {{"loves", bullet_list(c.loves)}}));
        add(section::hates, fill_template(templates.get("section_hates"), {{"hates", bullet_list(c.hates)}}));
    }
    return persona;
}

std::string export_text(const RenderedPersona& persona) {
    return persona.system_prompt + "\n\nProfile:\n\n" + persona.profile_text() + "\n";
}

} // namespace personakit
