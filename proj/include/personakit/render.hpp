#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/condition.hpp"
#include "personakit/profile.hpp"

namespace personakit {

// Named prompt templates loaded from a directory of `<name>.txt` files.
class TemplateSet {
public:
    static TemplateSet load(const std::filesystem::path& dir);
    static TemplateSet from_map(std::map<std::string, std::string> templates);

    const std::string& get(std::string_view name) const;
    bool contains(std::string_view name) const;
    // Digest over names and contents, for run manifests.
    std::string digest() const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

namespace section {
inline constexpr std::string_view demographics = "demographics";
inline constexpr std::string_view personality = "personality";
inline constexpr std::string_view values = "values";
inline constexpr std::string_view weekly = "weekly";
inline constexpr std::string_view loves = "loves";
inline constexpr std::string_view hates = "hates";
} // namespace section

struct ProfileSection {
    std::string label;
    std::string text;

    bool operator==(const ProfileSection&) const = default;
};

struct RenderedPersona {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string system_prompt;
    std::vector<ProfileSection> profile_sections;

    bool has_section(std::string_view label) const;
    std::vector<std::string> section_labels() const;
    // Sections joined by blank lines, in render order.
    std::string profile_text() const;
    bool operator==(const RenderedPersona&) const = default;
};

// S block, then P (personality, values), then C (weekly, loves, hates).
// C text is copied verbatim. Throws PreconditionError when a P-bearing
// condition is requested before the narratives exist.
RenderedPersona render_condition(const Profile& profile, Condition condition, const TemplateSet& templates,
                                 const DemographicSchema& schema);

// Plain-text export of one render: system prompt, then the profile.
std::string export_text(const RenderedPersona& persona);

} // namespace personakit
