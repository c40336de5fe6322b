#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/psychometrics.hpp"
#include "personakit/util.hpp"

namespace personakit {

enum class AnswerKind { categorical, ordinal, free };

struct DemographicItem {
    std::string item_id;
    std::string label;
    AnswerKind kind = AnswerKind::free;
    std::vector<std::string> levels;  // ordinal, lowest first
    std::vector<std::string> options; // categorical; empty means open-ended
    std::optional<std::string> conditional_on;

    bool conditional() const { return conditional_on.has_value(); }

    // Position in `levels`, or nullopt for non-members and non-ordinal items.
    std::optional<int> ordinal_code(std::string_view value) const;

    // Canonical spelling of `value` if it is an admissible answer.
    std::optional<std::string> canonical_answer(std::string_view value) const;
};

// Demographic questionnaire roster. Conditional ("if relevant") items are
// sub-questions of a parent and do not count towards the base roster.
class DemographicSchema {
public:
    static DemographicSchema from_json(const json& doc, std::string_view origin = "<schema>");
    static DemographicSchema load(const std::filesystem::path& path);

    const std::vector<DemographicItem>& items() const { return items_; }
    const DemographicItem* find(std::string_view item_id) const;
    std::size_t base_count() const;
    int version() const { return version_; }

private:
    std::vector<DemographicItem> items_;
    int version_ = 1;
};

// Demographic answers keyed by schema item id; order comes from the schema.
struct SocialIdentity {
    std::map<std::string, std::string> answers;

    bool operator==(const SocialIdentity&) const = default;
};

struct PersonalLifeContext {
    std::string weekday_essay;
    std::string weekend_essay;
    std::vector<std::string> loves;
    std::vector<std::string> hates;

    bool operator==(const PersonalLifeContext&) const = default;
};

struct PersonalIdentityRaw {
    ScaleResponseSet bfi_responses{InstrumentId::bfi2s, {}};
    ScaleResponseSet pvq_responses{InstrumentId::pvq21, {}};

    bool operator==(const PersonalIdentityRaw&) const = default;
};

struct PersonalIdentityNarrative {
    std::string personality_expert;
    std::string personality_everyday;
    std::string values_expert;
    std::string values_everyday;

    bool complete() const;
    bool operator==(const PersonalIdentityNarrative&) const = default;
};

enum class Provenance { fictional, human };

std::string_view to_string(Provenance provenance);
Provenance parse_provenance(std::string_view text);

struct Profile {
    std::string entity_id;
    std::optional<std::string> display_name;
    SocialIdentity social;
    PersonalIdentityRaw personal_raw;
    std::optional<PersonalIdentityNarrative> personal_narrative;
    PersonalLifeContext context;
    Provenance provenance = Provenance::fictional;
    // Real-name strings that must not appear anywhere in a human profile.
    std::vector<std::string> name_tokens;

    bool operator==(const Profile&) const = default;
};

// Document layout: top-level meta / social / personal / context.
json to_json(const Profile& profile);
Profile profile_from_json(const json& doc, std::string_view origin = "<profile>");
Profile load_profile(const std::filesystem::path& path);
std::string serialize_profile(const Profile& profile);

// Every instrument and schema a profile is checked against.
struct SchemaSet {
    DemographicSchema demographics;
    InstrumentSchema bfi;
    InstrumentSchema pvq;

    static SchemaSet load(const std::filesystem::path& dir);
};

enum class Severity { error, warning };

struct Violation {
    std::string path;
    std::string message;
    Severity severity = Severity::error;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const; // no errors; warnings allowed
    std::size_t error_count() const;
    std::size_t warning_count() const;
    std::string to_text() const;
};

struct LengthPolicy {
    std::size_t human_essay_min = 300;
    std::size_t human_essay_max = 700;
    std::size_t fictional_combined_min = 732;
    std::size_t fictional_combined_max = 1856;
};

ValidationReport validate_profile(const Profile& profile, const DemographicSchema& schema,
                                  const LengthPolicy& policy = {});

// Adds instrument completeness and bounds checks.
ValidationReport validate_profile(const Profile& profile, const SchemaSet& schemas,
                                  const LengthPolicy& policy = {});

} // namespace personakit
