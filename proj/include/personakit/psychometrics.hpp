#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/util.hpp"

namespace personakit {

enum class InstrumentId { bfi2s, pvq21 };

std::string_view to_string(InstrumentId id);
InstrumentId parse_instrument_id(std::string_view text);

struct InstrumentItem {
    std::string item_id;
    std::string text;
    std::string group_id;
    bool reverse_keyed = false;
};

// A facet (BFI-2-S) or a value dimension (PVQ-21).
struct InstrumentGroup {
    std::string group_id;
    std::string parent_domain; // empty for PVQ
    std::string label;
};

struct InstrumentDomain {
    std::string domain_id;
    std::string label;
};

// Likert instrument definition loaded from a schema file. The item roster,
// grouping and keying are data; only the shape checks live in code.
class InstrumentSchema {
public:
    static InstrumentSchema from_json(const json& doc, std::string_view origin = "<schema>");
    static InstrumentSchema load(const std::filesystem::path& path);

    InstrumentId id() const { return id_; }
    int scale_min() const { return scale_min_; }
    int scale_max() const { return scale_max_; }
    const std::string& stem() const { return stem_; }
    const std::vector<InstrumentItem>& items() const { return items_; }
    const std::vector<InstrumentGroup>& groups() const { return groups_; }
    const std::vector<InstrumentDomain>& domains() const { return domains_; }

    const InstrumentItem* find_item(std::string_view item_id) const;
    const InstrumentGroup* find_group(std::string_view group_id) const;
    std::vector<const InstrumentItem*> items_in_group(std::string_view group_id) const;
    std::vector<const InstrumentGroup*> groups_in_domain(std::string_view domain_id) const;

private:
    InstrumentId id_ = InstrumentId::bfi2s;
    int scale_min_ = 1;
    int scale_max_ = 7;
    std::string stem_;
    std::vector<InstrumentItem> items_;
    std::vector<InstrumentGroup> groups_;
    std::vector<InstrumentDomain> domains_;
};

struct ScaleResponseSet {
    InstrumentId instrument_id = InstrumentId::bfi2s;
    std::map<std::string, int> responses;

    bool operator==(const ScaleResponseSet&) const = default;
};

json to_json(const ScaleResponseSet& set);
ScaleResponseSet response_set_from_json(const json& doc);

// Item ids of `schema` that `set` leaves unanswered, in schema order.
std::vector<std::string> missing_items(const ScaleResponseSet& set, const InstrumentSchema& schema);

struct ScoreProfile {
    InstrumentId instrument_id = InstrumentId::bfi2s;
    std::map<std::string, double> group_means;  // facets (BFI) or values (PVQ)
    std::map<std::string, double> domain_means; // BFI only

    const std::map<std::string, double>& facet_means() const { return group_means; }
    const std::map<std::string, double>& value_means() const { return group_means; }

    // Group means in schema order, for correlating two profiles.
    std::vector<double> group_vector(const InstrumentSchema& schema) const;
};

int apply_reverse_key(int value, bool reverse, int scale_min = 1, int scale_max = 7);

// Facet mean = mean of keyed item values; domain mean = unweighted mean of
// its facet means. Throws IncompleteResponses or DomainError.
ScoreProfile score(const ScaleResponseSet& responses, const InstrumentSchema& schema);

struct TraitDescription {
    std::string subject;
    std::string level_phrase;
    std::string sentence;
};

// Seven half-open bins over [1, 7]; 3.0 lands in "slightly below average".
std::string_view level_phrase(double score);
TraitDescription describe(double score, std::string_view subject_label);

// BFI: one sentence per domain followed by one per facet, schema order.
// PVQ: one sentence per value.
std::vector<TraitDescription> describe_profile(const ScoreProfile& profile,
                                               const InstrumentSchema& schema);

struct ScoreRow {
    std::string entity_id;
    std::string group_id;
    double mean = 0.0;
};

// Flat CSV "entity_id,group_id,mean".
std::string scores_csv(const std::vector<ScoreRow>& rows);

} // namespace personakit
