#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/util.hpp"

namespace personakit::eval {

struct NormalizedName {
    std::string text;
    // Quoted nicknames found in the input ("``Penny''" -> "penny"), normalized.
    std::vector<std::string> nicknames;
};

// Case-folds, drops quoted nicknames, removes apostrophes, turns other
// punctuation into spaces, strips leading honorifics and "the", and collapses
// whitespace. Idempotent.
NormalizedName normalize_name_full(std::string_view raw);
std::string normalize_name(std::string_view raw);

// Display form with TeX-style quotes turned into plain ones:
// "``Penny'' Penelope Hofstadter" -> "\"Penny\" Penelope Hofstadter".
std::string display_name(std::string_view raw);

struct RosterEntry {
    std::string entity_id;
    std::string character;
    std::string series;
    std::vector<std::string> aliases;
    std::vector<std::string> series_aliases;
};

class Roster {
public:
    static Roster from_json(const json& doc, std::string_view origin = "<roster>");
    static Roster load(const std::filesystem::path& path);

    const std::vector<RosterEntry>& entries() const { return entries_; }
    const RosterEntry* find(std::string_view entity_id) const;
    int version() const { return version_; }

private:
    std::vector<RosterEntry> entries_;
    int version_ = 1;
};

// Normalized guess equals the canonical name, an alias, or a quoted nickname
// of the canonical name.
bool character_matches(const RosterEntry& entry, std::string_view guess);
bool series_matches(const RosterEntry& entry, std::string_view guess);

} // namespace personakit::eval
