#include "personakit/eval/roster.hpp"

#include "personakit/error.hpp"

#include <array>
#include <cctype>
#include <set>

namespace personakit::eval {

namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

std::string ascii_quotes(std::string_view raw) {
    std::string text(raw);
    text = replace_all(std::move(text), "\xE2\x80\x9C", "\""); // left double
    text = replace_all(std::move(text), "\xE2\x80\x9D", "\""); // right double
    text = replace_all(std::move(text), "\xE2\x80\x98", "'");  // left single
    text = replace_all(std::move(text), "\xE2\x80\x99", "'");  // right single
    return text;
}

// Removes ``x'', ''x'' and "x" spans, returning their contents.
std::vector<std::string> cut_quoted(std::string& text) {
    std::vector<std::string> found;
    struct Pair {
        std::string_view open;
        std::string_view close;
    };
    constexpr std::array<Pair, 3> pairs{{{"``", "''"}, {"''", "''"}, {"\"", "\""}}};
    for (const auto& [open, close] : pairs) {
        std::size_t start = 0;
        while ((start = text.find(open, start)) != std::string::npos) {
            const std::size_t inner = start + open.size();
            const std::size_t end = text.find(close, inner);
            if (end == std::string::npos) {
                break;
            }
            found.push_back(text.substr(inner, end - inner));
            text.replace(start, end + close.size() - start, " ");
        }
    }
    return found;
}

std::string fold(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (const char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        if (c == '\'' || c == '`') {
            continue;
        }
        if (c >= 0x80 || std::isalnum(c)) {
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            out.push_back(' ');
        }
    }
    std::vector<std::string> words;
    std::string word;
    for (const char ch : out) {
        if (ch == ' ') {
            if (!word.empty()) {
                words.push_back(std::move(word));
                word.clear();
            }
        } else {
            word.push_back(ch);
        }
    }
    if (!word.empty()) {
        words.push_back(std::move(word));
    }
    static const std::set<std::string, std::less<>> leading{"dr", "mr", "mrs", "ms", "the"};
    std::size_t first = 0;
    // Keep at least one word so "The" alone does not vanish.
    while (first + 1 < words.size() && leading.contains(words[first])) {
        ++first;
    }
    return join(std::vector<std::string>(words.begin() + static_cast<std::ptrdiff_t>(first), words.end()), " ");
}

} // namespace

NormalizedName normalize_name_full(std::string_view raw) {
    std::string text = ascii_quotes(raw);
    NormalizedName result;
    for (const auto& nickname : cut_quoted(text)) {
        std::string folded = fold(nickname);
        if (!folded.empty()) {
            result.nicknames.push_back(std::move(folded));
        }
    }
    result.text = fold(text);
    return result;
}

std::string normalize_name(std::string_view raw) {
    return normalize_name_full(raw).text;
}

std::string display_name(std::string_view raw) {
    std::string text = ascii_quotes(raw);
    text = replace_all(std::move(text), "``", "\"");
    text = replace_all(std::move(text), "''", "\"");
    return text;
}

Roster Roster::from_json(const json& doc, std::string_view origin) {
    const std::string where(origin);
    if (!doc.is_object() || !doc.contains("entries") || !doc["entries"].is_array()) {
        throw ParseError(where + "#/entries", "expected an array of roster entries");
    }
    Roster roster;
    roster.version_ = doc.value("roster_version", 1);
    std::set<std::string> ids;
    std::set<std::pair<std::string, std::string>> canonical;
    for (std::size_t i = 0; i < doc["entries"].size(); ++i) {
        const auto& e = doc["entries"][i];
        const std::string at = where + "#/entries/" + std::to_string(i);
        try {
            RosterEntry entry;
            entry.entity_id = e.at("entity_id").get<std::string>();
            entry.character = e.at("character").get<std::string>();
            entry.series = e.at("series").get<std::string>();
            entry.aliases = e.value("aliases", std::vector<std::string>{});
            entry.series_aliases = e.value("series_aliases", std::vector<std::string>{});
            if (!ids.insert(entry.entity_id).second) {
                throw ParseError(at, "duplicate entity_id " + entry.entity_id);
            }
            if (!canonical.insert({normalize_name(entry.character), normalize_name(entry.series)}).second) {
                throw ParseError(at, "duplicate canonical name " + entry.character);
            }
            roster.entries_.push_back(std::move(entry));
        } catch (const json::exception& ex) {
            throw ParseError(at, ex.what());
        }
    }
    return roster;
}

Roster Roster::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.string());
}

const RosterEntry* Roster::find(std::string_view entity_id) const {
    for (const auto& entry : entries_) {
        if (entry.entity_id == entity_id) {
            return &entry;
        }
    }
    return nullptr;
}

namespace {

bool matches_any(std::string_view guess, std::string_view canonical, const std::vector<std::string>& aliases) {
    const std::string g = normalize_name(guess);
    if (g.empty()) {
        return false;
    }
    const auto name = normalize_name_full(canonical);
    if (g == name.text) {
        return true;
    }
    for (const auto& nickname : name.nicknames) {
        if (g == nickname) {
            return true;
        }
    }
    for (const auto& alias : aliases) {
        if (g == normalize_name(alias)) {
            return true;
        }
    }
    return false;
}

} // namespace

bool character_matches(const RosterEntry& entry, std::string_view guess) {
    return matches_any(guess, entry.character, entry.aliases);
}

bool series_matches(const RosterEntry& entry, std::string_view guess) {
    return matches_any(guess, entry.series, entry.series_aliases);
}

} // namespace personakit::eval
