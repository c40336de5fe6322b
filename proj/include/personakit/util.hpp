#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace personakit {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

// Parses a JSON file; syntax and IO errors become ParseError carrying the path.
json read_json_file(const std::filesystem::path& path);

// Pretty-printed with a trailing newline, keys sorted.
std::string dump_json(const json& value);

std::string sha256_hex(std::string_view data);
std::string file_digest(const std::filesystem::path& path);

std::string trim(std::string_view text);
std::string to_lower(std::string_view text);
std::vector<std::string> split_lines(std::string_view text);
std::string join(const std::vector<std::string>& parts, std::string_view separator);
bool contains_icase(std::string_view haystack, std::string_view needle);

// Code points, not bytes.
std::size_t utf8_length(std::string_view text);

// Replaces every {{name}} in `tmpl`. Unknown and unused names are both errors,
// so a template and its caller cannot drift apart silently.
std::string fill_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// Finds the first JSON object in a model reply, tolerating code fences and
// prose around it.
std::optional<json> extract_json_object(std::string_view text);

} // namespace personakit
