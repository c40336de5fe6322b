#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace personakit {

enum class Component { social, personal, context };

// The seven non-empty subsets of {S, P, C}.
enum class Condition { S, P, C, SP, SC, PC, SPC };

struct ComponentSet {
    bool social = false;
    bool personal = false;
    bool context = false;

    bool contains(Component component) const;
    bool operator==(const ComponentSet&) const = default;
};

ComponentSet components(Condition condition);
bool includes(Condition condition, Component component);

std::string_view to_string(Condition condition);
// Throws ConfigError for anything but the seven names.
Condition parse_condition(std::string_view text);

// S, P, C, SP, SC, PC, SPC.
const std::array<Condition, 7>& all_conditions();
std::vector<Condition> enumerate_conditions();

} // namespace personakit
