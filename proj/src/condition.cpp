#include "personakit/condition.hpp"

#include "personakit/error.hpp"

#include <string>

namespace personakit {

bool ComponentSet::contains(Component component) const {
    switch (component) {
    case Component::social:
        return social;
    case Component::personal:
        return personal;
    case Component::context:
        return context;
    }
    return false;
}

ComponentSet components(Condition condition) {
    switch (condition) {
    case Condition::S:
        return {true, false, false};
    case Condition::P:
        return {false, true, false};
    case Condition::C:
        return {false, false, true};
    case Condition::SP:
        return {true, true, false};
    case Condition::SC:
        return {true, false, true};
    case Condition::PC:
        return {false, true, true};
    case Condition::SPC:
        return {true, true, true};
    }
    return {};
}

bool includes(Condition condition, Component component) {
    return components(condition).contains(component);
}

std::string_view to_string(Condition condition) {
    switch (condition) {
    case Condition::S:
        return "S";
    case Condition::P:
        return "P";
    case Condition::C:
        return "C";
    case Condition::SP:
        return "SP";
    case Condition::SC:
        return "SC";
    case Condition::PC:
        return "PC";
    case Condition::SPC:
        return "SPC";
    }
    return "?";
}

Condition parse_condition(std::string_view text) {
    for (const auto condition : all_conditions()) {
        if (to_string(condition) == text) {
            return condition;
        }
    }
    throw ConfigError("unknown condition '" + std::string(text) + "'");
}

const std::array<Condition, 7>& all_conditions() {
    static const std::array<Condition, 7> conditions = {Condition::S,  Condition::P,  Condition::C,  Condition::SP,
                                                         Condition::SC, Condition::PC, Condition::SPC};
    return conditions;
}

std::vector<Condition> enumerate_conditions() {
    const auto& all = all_conditions();
    return {all.begin(), all.end()};
}

} // namespace personakit
