#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "personakit/eval/roster.hpp"
#include "personakit/gateway.hpp"
#include "personakit/render.hpp"

namespace personakit::eval {

enum class TrialStatus { ok, parse_failure, transport_failure };

std::string_view to_string(TrialStatus status);
TrialStatus parse_trial_status(std::string_view text);

struct GuessWhoVerdict {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string model_id;
    int iteration = 0;
    std::string guessed_character;
    std::string guessed_series;
    std::string reason;
    bool character_match = false;
    bool series_match = false;
    bool overall_true = false;
    TrialStatus status = TrialStatus::ok;
    std::string raw_reply;
    std::string error;
    std::string transcript_ref;
};

// System: the guessing instructions. User: the rendered profile sections.
ChatRequest guess_who_request(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id);

// Scores one reply. Missing "character"/"series" fields count as a parse
// failure; overall_true is always character_match && series_match.
GuessWhoVerdict score_guess(const RosterEntry& golden, std::string_view reply);

struct GuessWhoTrial {
    const RenderedPersona* persona = nullptr;
    std::string model_id;
    int iteration = 0;
};

// One verdict per trial, aligned with `trials`; failures stay in the output.
// Throws PreconditionError if a persona's entity is not in the roster.
std::vector<GuessWhoVerdict> run_guess_who_batch(const std::vector<GuessWhoTrial>& trials, const Roster& roster,
                                                 const TemplateSet& templates, Gateway& gateway, int parallelism);

GuessWhoVerdict run_guess_who(const RenderedPersona& persona, const Roster& roster, const TemplateSet& templates,
                              const std::string& model_id, Gateway& gateway, int iteration = 0);

} // namespace personakit::eval
