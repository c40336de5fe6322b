#include "personakit/eval/guess_who.hpp"

#include "personakit/error.hpp"

namespace personakit::eval {

std::string_view to_string(TrialStatus status) {
    switch (status) {
    case TrialStatus::ok:
        return "ok";
    case TrialStatus::parse_failure:
        return "parse_failure";
    case TrialStatus::transport_failure:
        return "transport_failure";
    }
    return "ok";
}

TrialStatus parse_trial_status(std::string_view text) {
    if (text == "ok") {
        return TrialStatus::ok;
    }
    if (text == "parse_failure") {
        return TrialStatus::parse_failure;
    }
    if (text == "transport_failure") {
        return TrialStatus::transport_failure;
    }
    throw ParseError("status", "unknown trial status " + std::string(text));
}

ChatRequest guess_who_request(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id) {
    ChatRequest request;
    request.model_id = std::move(model_id);
    request.system = trim(templates.get("guess_who"));
    request.user_turns.push_back("Profile:\n\n" + persona.profile_text());
    request.response_format = ResponseFormat::json_object;
    request.max_tokens = 400;
    return request;
}

GuessWhoVerdict score_guess(const RosterEntry& golden, std::string_view reply) {
    GuessWhoVerdict verdict;
    verdict.entity_id = golden.entity_id;
    verdict.raw_reply = std::string(reply);
    const auto doc = extract_json_object(reply);
    const auto text_field = [&](const char* key) -> std::optional<std::string> {
        if (!doc || !doc->contains(key) || !(*doc)[key].is_string()) {
            return std::nullopt;
        }
        return (*doc)[key].get<std::string>();
    };
    const auto character = text_field("character");
    const auto series = text_field("series");
    if (!character || !series) {
        verdict.status = TrialStatus::parse_failure;
        verdict.error = doc ? "reply lacks character/series fields" : "reply is not a JSON object";
        return verdict;
    }
    verdict.guessed_character = *character;
    verdict.guessed_series = *series;
    verdict.reason = text_field("reason").value_or("");
    verdict.character_match = character_matches(golden, *character);
    verdict.series_match = series_matches(golden, *series);
    verdict.overall_true = verdict.character_match && verdict.series_match;
    return verdict;
}

std::vector<GuessWhoVerdict> run_guess_who_batch(const std::vector<GuessWhoTrial>& trials, const Roster& roster,
                                                 const TemplateSet& templates, Gateway& gateway, int parallelism) {
    std::vector<const RosterEntry*> golden;
    std::vector<ChatRequest> requests;
    for (const auto& trial : trials) {
        const RosterEntry* entry = roster.find(trial.persona->entity_id);
        if (entry == nullptr) {
            throw PreconditionError("entity " + trial.persona->entity_id + " is not in the roster");
        }
        golden.push_back(entry);
        requests.push_back(guess_who_request(*trial.persona, templates, trial.model_id));
    }
    const auto results = gateway.complete_batch(requests, parallelism);

    std::vector<GuessWhoVerdict> verdicts;
    verdicts.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        GuessWhoVerdict verdict;
        if (results[i].ok()) {
            verdict = score_guess(*golden[i], results[i].response->text);
            verdict.transcript_ref = results[i].response->request_hash;
        } else {
            verdict.entity_id = golden[i]->entity_id;
            verdict.status = results[i].failure == FailureKind::content ? TrialStatus::parse_failure
                                                                        : TrialStatus::transport_failure;
            verdict.error = results[i].error;
            verdict.transcript_ref = request_hash(requests[i]);
        }
        verdict.condition = trials[i].persona->condition;
        verdict.model_id = trials[i].model_id;
        verdict.iteration = trials[i].iteration;
        verdicts.push_back(std::move(verdict));
    }
    return verdicts;
}

GuessWhoVerdict run_guess_who(const RenderedPersona& persona, const Roster& roster, const TemplateSet& templates,
                              const std::string& model_id, Gateway& gateway, int iteration) {
    return run_guess_who_batch({GuessWhoTrial{&persona, model_id, iteration}}, roster, templates, gateway, 1).front();
}

} // namespace personakit::eval
