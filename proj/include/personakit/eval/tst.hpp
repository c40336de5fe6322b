#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/eval/roster.hpp"
#include "personakit/gateway.hpp"
#include "personakit/render.hpp"

namespace personakit::eval {

inline constexpr std::size_t kStatementsPerSide = 10;

struct TSTBattery {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string model_id;
    int iteration = 0;
    std::vector<std::string> open_self;
    std::vector<std::string> hidden_self;
    // Soft findings, e.g. "echo:open_self[2]" for a statement that repeats a
    // profile sentence verbatim.
    std::vector<std::string> flags;

    // "open_self[i]" / "hidden_self[i]" paired with the statement text.
    std::vector<std::pair<std::string, std::string>> statements() const;
};

struct TSTOutcome {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string model_id;
    int iteration = 0;
    std::optional<TSTBattery> battery; // nullopt means battery_failure
    int repair_attempts = 0;
    std::string error;
    std::vector<std::string> transcript; // request hashes in call order
};

ChatRequest tst_request(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id);

// Why `reply` is not a 10 + 10 battery, or nullopt when it is.
std::optional<std::string> battery_problem(std::string_view reply);

// Profile sentences (>= 24 characters) that `statement` repeats verbatim,
// case-insensitively.
std::vector<std::string> echoed_sentences(std::string_view statement, std::string_view profile_text);

struct TSTTrial {
    const RenderedPersona* persona = nullptr;
    std::string model_id;
    int iteration = 0;
};

// First pass for every trial, then one structural repair turn for replies
// that miss the 10 + 10 shape; a second miss is a battery_failure.
std::vector<TSTOutcome> run_tst_batch(const std::vector<TSTTrial>& trials, const TemplateSet& templates,
                                      Gateway& gateway, int parallelism);

TSTOutcome run_tst(const RenderedPersona& persona, const TemplateSet& templates, const std::string& model_id,
                   Gateway& gateway, int iteration = 0);

struct TSTJudgment {
    std::string statement_ref;
    std::string statement;
    std::optional<bool> verdict; // nullopt = abstain
    std::string explanation;
    bool repaired = false;
    std::string transcript_ref;
};

// Leading Yes/No token, ignoring case, markdown emphasis and punctuation.
std::optional<bool> parse_judge_reply(std::string_view reply);

// The judge plays the golden character; temperature 0.
ChatRequest judge_request(const RosterEntry& golden, std::string_view statement, const TemplateSet& templates,
                          std::string judge_model);

struct JudgeJob {
    const TSTBattery* battery = nullptr;
    const RosterEntry* golden = nullptr;
};

// 20 judgments per battery, in battery order. Replies without a Yes/No token
// get one repair turn and then abstain.
std::vector<std::vector<TSTJudgment>> judge_tst_batch(const std::vector<JudgeJob>& jobs, const TemplateSet& templates,
                                                      const std::string& judge_model, Gateway& gateway,
                                                      int parallelism);

std::vector<TSTJudgment> judge_tst(const TSTBattery& battery, const RosterEntry& golden, const TemplateSet& templates,
                                   const std::string& judge_model, Gateway& gateway, int parallelism = 1);

} // namespace personakit::eval
