#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "personakit/eval/guess_who.hpp"
#include "personakit/eval/inference.hpp"
#include "personakit/eval/tst.hpp"
#include "personakit/persona_runtime.hpp"

namespace personakit::eval {

inline constexpr int kRecordSchemaVersion = 1;

// Every record carries schema_version, battery, entity_id, condition,
// model_id, iteration and provenance; the rest is battery specific.
json guess_who_record(const GuessWhoVerdict& verdict, Provenance provenance);
GuessWhoVerdict guess_who_from_record(const json& record);

enum class JudgingState { judged, unsupported };

json tst_record(const TSTOutcome& outcome, const std::vector<TSTJudgment>& judgments, JudgingState judging,
                const std::string& judge_model, Provenance provenance);

struct TSTRecord {
    TSTOutcome outcome;
    std::vector<TSTJudgment> judgments;
    JudgingState judging = JudgingState::judged;
    Provenance provenance = Provenance::fictional;
};
TSTRecord tst_from_record(const json& record);

// Inference records embed the golden answers so reports need no profiles.
json inference_record(const InferenceAnswerSet& answers, const Profile& golden);

struct InferenceRecord {
    InferenceAnswerSet answers;
    Profile golden; // social and raw instrument answers only
};
InferenceRecord inference_from_record(const json& record);

json essay_record(const EssayOutcome& outcome, const std::string& model_id, Provenance provenance);
EssayOutcome essay_from_record(const json& record);

// Throws ParseError for a record of another schema version or battery.
void check_record(const json& record, std::string_view battery, std::string_view origin);

// One compact JSON document per line.
void write_jsonl(const std::filesystem::path& path, const std::vector<json>& records);
std::vector<json> read_jsonl(const std::filesystem::path& path);

} // namespace personakit::eval
