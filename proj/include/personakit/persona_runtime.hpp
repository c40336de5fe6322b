#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "personakit/condition.hpp"
#include "personakit/gateway.hpp"
#include "personakit/render.hpp"

namespace personakit {

struct EssayTask {
    std::string topic_id;
    std::string label;
    std::string prompt_text;
};

// Essay questions keyed by topic id, in file order.
class TopicSet {
public:
    static TopicSet from_json(const json& doc, std::string_view origin = "<topics>");
    static TopicSet load(const std::filesystem::path& path);

    const std::vector<EssayTask>& tasks() const { return tasks_; }
    // Throws ConfigError for an unknown topic id.
    const EssayTask& get(std::string_view topic_id) const;

private:
    std::vector<EssayTask> tasks_;
};

struct PersonaAnswer {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string topic_id;
    std::string text;
    std::string transcript_ref; // request hash of the generating exchange
    std::string model_id;
};

// System prompt shared by every persona task: opening paragraph, rules block,
// then the rendered profile.
std::string embodiment_prompt(const RenderedPersona& persona, const TemplateSet& templates);

// Request with the embodiment prompt as system message and no user turn yet.
ChatRequest embody(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id);

ChatRequest essay_request(const RenderedPersona& persona, const EssayTask& task, const TemplateSet& templates,
                          std::string model_id, int max_tokens);

struct EssayJob {
    const RenderedPersona* persona = nullptr;
    EssayTask task;
};

struct EssayOutcome {
    std::string entity_id;
    Condition condition = Condition::SPC;
    std::string topic_id;
    std::optional<PersonaAnswer> answer;
    std::string error; // carries (entity, condition, topic) context
};

// One generation per job, sorted by (entity_id, condition, topic_id).
std::vector<EssayOutcome> answer_essays(const std::vector<EssayJob>& jobs, const TemplateSet& templates,
                                        const std::string& model_id, Gateway& gateway, int parallelism,
                                        int max_tokens = 600);

PersonaAnswer answer_essay(const RenderedPersona& persona, const EssayTask& task, const TemplateSet& templates,
                           const std::string& model_id, Gateway& gateway, int max_tokens = 600);

struct BlindedBundle {
    std::filesystem::path essays_path;  // labels only
    std::filesystem::path key_path;     // label -> condition, kept apart from raters
    std::filesystem::path ratings_path; // long-format template for rating entry
    std::string key_digest;
};

// Per entity, conditions are relabelled A, B, C, ... in a seeded random
// order. The key file's digest is written into the essay file so a swapped
// key is detectable.
BlindedBundle export_blinded_bundle(const std::vector<PersonaAnswer>& answers, const std::filesystem::path& out_dir,
                                    std::uint64_t seed);

} // namespace personakit
