#include "personakit/persona_runtime.hpp"

#include "personakit/error.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

namespace personakit {

TopicSet TopicSet::from_json(const json& doc, std::string_view origin) {
    const std::string where(origin);
    if (!doc.is_object() || !doc.contains("topics") || !doc["topics"].is_array()) {
        throw ParseError(where + "#/topics", "expected an array of topics");
    }
    TopicSet set;
    std::set<std::string> seen;
    for (std::size_t i = 0; i < doc["topics"].size(); ++i) {
        const auto& t = doc["topics"][i];
        const std::string at = where + "#/topics/" + std::to_string(i);
        if (!t.is_object() || !t.contains("topic_id") || !t.contains("prompt")) {
            throw ParseError(at, "topic needs topic_id and prompt");
        }
        EssayTask task;
        task.topic_id = t["topic_id"].get<std::string>();
        task.prompt_text = t["prompt"].get<std::string>();
        task.label = t.value("label", task.topic_id);
        if (task.prompt_text.empty()) {
            throw ParseError(at + "/prompt", "empty prompt");
        }
        if (!seen.insert(task.topic_id).second) {
            throw ParseError(at + "/topic_id", "duplicate topic " + task.topic_id);
        }
        set.tasks_.push_back(std::move(task));
    }
    if (set.tasks_.empty()) {
        throw ParseError(where, "no topics");
    }
    return set;
}

TopicSet TopicSet::load(const std::filesystem::path& path) {
    return from_json(read_json_file(path), path.string());
}

const EssayTask& TopicSet::get(std::string_view topic_id) const {
    for (const auto& task : tasks_) {
        if (task.topic_id == topic_id) {
            return task;
        }
    }
    throw ConfigError("unknown topic " + std::string(topic_id));
}

std::string embodiment_prompt(const RenderedPersona& persona, const TemplateSet& templates) {
    return persona.system_prompt + "\n\n" + trim(templates.get("embodiment_rules")) + "\n\nProfile:\n\n" +
           persona.profile_text();
}

ChatRequest embody(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id) {
    ChatRequest request;
    request.model_id = std::move(model_id);
    request.system = embodiment_prompt(persona, templates);
    return request;
}

ChatRequest essay_request(const RenderedPersona& persona, const EssayTask& task, const TemplateSet& templates,
                          std::string model_id, int max_tokens) {
    ChatRequest request = embody(persona, templates, std::move(model_id));
    request.user_turns.push_back(fill_template(templates.get("essay_task"), {{"question", task.prompt_text}}));
    request.max_tokens = max_tokens;
    return request;
}

namespace {

std::string job_context(const std::string& entity, Condition condition, const std::string& topic) {
    return "entity " + entity + ", condition " + std::string(to_string(condition)) + ", topic " + topic;
}

} // namespace

std::vector<EssayOutcome> answer_essays(const std::vector<EssayJob>& jobs, const TemplateSet& templates,
                                        const std::string& model_id, Gateway& gateway, int parallelism,
                                        int max_tokens) {
    std::vector<std::size_t> order(jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    const auto key = [&](std::size_t i) {
        return std::make_tuple(jobs[i].persona->entity_id, static_cast<int>(jobs[i].persona->condition),
                               jobs[i].task.topic_id);
    };
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key(a) < key(b); });

    std::vector<ChatRequest> requests;
    requests.reserve(jobs.size());
    for (const std::size_t i : order) {
        requests.push_back(essay_request(*jobs[i].persona, jobs[i].task, templates, model_id, max_tokens));
    }
    const auto results = gateway.complete_batch(requests, parallelism);

    std::vector<EssayOutcome> outcomes;
    outcomes.reserve(jobs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto& job = jobs[order[k]];
        EssayOutcome outcome;
        outcome.entity_id = job.persona->entity_id;
        outcome.condition = job.persona->condition;
        outcome.topic_id = job.task.topic_id;
        const auto& result = results[k];
        if (!result.ok()) {
            outcome.error = job_context(outcome.entity_id, outcome.condition, outcome.topic_id) + ": " + result.error;
        } else if (trim(result.response->text).empty()) {
            outcome.error = job_context(outcome.entity_id, outcome.condition, outcome.topic_id) + ": empty essay";
        } else {
            PersonaAnswer answer;
            answer.entity_id = outcome.entity_id;
            answer.condition = outcome.condition;
            answer.topic_id = outcome.topic_id;
            answer.text = trim(result.response->text);
            answer.transcript_ref = result.response->request_hash;
            answer.model_id = model_id;
            outcome.answer = std::move(answer);
        }
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

PersonaAnswer answer_essay(const RenderedPersona& persona, const EssayTask& task, const TemplateSet& templates,
                           const std::string& model_id, Gateway& gateway, int max_tokens) {
    auto outcomes = answer_essays({EssayJob{&persona, task}}, templates, model_id, gateway, 1, max_tokens);
    if (!outcomes.front().answer) {
        throw ContentError(outcomes.front().error);
    }
    return *outcomes.front().answer;
}

BlindedBundle export_blinded_bundle(const std::vector<PersonaAnswer>& answers, const std::filesystem::path& out_dir,
                                    std::uint64_t seed) {
    // entity -> condition -> topic -> text
    std::map<std::string, std::map<Condition, std::map<std::string, std::string>>> grouped;
    for (const auto& a : answers) {
        grouped[a.entity_id][a.condition][a.topic_id] = a.text;
    }

    std::mt19937_64 rng(seed);
    json essays = json::object();
    json key = json::object();
    std::string ratings = "entity_id,label,topic_id,rater_id,rating\n";
    for (const auto& [entity, by_condition] : grouped) {
        std::vector<Condition> conditions;
        for (const auto& entry : by_condition) {
            conditions.push_back(entry.first);
        }
        // Fisher-Yates on raw engine output; std::shuffle's distribution is
        // implementation-defined and would differ across standard libraries.
        for (std::size_t i = conditions.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng() % i);
            std::swap(conditions[i - 1], conditions[j]);
        }
        json entity_essays = json::object();
        json entity_key = json::object();
        for (std::size_t i = 0; i < conditions.size(); ++i) {
            const std::string label(1, static_cast<char>('A' + i));
            entity_key[label] = std::string(to_string(conditions[i]));
            json topics = json::object();
            for (const auto& [topic, text] : by_condition.at(conditions[i])) {
                topics[topic] = text;
                ratings += entity + "," + label + "," + topic + ",,\n";
            }
            entity_essays[label] = topics;
        }
        essays[entity] = entity_essays;
        key[entity] = entity_key;
    }

    BlindedBundle bundle;
    bundle.essays_path = out_dir / "blinded_essays.json";
    bundle.key_path = out_dir / "sealed_key.json";
    bundle.ratings_path = out_dir / "ratings_long.csv";
    const std::string key_text = dump_json(json{{"seed", seed}, {"labels", key}});
    bundle.key_digest = sha256_hex(key_text);
    write_file(bundle.key_path, key_text);
    write_file(bundle.essays_path, dump_json(json{{"key_sha256", bundle.key_digest}, {"essays", essays}}));
    write_file(bundle.ratings_path, ratings);
    return bundle;
}

} // namespace personakit
