#include "personakit/eval/tst.hpp"

#include "personakit/error.hpp"

#include <cctype>

namespace personakit::eval {

std::vector<std::pair<std::string, std::string>> TSTBattery::statements() const {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < open_self.size(); ++i) {
        out.emplace_back("open_self[" + std::to_string(i) + "]", open_self[i]);
    }
    for (std::size_t i = 0; i < hidden_self.size(); ++i) {
        out.emplace_back("hidden_self[" + std::to_string(i) + "]", hidden_self[i]);
    }
    return out;
}

ChatRequest tst_request(const RenderedPersona& persona, const TemplateSet& templates, std::string model_id) {
    ChatRequest request;
    request.model_id = std::move(model_id);
    request.system = trim(templates.get("tst_generation"));
    request.user_turns.push_back("Profile:\n\n" + persona.profile_text());
    request.response_format = ResponseFormat::json_object;
    request.max_tokens = 1500;
    return request;
}

namespace {

std::optional<std::string> side_problem(const json& doc, const char* key) {
    if (!doc.contains(key)) {
        return std::string("missing \"") + key + "\"";
    }
    const auto& side = doc[key];
    if (!side.is_array()) {
        return std::string("\"") + key + "\" is not a list";
    }
    if (side.size() != kStatementsPerSide) {
        return std::string("expected 10 ") + key + " statements, found " + std::to_string(side.size());
    }
    for (const auto& s : side) {
        if (!s.is_string() || trim(s.get<std::string>()).empty()) {
            return std::string("\"") + key + "\" holds an empty or non-text entry";
        }
    }
    return std::nullopt;
}

std::vector<std::string> side_texts(const json& side) {
    std::vector<std::string> out;
    for (const auto& s : side) {
        out.push_back(trim(s.get<std::string>()));
    }
    return out;
}

std::vector<std::string> profile_sentences(std::string_view text) {
    std::vector<std::string> out;
    std::string current;
    const auto flush = [&] {
        std::string s = trim(current);
        if (s.size() >= 24) {
            out.push_back(std::move(s));
        }
        current.clear();
    };
    for (const char ch : text) {
        if (ch == '\n') {
            flush();
            continue;
        }
        if (ch == '.' || ch == '!' || ch == '?') {
            flush();
            continue;
        }
        current.push_back(ch);
    }
    flush();
    return out;
}

} // namespace

std::optional<std::string> battery_problem(std::string_view reply) {
    const auto doc = extract_json_object(reply);
    if (!doc) {
        return "no JSON object found";
    }
    if (auto p = side_problem(*doc, "open_self")) {
        return p;
    }
    return side_problem(*doc, "hidden_self");
}

std::vector<std::string> echoed_sentences(std::string_view statement, std::string_view profile_text) {
    std::vector<std::string> echoed;
    for (const auto& sentence : profile_sentences(profile_text)) {
        if (contains_icase(statement, sentence)) {
            echoed.push_back(sentence);
        }
    }
    return echoed;
}

std::vector<TSTOutcome> run_tst_batch(const std::vector<TSTTrial>& trials, const TemplateSet& templates,
                                      Gateway& gateway, int parallelism) {
    std::vector<ChatRequest> requests;
    for (const auto& trial : trials) {
        requests.push_back(tst_request(*trial.persona, templates, trial.model_id));
    }
    const auto first = gateway.complete_batch(requests, parallelism);

    std::vector<TSTOutcome> outcomes(trials.size());
    std::vector<std::string> replies(trials.size());
    std::vector<std::size_t> to_repair;
    std::vector<ChatRequest> repairs;
    for (std::size_t i = 0; i < trials.size(); ++i) {
        auto& out = outcomes[i];
        out.entity_id = trials[i].persona->entity_id;
        out.condition = trials[i].persona->condition;
        out.model_id = trials[i].model_id;
        out.iteration = trials[i].iteration;
        out.transcript.push_back(request_hash(requests[i]));
        if (!first[i].ok()) {
            out.error = first[i].error;
            continue;
        }
        replies[i] = first[i].response->text;
        if (const auto problem = battery_problem(replies[i])) {
            ChatRequest repair = requests[i];
            repair.user_turns.push_back(
                fill_template(templates.get("tst_repair"), {{"problem", *problem}, {"previous", replies[i]}}));
            to_repair.push_back(i);
            repairs.push_back(std::move(repair));
            out.repair_attempts = 1;
            out.error = *problem;
        }
    }

    const auto second = gateway.complete_batch(repairs, parallelism);
    for (std::size_t k = 0; k < to_repair.size(); ++k) {
        auto& out = outcomes[to_repair[k]];
        out.transcript.push_back(request_hash(repairs[k]));
        if (!second[k].ok()) {
            out.error = "repair failed: " + second[k].error;
            replies[to_repair[k]].clear();
            continue;
        }
        replies[to_repair[k]] = second[k].response->text;
        if (const auto problem = battery_problem(replies[to_repair[k]])) {
            out.error = "still malformed after repair: " + *problem;
            replies[to_repair[k]].clear();
        }
    }

    for (std::size_t i = 0; i < trials.size(); ++i) {
        auto& out = outcomes[i];
        if (replies[i].empty() || battery_problem(replies[i])) {
            continue;
        }
        const json doc = *extract_json_object(replies[i]);
        TSTBattery battery;
        battery.entity_id = out.entity_id;
        battery.condition = out.condition;
        battery.model_id = out.model_id;
        battery.iteration = out.iteration;
        battery.open_self = side_texts(doc["open_self"]);
        battery.hidden_self = side_texts(doc["hidden_self"]);
        const std::string profile = trials[i].persona->profile_text();
        for (const auto& [ref, statement] : battery.statements()) {
            if (!echoed_sentences(statement, profile).empty()) {
                battery.flags.push_back("echo:" + ref);
            }
        }
        out.battery = std::move(battery);
        out.error.clear();
    }
    return outcomes;
}

TSTOutcome run_tst(const RenderedPersona& persona, const TemplateSet& templates, const std::string& model_id,
                   Gateway& gateway, int iteration) {
    return run_tst_batch({TSTTrial{&persona, model_id, iteration}}, templates, gateway, 1).front();
}

std::optional<bool> parse_judge_reply(std::string_view reply) {
    std::size_t i = 0;
    while (i < reply.size() && !std::isalpha(static_cast<unsigned char>(reply[i]))) {
        ++i;
    }
    std::string word;
    while (i < reply.size() && std::isalpha(static_cast<unsigned char>(reply[i]))) {
        word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(reply[i]))));
        ++i;
    }
    if (word == "yes") {
        return true;
    }
    if (word == "no") {
        return false;
    }
    return std::nullopt;
}

ChatRequest judge_request(const RosterEntry& golden, std::string_view statement, const TemplateSet& templates,
                          std::string judge_model) {
    ChatRequest request;
    request.model_id = std::move(judge_model);
    request.system = trim(fill_template(templates.get("tst_judge"), {{"character", display_name(golden.character)},
                                                                     {"series", golden.series}}));
    request.user_turns.push_back("Statement: " + std::string(statement));
    request.temperature = 0.0;
    request.max_tokens = 200;
    return request;
}

namespace {

std::string explanation_of(std::string_view reply) {
    std::string text = trim(reply);
    std::size_t i = 0;
    while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) {
        ++i;
    }
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
        ++i;
    }
    while (i < text.size() && (std::ispunct(static_cast<unsigned char>(text[i])) ||
                               std::isspace(static_cast<unsigned char>(text[i])))) {
        ++i;
    }
    return text.substr(i);
}

} // namespace

std::vector<std::vector<TSTJudgment>> judge_tst_batch(const std::vector<JudgeJob>& jobs, const TemplateSet& templates,
                                                      const std::string& judge_model, Gateway& gateway,
                                                      int parallelism) {
    std::vector<std::vector<TSTJudgment>> judgments(jobs.size());
    std::vector<std::pair<std::size_t, std::size_t>> where;
    std::vector<ChatRequest> requests;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
        for (const auto& [ref, statement] : jobs[j].battery->statements()) {
            TSTJudgment judgment;
            judgment.statement_ref = ref;
            judgment.statement = statement;
            where.emplace_back(j, judgments[j].size());
            judgments[j].push_back(std::move(judgment));
            requests.push_back(judge_request(*jobs[j].golden, statement, templates, judge_model));
        }
    }
    const auto first = gateway.complete_batch(requests, parallelism);

    std::vector<std::size_t> to_repair;
    std::vector<ChatRequest> repairs;
    for (std::size_t k = 0; k < requests.size(); ++k) {
        auto& judgment = judgments[where[k].first][where[k].second];
        judgment.transcript_ref = request_hash(requests[k]);
        if (!first[k].ok()) {
            judgment.explanation = "judge call failed: " + first[k].error;
            continue;
        }
        const std::string& reply = first[k].response->text;
        if (const auto verdict = parse_judge_reply(reply)) {
            judgment.verdict = verdict;
            judgment.explanation = explanation_of(reply);
            continue;
        }
        ChatRequest repair = requests[k];
        repair.user_turns.push_back(
            fill_template(templates.get("judge_repair"), {{"statement", judgment.statement}, {"previous", reply}}));
        to_repair.push_back(k);
        repairs.push_back(std::move(repair));
    }

    const auto second = gateway.complete_batch(repairs, parallelism);
    for (std::size_t r = 0; r < to_repair.size(); ++r) {
        const std::size_t k = to_repair[r];
        auto& judgment = judgments[where[k].first][where[k].second];
        judgment.repaired = true;
        if (!second[r].ok()) {
            judgment.explanation = "judge repair failed: " + second[r].error;
            continue;
        }
        const std::string& reply = second[r].response->text;
        judgment.verdict = parse_judge_reply(reply);
        judgment.explanation = judgment.verdict ? explanation_of(reply) : "abstain: " + trim(reply);
    }
    return judgments;
}

std::vector<TSTJudgment> judge_tst(const TSTBattery& battery, const RosterEntry& golden, const TemplateSet& templates,
                                   const std::string& judge_model, Gateway& gateway, int parallelism) {
    return judge_tst_batch({JudgeJob{&battery, &golden}}, templates, judge_model, gateway, parallelism).front();
}

} // namespace personakit::eval
