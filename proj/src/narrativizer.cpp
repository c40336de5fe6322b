#include "personakit/narrativizer.hpp"

#include "personakit/error.hpp"

namespace personakit {

namespace {

std::string kind_word(NarrativeKind kind) {
    return kind == NarrativeKind::personality ? "personality" : "value system";
}

std::string bullets(const std::vector<std::string>& sentences) {
    std::vector<std::string> lines;
    for (const auto& s : sentences) {
        lines.push_back("- " + s);
    }
    return join(lines, "\n");
}

class Chain {
public:
    Chain(Gateway& gateway, const NarrativeRequest& request, NarrativeResult& result)
        : gateway_(gateway), request_(request), result_(result) {}

    std::string ask(const std::string& prompt) {
        ChatRequest chat;
        chat.model_id = request_.model_id;
        chat.user_turns = {prompt};
        chat.max_tokens = 800;
        for (int attempt = 0; attempt < 2; ++attempt) {
            const ChatResponse response = gateway_.complete(chat);
            result_.transcript.push_back(response.request_hash);
            std::string text = trim(response.text);
            if (!text.empty()) {
                return text;
            }
        }
        throw ContentError("narrativizer: empty model output for " + request_.entity_id + " (" +
                           kind_word(request_.kind) + ")");
    }

private:
    Gateway& gateway_;
    const NarrativeRequest& request_;
    NarrativeResult& result_;
};

} // namespace

NarrativeRequest make_narrative_request(std::string entity_id, NarrativeKind kind, const ScoreProfile& scores,
                                        const InstrumentSchema& schema, int cod_rounds, std::string model_id) {
    NarrativeRequest request;
    request.entity_id = std::move(entity_id);
    request.kind = kind;
    request.cod_rounds = cod_rounds;
    request.model_id = std::move(model_id);
    for (const auto& d : describe_profile(scores, schema)) {
        request.facet_sentences.push_back(d.sentence);
    }
    for (const auto& item : schema.items()) {
        request.item_texts.push_back(item.text);
    }
    return request;
}

NarrativeResult narrativize(const NarrativeRequest& request, Gateway& gateway, const TemplateSet& templates) {
    if (request.facet_sentences.empty()) {
        throw PreconditionError("narrative request without facet sentences");
    }
    if (request.cod_rounds < 1) {
        throw PreconditionError("cod_rounds must be >= 1");
    }
    NarrativeResult result;
    Chain chain(gateway, request, result);
    const std::string kind = kind_word(request.kind);
    const std::string facets = bullets(request.facet_sentences);

    result.technical_summary =
        chain.ask(fill_template(templates.get("narrative_technical"), {{"kind", kind}, {"facets", facets}}));
    std::string current = result.technical_summary;
    for (int round = 0; round < request.cod_rounds; ++round) {
        current = chain.ask(fill_template(templates.get("narrative_densify"),
                                          {{"kind", kind}, {"summary", current}, {"facets", facets}}));
        result.intermediate_summaries.push_back(current);
    }
    result.expert_text =
        chain.ask(fill_template(templates.get("narrative_expert"), {{"kind", kind}, {"summary", current}}));
    result.everyday_text =
        chain.ask(fill_template(templates.get("narrative_everyday"), {{"kind", kind}, {"summary", current}}));
    result.transcript_ref = result.transcript.front();

    if (result.expert_text == result.everyday_text) {
        result.flags.push_back("registers: expert and everyday texts are identical");
    }
    for (const char* heading : {"Psychotherapist", "Overall Personality Summary", "Overall Value Summary"}) {
        if (contains_icase(result.everyday_text, heading)) {
            result.flags.push_back(std::string("registers: everyday text contains heading token '") + heading + "'");
        }
    }
    for (const auto& item : request.item_texts) {
        for (const auto* text : {&result.expert_text, &result.everyday_text}) {
            if (contains_icase(*text, item)) {
                result.flags.push_back("echo: repeats instrument item '" + item + "'");
            }
        }
    }
    return result;
}

PersonalIdentityNarrative build_narrative(const Profile& profile, const SchemaSet& schemas, Gateway& gateway,
                                          const TemplateSet& templates, const NarrativeOptions& options,
                                          std::vector<NarrativeResult>* results) {
    const ScoreProfile bfi = score(profile.personal_raw.bfi_responses, schemas.bfi);
    const ScoreProfile pvq = score(profile.personal_raw.pvq_responses, schemas.pvq);
    const NarrativeResult personality = narrativize(
        make_narrative_request(profile.entity_id, NarrativeKind::personality, bfi, schemas.bfi, options.cod_rounds,
                               options.model_id),
        gateway, templates);
    const NarrativeResult values = narrativize(
        make_narrative_request(profile.entity_id, NarrativeKind::values, pvq, schemas.pvq, options.cod_rounds,
                               options.model_id),
        gateway, templates);
    if (results != nullptr) {
        results->push_back(personality);
        results->push_back(values);
    }
    return PersonalIdentityNarrative{personality.expert_text, personality.everyday_text, values.expert_text,
                                     values.everyday_text};
}

} // namespace personakit
