#pragma once

#include <string>
#include <vector>

#include "personakit/gateway.hpp"
#include "personakit/profile.hpp"
#include "personakit/psychometrics.hpp"
#include "personakit/render.hpp"

namespace personakit {

enum class NarrativeKind { personality, values };

struct NarrativeRequest {
    std::string entity_id;
    NarrativeKind kind = NarrativeKind::personality;
    std::vector<std::string> facet_sentences;
    int cod_rounds = 3;
    std::string model_id = "gpt-4o";
    // Instrument wording the final texts must not repeat verbatim.
    std::vector<std::string> item_texts;
};

struct NarrativeResult {
    std::string expert_text;
    std::string everyday_text;
    std::string technical_summary;
    std::vector<std::string> intermediate_summaries; // one per densification round
    std::string transcript_ref;                      // cassette key of the first exchange
    std::vector<std::string> transcript;             // every request hash, in call order
    std::vector<std::string> flags;                  // soft-check findings

    bool operator==(const NarrativeResult&) const = default;
};

NarrativeRequest make_narrative_request(std::string entity_id, NarrativeKind kind, const ScoreProfile& scores,
                                        const InstrumentSchema& schema, int cod_rounds, std::string model_id);

// Technical summary, `cod_rounds` densification passes, then one rewrite per
// register. Each step depends on the previous, so calls are sequential.
// An empty reply is retried once and then surfaces as ContentError.
NarrativeResult narrativize(const NarrativeRequest& request, Gateway& gateway, const TemplateSet& templates);

struct NarrativeOptions {
    int cod_rounds = 3;
    std::string model_id = "gpt-4o";
};

// Scores both instruments and runs the personality and the values chain.
PersonalIdentityNarrative build_narrative(const Profile& profile, const SchemaSet& schemas, Gateway& gateway,
                                          const TemplateSet& templates, const NarrativeOptions& options,
                                          std::vector<NarrativeResult>* results = nullptr);

} // namespace personakit
