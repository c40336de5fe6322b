#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "personakit/gateway.hpp"
#include "personakit/profile.hpp"
#include "personakit/render.hpp"

namespace personakit::eval {

enum class Questionnaire { demographics, bfi, pvq };

struct InferenceAnswerSet {
    std::string entity_id;
    std::string model_id;
    int iteration = 0;
    SocialIdentity inferred_social;
    ScaleResponseSet inferred_bfi{InstrumentId::bfi2s, {}};
    ScaleResponseSet inferred_pvq{InstrumentId::pvq21, {}};
    std::vector<std::string> reasked; // "bfi:bfi07" style refs
    std::vector<std::string> missing; // still invalid after the re-ask
    bool failed = false;
    std::string error;
};

// Questionnaire turn for one section: item ids, wording and admissible answers.
std::string questionnaire_text(Questionnaire section, const SchemaSet& schemas, const TemplateSet& templates);

// Canonical answer for one item, or nullopt when `value` is not admissible.
std::optional<std::string> validate_demographic(const DemographicItem& item, const json& value);
std::optional<int> validate_scale(const InstrumentSchema& schema, const json& value);

struct InferenceJob {
    const RenderedPersona* persona = nullptr; // must be condition C
    std::string model_id;
    int iterations = 5;
};

// Per iteration, the persona answers the demographic questionnaire and both
// instruments. Invalid answers are re-asked once, then left missing. A
// gateway failure marks that iteration failed; the others proceed.
// Output is ordered by job, then iteration.
std::vector<InferenceAnswerSet> run_inference_batch(const std::vector<InferenceJob>& jobs, const SchemaSet& schemas,
                                                    const TemplateSet& templates, Gateway& gateway, int parallelism);

std::vector<InferenceAnswerSet> run_inference(const RenderedPersona& c_only_persona, const SchemaSet& schemas,
                                              const TemplateSet& templates, const std::string& model_id,
                                              Gateway& gateway, int iterations = 5);

struct ItemAccuracy {
    std::string item_id;
    std::optional<double> accuracy;
    std::size_t matches = 0;
    std::size_t total = 0;
    std::size_t missing = 0;
    std::string note;
};

struct ItemCorrelation {
    std::string item_id;
    std::optional<double> rho;
    std::optional<double> p_value;
    std::size_t n = 0;
    bool approximate = false;
    std::string note;
};

struct ProfileCorrelation {
    std::optional<double> mean_r;
    double sd_r = 0.0;
    std::size_t entities = 0;      // entities contributing an r
    std::size_t answer_sets = 0;   // answer sets contributing an r
    std::size_t excluded = 0;      // answer sets skipped (incomplete or zero variance)
    std::map<std::string, double> per_entity;
};

struct InferenceReport {
    std::vector<ItemAccuracy> categorical;
    std::vector<ItemCorrelation> ordinal;
    ProfileCorrelation bfi;
    ProfileCorrelation pvq;
    std::size_t answer_sets = 0;
    std::size_t failed_sets = 0;
    std::size_t undefined_items = 0;
};

// Categorical items: accuracy over every (entity, iteration). Ordinal items:
// Spearman rho between inferred and golden level codes. Profiles: Pearson r
// between inferred and golden facet (value) mean vectors, averaged per entity,
// then mean and sample SD across entities. Free-text items are not scored.
InferenceReport compare_inference(const std::vector<InferenceAnswerSet>& answers,
                                  const std::map<std::string, const Profile*>& golden, const SchemaSet& schemas);

json to_json(const InferenceReport& report);

} // namespace personakit::eval
