#include "personakit/eval/inference.hpp"

#include "personakit/error.hpp"
#include "personakit/persona_runtime.hpp"
#include "personakit/stats.hpp"

#include <array>
#include <cmath>

namespace personakit::eval {

namespace {

constexpr std::array<Questionnaire, 3> kSections{Questionnaire::demographics, Questionnaire::bfi, Questionnaire::pvq};

std::string section_name(Questionnaire section) {
    switch (section) {
    case Questionnaire::demographics:
        return "demographics";
    case Questionnaire::bfi:
        return "bfi";
    case Questionnaire::pvq:
        return "pvq";
    }
    return "demographics";
}

json demographic_item_json(const DemographicItem& item) {
    json entry{{"id", item.item_id}, {"question", item.label}};
    if (item.kind == AnswerKind::ordinal) {
        entry["options"] = item.levels;
    } else if (item.kind == AnswerKind::categorical && !item.options.empty()) {
        entry["options"] = item.options;
    } else {
        entry["answer"] = item.conditional() ? "a few words, or N/A if not relevant" : "a few words";
    }
    return entry;
}

json scale_item_json(const InstrumentItem& item) {
    return json{{"id", item.item_id}, {"statement", item.text}};
}

std::string item_lines(const std::vector<json>& items) {
    std::vector<std::string> lines;
    for (const auto& item : items) {
        lines.push_back(item.dump());
    }
    return join(lines, "\n");
}

std::vector<json> section_items(Questionnaire section, const SchemaSet& schemas) {
    std::vector<json> items;
    if (section == Questionnaire::demographics) {
        for (const auto& item : schemas.demographics.items()) {
            items.push_back(demographic_item_json(item));
        }
    } else {
        const auto& schema = section == Questionnaire::bfi ? schemas.bfi : schemas.pvq;
        for (const auto& item : schema.items()) {
            items.push_back(scale_item_json(item));
        }
    }
    return items;
}

std::string section_instructions(Questionnaire section, const SchemaSet& schemas) {
    switch (section) {
    case Questionnaire::demographics:
        return "For items with options, answer with exactly one option, copied verbatim.";
    case Questionnaire::bfi:
        return "For each statement, rate how well \"" + schemas.bfi.stem() +
               "\" followed by the statement describes you, from 1 (disagree strongly) to 7 (agree strongly). "
               "Answer with integers.";
    case Questionnaire::pvq:
        return "Each statement describes a person. " + schemas.pvq.stem() +
               " Answer from 1 (not like me at all) to 7 (very much like me) with integers.";
    }
    return {};
}

} // namespace

std::string questionnaire_text(Questionnaire section, const SchemaSet& schemas, const TemplateSet& templates) {
    return fill_template(templates.get("inference_questionnaire"),
                         {{"instructions", section_instructions(section, schemas)},
                          {"items", item_lines(section_items(section, schemas))}});
}

std::optional<std::string> validate_demographic(const DemographicItem& item, const json& value) {
    if (value.is_string()) {
        return item.canonical_answer(value.get<std::string>());
    }
    if (value.is_number()) {
        return item.canonical_answer(value.dump());
    }
    return std::nullopt;
}

std::optional<int> validate_scale(const InstrumentSchema& schema, const json& value) {
    double number = 0.0;
    if (value.is_number()) {
        number = value.get<double>();
    } else if (value.is_string()) {
        const std::string text = trim(value.get<std::string>());
        std::size_t used = 0;
        try {
            number = std::stod(text, &used);
        } catch (const std::exception&) {
            return std::nullopt;
        }
        if (used != text.size()) {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }
    if (number != std::floor(number) || number < schema.scale_min() || number > schema.scale_max()) {
        return std::nullopt;
    }
    return static_cast<int>(number);
}

namespace {

// Applies whatever answers in `reply` are valid; returns the ids still
// lacking a valid answer among `wanted`.
std::vector<std::string> absorb(Questionnaire section, const std::vector<std::string>& wanted, std::string_view reply,
                                const SchemaSet& schemas, InferenceAnswerSet& set) {
    const auto doc = extract_json_object(reply);
    std::vector<std::string> invalid;
    for (const auto& id : wanted) {
        if (!doc || !doc->contains(id)) {
            invalid.push_back(id);
            continue;
        }
        const json& value = (*doc)[id];
        if (section == Questionnaire::demographics) {
            if (auto answer = validate_demographic(*schemas.demographics.find(id), value)) {
                set.inferred_social.answers[id] = *answer;
            } else {
                invalid.push_back(id);
            }
        } else {
            const auto& schema = section == Questionnaire::bfi ? schemas.bfi : schemas.pvq;
            auto& target = section == Questionnaire::bfi ? set.inferred_bfi : set.inferred_pvq;
            if (auto answer = validate_scale(schema, value)) {
                target.responses[id] = *answer;
            } else {
                invalid.push_back(id);
            }
        }
    }
    return invalid;
}

std::vector<std::string> section_ids(Questionnaire section, const SchemaSet& schemas, bool required_only) {
    std::vector<std::string> ids;
    if (section == Questionnaire::demographics) {
        for (const auto& item : schemas.demographics.items()) {
            if (!required_only || !item.conditional()) {
                ids.push_back(item.item_id);
            }
        }
    } else {
        for (const auto& item : (section == Questionnaire::bfi ? schemas.bfi : schemas.pvq).items()) {
            ids.push_back(item.item_id);
        }
    }
    return ids;
}

std::vector<json> reask_items(Questionnaire section, const std::vector<std::string>& ids, const SchemaSet& schemas) {
    std::vector<json> items;
    for (const auto& id : ids) {
        if (section == Questionnaire::demographics) {
            items.push_back(demographic_item_json(*schemas.demographics.find(id)));
        } else {
            const auto& schema = section == Questionnaire::bfi ? schemas.bfi : schemas.pvq;
            json entry = scale_item_json(*schema.find_item(id));
            entry["answer"] = "integer from " + std::to_string(schema.scale_min()) + " to " +
                              std::to_string(schema.scale_max());
            items.push_back(entry);
        }
    }
    return items;
}

} // namespace

std::vector<InferenceAnswerSet> run_inference_batch(const std::vector<InferenceJob>& jobs, const SchemaSet& schemas,
                                                    const TemplateSet& templates, Gateway& gateway, int parallelism) {
    struct Slot {
        std::size_t set;
        Questionnaire section;
    };
    std::vector<InferenceAnswerSet> sets;
    std::vector<Slot> slots;
    std::vector<ChatRequest> requests;
    for (const auto& job : jobs) {
        if (job.persona->condition != Condition::C) {
            throw PreconditionError("inference needs a C-only persona, got " +
                                    std::string(to_string(job.persona->condition)) + " for " +
                                    job.persona->entity_id);
        }
        if (job.iterations < 1) {
            throw ConfigError("inference iterations must be >= 1");
        }
        for (int it = 0; it < job.iterations; ++it) {
            InferenceAnswerSet set;
            set.entity_id = job.persona->entity_id;
            set.model_id = job.model_id;
            set.iteration = it;
            sets.push_back(std::move(set));
            for (const auto section : kSections) {
                ChatRequest request = embody(*job.persona, templates, job.model_id);
                request.user_turns.push_back(questionnaire_text(section, schemas, templates));
                request.response_format = ResponseFormat::json_object;
                request.max_tokens = 1500;
                slots.push_back({sets.size() - 1, section});
                requests.push_back(std::move(request));
            }
        }
    }

    const auto first = gateway.complete_batch(requests, parallelism);
    std::vector<std::size_t> reask_slot;
    std::vector<std::vector<std::string>> reask_ids;
    std::vector<ChatRequest> reasks;
    for (std::size_t k = 0; k < slots.size(); ++k) {
        auto& set = sets[slots[k].set];
        const auto section = slots[k].section;
        if (!first[k].ok()) {
            set.failed = true;
            set.error = section_name(section) + ": " + first[k].error;
            continue;
        }
        auto invalid = absorb(section, section_ids(section, schemas, false), first[k].response->text, schemas, set);
        // Conditional items may legitimately stay unanswered.
        std::erase_if(invalid, [&](const std::string& id) {
            return section == Questionnaire::demographics && schemas.demographics.find(id)->conditional();
        });
        if (invalid.empty()) {
            continue;
        }
        ChatRequest reask = requests[k];
        reask.user_turns.push_back(
            fill_template(templates.get("inference_reask"),
                          {{"previous", trim(first[k].response->text)},
                           {"items", item_lines(reask_items(section, invalid, schemas))}}));
        for (const auto& id : invalid) {
            set.reasked.push_back(section_name(section) + ":" + id);
        }
        reask_slot.push_back(k);
        reask_ids.push_back(std::move(invalid));
        reasks.push_back(std::move(reask));
    }

    const auto second = gateway.complete_batch(reasks, parallelism);
    for (std::size_t r = 0; r < reasks.size(); ++r) {
        auto& set = sets[slots[reask_slot[r]].set];
        const auto section = slots[reask_slot[r]].section;
        std::vector<std::string> still = reask_ids[r];
        if (second[r].ok()) {
            still = absorb(section, reask_ids[r], second[r].response->text, schemas, set);
        }
        for (const auto& id : still) {
            set.missing.push_back(section_name(section) + ":" + id);
        }
    }
    return sets;
}

std::vector<InferenceAnswerSet> run_inference(const RenderedPersona& c_only_persona, const SchemaSet& schemas,
                                              const TemplateSet& templates, const std::string& model_id,
                                              Gateway& gateway, int iterations) {
    return run_inference_batch({InferenceJob{&c_only_persona, model_id, iterations}}, schemas, templates, gateway, 1);
}

namespace {

const Profile* golden_for(const std::map<std::string, const Profile*>& golden, const std::string& entity) {
    const auto it = golden.find(entity);
    if (it == golden.end() || it->second == nullptr) {
        throw PreconditionError("no golden profile for " + entity);
    }
    return it->second;
}

ProfileCorrelation correlate_profiles(const std::vector<const InferenceAnswerSet*>& sets,
                                      const std::map<std::string, const Profile*>& golden,
                                      const InstrumentSchema& schema, bool bfi) {
    ProfileCorrelation out;
    std::map<std::string, std::vector<double>> per_entity;
    for (const auto* set : sets) {
        const Profile* g = golden_for(golden, set->entity_id);
        const auto& inferred = bfi ? set->inferred_bfi : set->inferred_pvq;
        const auto& truth = bfi ? g->personal_raw.bfi_responses : g->personal_raw.pvq_responses;
        try {
            const auto a = score(inferred, schema).group_vector(schema);
            const auto b = score(truth, schema).group_vector(schema);
            per_entity[set->entity_id].push_back(stats::pearson_r(a, b));
            ++out.answer_sets;
        } catch (const IncompleteResponses&) {
            ++out.excluded;
        } catch (const UndefinedCorrelation&) {
            ++out.excluded;
        }
    }
    std::vector<double> entity_means;
    for (const auto& [entity, rs] : per_entity) {
        const double m = stats::mean(rs);
        out.per_entity[entity] = m;
        entity_means.push_back(m);
    }
    out.entities = entity_means.size();
    if (!entity_means.empty()) {
        out.mean_r = stats::mean(entity_means);
        out.sd_r = stats::sample_sd(entity_means);
    }
    return out;
}

std::string fold_answer(std::string_view text) {
    return to_lower(trim(text));
}

} // namespace

InferenceReport compare_inference(const std::vector<InferenceAnswerSet>& answers,
                                  const std::map<std::string, const Profile*>& golden, const SchemaSet& schemas) {
    InferenceReport report;
    std::vector<const InferenceAnswerSet*> usable;
    for (const auto& set : answers) {
        ++report.answer_sets;
        if (set.failed) {
            ++report.failed_sets;
            continue;
        }
        usable.push_back(&set);
    }

    for (const auto& item : schemas.demographics.items()) {
        if (item.kind == AnswerKind::categorical) {
            std::vector<std::pair<std::optional<std::string>, std::string>> pairs;
            for (const auto* set : usable) {
                const Profile* g = golden_for(golden, set->entity_id);
                const auto truth = g->social.answers.find(item.item_id);
                if (truth == g->social.answers.end()) {
                    continue;
                }
                const auto guess = set->inferred_social.answers.find(item.item_id);
                std::optional<std::string> predicted;
                if (guess != set->inferred_social.answers.end()) {
                    predicted = fold_answer(guess->second);
                }
                pairs.emplace_back(predicted, fold_answer(truth->second));
            }
            ItemAccuracy row;
            row.item_id = item.item_id;
            try {
                const auto acc = stats::accuracy(pairs);
                row.accuracy = acc.accuracy;
                row.matches = acc.matches;
                row.total = acc.total;
                row.missing = acc.missing;
            } catch (const UndefinedCorrelation& e) {
                row.missing = pairs.size();
                row.note = e.what();
                ++report.undefined_items;
            }
            report.categorical.push_back(std::move(row));
        } else if (item.kind == AnswerKind::ordinal) {
            std::vector<double> xs;
            std::vector<double> ys;
            for (const auto* set : usable) {
                const Profile* g = golden_for(golden, set->entity_id);
                const auto truth = g->social.answers.find(item.item_id);
                const auto guess = set->inferred_social.answers.find(item.item_id);
                if (truth == g->social.answers.end() || guess == set->inferred_social.answers.end()) {
                    continue;
                }
                const auto a = item.ordinal_code(guess->second);
                const auto b = item.ordinal_code(truth->second);
                if (a && b) {
                    xs.push_back(*a);
                    ys.push_back(*b);
                }
            }
            ItemCorrelation row;
            row.item_id = item.item_id;
            row.n = xs.size();
            try {
                const auto rho = stats::spearman_rho(xs, ys);
                row.rho = rho.statistic;
                row.p_value = rho.p_value;
                row.approximate = rho.approximate;
            } catch (const UndefinedCorrelation& e) {
                row.note = std::string("undefined: ") + e.what();
                ++report.undefined_items;
            } catch (const DomainError& e) {
                row.note = std::string("undefined: ") + e.what();
                ++report.undefined_items;
            }
            report.ordinal.push_back(std::move(row));
        }
    }

    report.bfi = correlate_profiles(usable, golden, schemas.bfi, true);
    report.pvq = correlate_profiles(usable, golden, schemas.pvq, false);
    return report;
}

namespace {

json optional_number(const std::optional<double>& value) {
    return value ? json(*value) : json(nullptr);
}

json to_json(const ProfileCorrelation& c) {
    return json{{"mean_r", optional_number(c.mean_r)}, {"sd_r", c.sd_r},          {"entities", c.entities},
                {"answer_sets", c.answer_sets},        {"excluded", c.excluded}, {"per_entity", c.per_entity}};
}

} // namespace

json to_json(const InferenceReport& report) {
    json categorical = json::array();
    for (const auto& row : report.categorical) {
        categorical.push_back(json{{"item_id", row.item_id},
                                   {"accuracy", optional_number(row.accuracy)},
                                   {"matches", row.matches},
                                   {"total", row.total},
                                   {"missing", row.missing},
                                   {"note", row.note}});
    }
    json ordinal = json::array();
    for (const auto& row : report.ordinal) {
        ordinal.push_back(json{{"item_id", row.item_id},
                               {"rho", optional_number(row.rho)},
                               {"p_value", optional_number(row.p_value)},
                               {"n", row.n},
                               {"approximate", row.approximate},
                               {"note", row.note}});
    }
    return json{{"categorical", categorical},
                {"ordinal", ordinal},
                {"bfi", to_json(report.bfi)},
                {"pvq", to_json(report.pvq)},
                {"answer_sets", report.answer_sets},
                {"failed_sets", report.failed_sets},
                {"undefined_items", report.undefined_items}};
}

} // namespace personakit::eval
