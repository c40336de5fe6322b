#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "personakit/condition.hpp"
#include "personakit/condition_report.hpp"
#include "personakit/gateway.hpp"
#include "personakit/narrativizer.hpp"
#include "personakit/profile.hpp"

namespace personakit::cli {

namespace fs = std::filesystem;

inline const std::vector<std::string> kBatteries{"guesswho", "tst", "inference", "essays"};

struct RunPaths {
    fs::path profiles;  // directory of profile documents
    fs::path schemas;   // demographics.json, bfi2s.json, pvq21.json
    fs::path templates; // *.txt prompt templates
    fs::path roster;
    fs::path topics;
    std::optional<fs::path> cassette;
    fs::path output;
};

struct RunConfig {
    GatewayMode mode = GatewayMode::replay;
    std::vector<std::string> models{"gpt-4o"};
    std::string judge_model = "gpt-4o";
    std::vector<Condition> conditions = enumerate_conditions();
    std::vector<Condition> essay_conditions{Condition::S, Condition::P, Condition::C, Condition::SPC};
    std::set<std::string> batteries{kBatteries.begin(), kBatteries.end()};
    std::map<std::string, int> iterations{{"guesswho", 1}, {"tst", 1}, {"inference", 5}};
    int parallelism = 4;
    std::uint64_t seed = 2024;
    int essay_max_tokens = 600;
    stats::ReportOptions report;
    RunPaths paths;

    // Relative paths resolve against `base_dir`. Keys absent from `doc` keep
    // the values already in `*this`, so flags can seed a config file.
    void merge_json(const json& doc, const fs::path& base_dir);
    static RunConfig load(const fs::path& path);

    // Throws ConfigError: empty model or condition list, unknown battery,
    // missing input path, replay without a cassette.
    void validate() const;

    json to_json() const;
    // Fields that determine results; excludes paths and parallelism.
    json content_json() const;
    int iterations_for(const std::string& battery) const;
};

struct RunManifest {
    json config;
    std::map<std::string, std::string> digests; // schemas, templates, roster, topics, cassette
    std::map<std::string, std::size_t> record_counts;
    std::map<std::string, std::string> record_digests;
    std::string content_digest;
    std::string report_digest;
    std::string started_at;
    std::string finished_at;

    json to_json() const;
};

// Opens the cassette for `mode` and wires the provider. Live and record use
// `provider`, or the default HTTP router when it is null.
std::unique_ptr<Gateway> make_gateway(GatewayMode mode, const std::optional<fs::path>& cassette,
                                      std::shared_ptr<Provider> provider = nullptr, int max_in_flight = 4);

struct BuildResult {
    Profile profile;
    ValidationReport validation;
    bool written = false;
    fs::path output;
};

// Raw inputs are a profile document without narratives. Instrument gaps
// surface as IncompleteResponses; other validation errors block writing
// unless `force` is set.
BuildResult cmd_build_profile(const fs::path& input, const fs::path& out_dir, const SchemaSet& schemas,
                              const TemplateSet& templates, Gateway& gateway, const NarrativeOptions& options,
                              bool force = false);

struct RenderSummary {
    std::vector<fs::path> files;
    std::vector<std::string> missing; // "<entity>/<condition>: reason"
};

// One prompt file per (entity, condition) under out_dir/<entity>/<cond>.txt.
RenderSummary cmd_render(const fs::path& profiles_dir, const std::vector<Condition>& conditions,
                         const fs::path& out_dir, const SchemaSet& schemas, const TemplateSet& templates);

struct RunSummary {
    std::map<std::string, std::size_t> record_counts;
    std::string report_digest;
    RunManifest manifest;
};

RunSummary cmd_run(const RunConfig& config, std::shared_ptr<Provider> provider = nullptr);

struct RecordSet {
    std::vector<json> guesswho;
    std::vector<json> tst;
    std::vector<json> inference;
    std::vector<json> essays;

    std::size_t size() const { return guesswho.size() + tst.size() + inference.size() + essays.size(); }
};

// Reads <dir>/<battery>.jsonl for each battery present. Throws ConfigError
// when nothing is there.
RecordSet load_records(const fs::path& records_dir);

struct AnalysisBundle {
    json report;
    std::map<std::string, std::string> tables; // file name -> CSV text
};

AnalysisBundle analyze_records(const RecordSet& records, const SchemaSet& schemas,
                               const stats::ReportOptions& options, const std::string& manifest_digest);

// Writes report.json and the CSV tables to out_dir; returns the digest of
// report.json.
std::string write_bundle(const AnalysisBundle& bundle, const fs::path& out_dir);

// Embeds the content digest of <records_dir>/../manifest.json when present.
std::string cmd_report(const fs::path& records_dir, const fs::path& out_dir, const SchemaSet& schemas,
                       const stats::ReportOptions& options = {});

struct CassetteInfo {
    std::size_t entries = 0;
    std::size_t hashes = 0;
    std::map<std::string, std::size_t> per_model;
    std::string digest;
};

CassetteInfo cmd_cassette_inspect(const fs::path& path);
// Re-hashes every canonical request; throws ParseError on the first mismatch.
CassetteInfo cmd_cassette_verify(const fs::path& path);

// Returns the process exit code: 0 success, 1 config/IO error, 2 validation
// failure.
int run_main(int argc, char** argv);

} // namespace personakit::cli
