#include "personakit/cli.hpp"

#include "personakit/error.hpp"
#include "personakit/render.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace personakit::cli {

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kValidationError = 2;

fs::path default_data_dir() {
    if (const char* env = std::getenv("PERSONAKIT_DATA")) {
        return env;
    }
#ifdef PERSONAKIT_DEFAULT_DATA_DIR
    return PERSONAKIT_DEFAULT_DATA_DIR;
#else
    return "data";
#endif
}

std::vector<Condition> conditions_from(const std::vector<std::string>& names) {
    std::vector<Condition> out;
    for (const auto& n : names) {
        out.push_back(parse_condition(n));
    }
    return out;
}

} // namespace

int run_main(int argc, char** argv) {
    CLI::App app{"Self-concept persona toolkit: build profiles, render conditions, run evaluation batteries"};
    app.require_subcommand(1);

    std::string data_dir = default_data_dir().string();
    app.add_option("--data", data_dir, "Directory holding schemas/ and templates/");

    // build-profile
    auto* build = app.add_subcommand("build-profile", "Score raw inputs and write profiles with narratives");
    std::vector<std::string> build_inputs;
    std::string build_out = "profiles";
    std::string build_mode = "replay";
    std::string build_cassette;
    std::string build_model = "gpt-4o";
    int cod_rounds = 3;
    bool force = false;
    build->add_option("inputs", build_inputs, "Raw profile documents")->required()->check(CLI::ExistingFile);
    build->add_option("--out-dir", build_out, "Output directory");
    build->add_option("--mode", build_mode, "live, record or replay");
    build->add_option("--cassette", build_cassette, "Cassette file");
    build->add_option("--model", build_model, "Narrativizer model id");
    build->add_option("--cod-rounds", cod_rounds, "Densification passes")->check(CLI::NonNegativeNumber);
    build->add_flag("--force", force, "Write profiles even when validation fails");

    // render
    auto* render = app.add_subcommand("render", "Write one prompt file per entity and condition");
    std::string render_profiles;
    std::string render_out = "renders";
    std::vector<std::string> render_conditions{"S", "P", "C", "SP", "SC", "PC", "SPC"};
    render->add_option("--profiles", render_profiles, "Profile directory")->required()->check(CLI::ExistingDirectory);
    render->add_option("--out-dir", render_out, "Output directory");
    render->add_option("--conditions", render_conditions, "Subset of S P C SP SC PC SPC")->delimiter(',');

    // run
    auto* run = app.add_subcommand("run", "Execute evaluation batteries");
    std::string run_config;
    std::string run_mode;
    std::string run_cassette;
    std::string run_output;
    std::vector<std::string> run_models;
    std::vector<std::string> run_conditions;
    std::vector<std::string> run_batteries;
    int run_parallelism = 0;
    run->add_option("--config", run_config, "Run config file; its fields override flags")->check(CLI::ExistingFile);
    run->add_option("--mode", run_mode, "live, record or replay");
    run->add_option("--cassette", run_cassette, "Cassette file");
    run->add_option("--output", run_output, "Output directory");
    run->add_option("--models", run_models, "Model ids")->delimiter(',');
    run->add_option("--conditions", run_conditions, "Conditions")->delimiter(',');
    run->add_option("--batteries", run_batteries, "guesswho,tst,inference,essays")->delimiter(',');
    run->add_option("--parallelism", run_parallelism, "Concurrent requests");

    // report
    auto* report = app.add_subcommand("report", "Recompute the analysis bundle from record files");
    std::string report_records;
    std::string report_out;
    bool yates = false;
    report->add_option("records", report_records, "Directory of *.jsonl records")->required();
    report->add_option("--out-dir", report_out, "Output directory (default: <records>/../reports)");
    report->add_flag("--yates", yates, "Continuity correction for 2x2 tests");

    // cassette
    auto* cassette = app.add_subcommand("cassette", "Inspect or verify a cassette file");
    std::string cassette_action;
    std::string cassette_path;
    cassette->add_option("action", cassette_action, "inspect or verify")
        ->required()
        ->check(CLI::IsMember({"inspect", "verify"}));
    cassette->add_option("path", cassette_path, "Cassette file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    const fs::path data(data_dir);
    try {
        if (*build) {
            const auto schemas = SchemaSet::load(data / "schemas");
            const auto templates = TemplateSet::load(data / "templates");
            const auto mode = parse_gateway_mode(build_mode);
            auto gateway = make_gateway(mode, build_cassette.empty() ? std::nullopt
                                                                     : std::optional<fs::path>(build_cassette));
            NarrativeOptions options;
            options.cod_rounds = cod_rounds;
            options.model_id = build_model;
            int code = kOk;
            for (const auto& input : build_inputs) {
                const auto result = cmd_build_profile(input, build_out, schemas, templates, *gateway, options, force);
                if (!result.validation.violations.empty()) {
                    std::cerr << input << ":\n" << result.validation.to_text();
                }
                if (!result.written) {
                    std::cerr << input << ": not written (validation failed; use --force)\n";
                    code = kValidationError;
                } else {
                    std::cout << result.output.string() << "\n";
                }
            }
            return code;
        }
        if (*render) {
            const auto schemas = SchemaSet::load(data / "schemas");
            const auto templates = TemplateSet::load(data / "templates");
            const auto summary =
                cmd_render(render_profiles, conditions_from(render_conditions), render_out, schemas, templates);
            for (const auto& m : summary.missing) {
                std::cerr << "missing: " << m << "\n";
            }
            std::cout << summary.files.size() << " files written to " << render_out << "\n";
            return kOk;
        }
        if (*run) {
            RunConfig config;
            config.paths.schemas = data / "schemas";
            config.paths.templates = data / "templates";
            config.paths.roster = data / "roster.json";
            config.paths.topics = data / "topics.json";
            config.paths.output = "run";
            if (!run_mode.empty()) {
                config.mode = parse_gateway_mode(run_mode);
            }
            if (!run_cassette.empty()) {
                config.paths.cassette = run_cassette;
            }
            if (!run_output.empty()) {
                config.paths.output = run_output;
            }
            if (!run_models.empty()) {
                config.models = run_models;
            }
            if (!run_conditions.empty()) {
                config.conditions = conditions_from(run_conditions);
            }
            if (!run_batteries.empty()) {
                config.batteries = {run_batteries.begin(), run_batteries.end()};
            }
            if (run_parallelism > 0) {
                config.parallelism = run_parallelism;
            }
            if (!run_config.empty()) {
                config.merge_json(read_json_file(run_config), fs::path(run_config).parent_path());
            }
            const auto summary = cmd_run(config);
            for (const auto& [battery, n] : summary.record_counts) {
                std::cout << battery << ": " << n << " records\n";
            }
            std::cout << "report digest " << summary.report_digest << "\n";
            return kOk;
        }
        if (*report) {
            const fs::path records(report_records);
            const fs::path out = report_out.empty() ? records.parent_path() / "reports" : fs::path(report_out);
            stats::ReportOptions options;
            options.continuity_correction = yates;
            const auto schemas = SchemaSet::load(data / "schemas");
            std::cout << "report digest " << cmd_report(records, out, schemas, options) << "\n";
            return kOk;
        }
        if (*cassette) {
            const auto info =
                cassette_action == "verify" ? cmd_cassette_verify(cassette_path) : cmd_cassette_inspect(cassette_path);
            std::cout << "entries " << info.entries << "\nrequests " << info.hashes << "\n";
            for (const auto& [model, n] : info.per_model) {
                std::cout << "model " << model << " " << n << "\n";
            }
            std::cout << "digest " << info.digest << "\n";
            if (cassette_action == "verify") {
                std::cout << "ok\n";
            }
            return kOk;
        }
    } catch (const IncompleteResponses& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const ValidationFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidationError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kConfigError;
    }
    return kOk;
}

} // namespace personakit::cli
