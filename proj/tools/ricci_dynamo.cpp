#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "ricci_dynamo/cli/runner.hpp"

namespace rc = ricci_dynamo::cli;

int main(int argc, char** argv) {
    CLI::App app{"Kinematic dynamo spectra on 2D Einstein manifolds"};
    app.require_subcommand(1);

    std::string run_path;
    rc::RunOptions options;
    std::string out_dir = options.out.string();
    auto* run = app.add_subcommand("run", "Run a scenario and write result tables");
    run->add_option("scenario", run_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory")->capture_default_str();
    run->add_option("--threads", options.threads, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
    const std::map<std::string, rc::OutputFormat> formats{
        {"csv", rc::OutputFormat::Csv}, {"json", rc::OutputFormat::Json}, {"both", rc::OutputFormat::Both}};
    run->add_option("--format", options.format, "csv, json or both")
        ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "Check a scenario file without running it");
    validate->add_option("scenario", validate_path, "Scenario file")->required();

    auto* version = app.add_subcommand("version", "Print the tool version");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : rc::kExitUsage;
    }

    if (*run) {
        options.out = out_dir;
        return rc::run_scenario(run_path, options, std::cout, std::cerr);
    }
    if (*validate) return rc::validate_scenario(validate_path, std::cout, std::cerr);
    if (*version) {
        std::cout << "ricci_dynamo " << rc::tool_version() << '\n';
        return 0;
    }
    return rc::kExitUsage;
}
