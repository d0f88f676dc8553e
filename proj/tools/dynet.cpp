#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dynet/errors.hpp"
#include "dynet/scenario.hpp"

namespace {

enum Exit { kOk = 0, kChecksFailed = 1, kUsage = 2, kRefused = 3, kFailure = 4 };

// Unreadable or malformed files are config errors, not internal failures.
nlohmann::json load(const std::string& path)
{
    try {
        return dynet::read_config_file(path);
    } catch (const std::runtime_error& e) {
        throw dynet::ConfigError({{path, e.what()}});
    }
}

int cmd_run(const std::string& path, bool check, int jobs, const std::optional<std::uint64_t>& seed,
            const std::string& out_flag)
{
    const auto doc = load(path);
    const auto config = dynet::parse_config(doc);
    dynet::RunOptions opts;
    opts.jobs = jobs;
    opts.seed = seed;
    try {
        opts.limits = dynet::limits_from_env();
    } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    }
    const auto report = dynet::run_scenario(config, opts);

    const std::string dir = !out_flag.empty() ? out_flag : !config.output.empty() ? config.output : "out/" + config.name;
    dynet::write_report(report, dir);

    int failed = 0;
    for (const auto& c : report.checks) {
        std::cout << (c.pass ? "PASS " : "FAIL ") << c.name;
        if (c.criterion)
            std::cout << " [criterion " << *c.criterion << "]";
        std::cout << ": " << c.detail << '\n';
        failed += !c.pass;
    }
    std::cout << "wrote " << dir << "/report.json\n";
    if (check && failed > 0) {
        std::cerr << failed << " check(s) failed\n";
        return kChecksFailed;
    }
    return kOk;
}

int cmd_validate(const std::string& path)
{
    const auto doc = load(path);
    const auto diags = dynet::validate_config(doc);
    for (const auto& d : diags)
        std::cout << d.field << ": " << d.message << '\n';
    if (diags.empty()) {
        std::cout << path << ": ok\n";
        return kOk;
    }
    return kUsage;
}

int cmd_list()
{
    for (const auto& e : dynet::list_scenarios()) {
        std::cout << dynet::scenario_kind_name(e.kind) << '\n'
                  << "  parameters: " << e.parameters << '\n'
                  << "  checks:     " << e.anchor << '\n';
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic random network experiments"};
    app.require_subcommand(1);

    std::string config_path;
    bool check = false;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string out_dir;

    auto* run = app.add_subcommand("run", "Run a scenario and write CSV rows plus report.json");
    run->add_option("config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
    run->add_flag("--check", check, "Exit nonzero if any check fails");
    run->add_option("--jobs", jobs, "Worker threads for independent trials")->check(CLI::Range(1, 256));
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out_dir, "Output directory");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Scenario config (JSON)")->required();

    app.add_subcommand("list", "List scenario kinds");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*run)
            return cmd_run(config_path, check, jobs, seed, out_dir);
        if (*validate)
            return cmd_validate(config_path);
        return cmd_list();
    } catch (const dynet::ConfigError& e) {
        std::cerr << e.what() << '\n';
        return kUsage;
    } catch (const dynet::ResourceLimitExceeded& e) {
        std::cerr << "refusing to run: " << e.what() << '\n';
        return kRefused;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}
