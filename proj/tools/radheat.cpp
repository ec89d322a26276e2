#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "radheat/commands.hpp"

int main(int argc, char** argv) {
    CLI::App app{"radheat: uniqueness experiments for rho u_t = Delta u on model manifolds"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    app.add_option("--config", config_path, "config file of 'section.key = value' lines");
    app.add_option("--set", overrides, "override one key, e.g. --set density.theta=3")
        ->expected(1)
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    app.add_option("--out", out_path, "write the CSV table here instead of stdout");
    app.fallthrough();

    auto* classify = app.add_subcommand("classify", "dichotomy verdict, criterion and completeness");
    auto* criterion = app.add_subcommand("criterion", "run the integral criterion for the configured weight");
    auto* supersolution = app.add_subcommand("supersolution", "tabulate the supersolution h of Delta h = -rho");
    auto* exhaust = app.add_subcommand("exhaust", "exhaustion by balls, time average at the probe radius");
    auto* solve = app.add_subcommand("solve", "one ball problem with R = run.R_min, long-format CSV");
    auto* verify = app.add_subcommand("verify", "invariant suites for the configured geometry");
    auto* config = app.add_subcommand("config", "print the effective configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    radheat::RunConfig cfg;
    try {
        cfg = config_path.empty() ? radheat::parse_config_text("", overrides)
                                  : radheat::parse_config_file(config_path, overrides);
    } catch (const radheat::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return radheat::exit_config;
    }

    std::ofstream file;
    if (!out_path.empty()) {
        file.open(out_path);
        if (!file) {
            std::cerr << "cannot write '" << out_path << "'\n";
            return radheat::exit_config;
        }
    }
    std::ostream& table = out_path.empty() ? std::cout : file;
    std::ostream& summary = out_path.empty() ? std::cerr : std::cout;

    try {
        if (*classify) return radheat::cmd_classify(cfg, std::cout);
        if (*verify) return radheat::cmd_verify(cfg, std::cout);
        if (*config) {
            std::cout << radheat::dump_config(cfg);
            return radheat::exit_ok;
        }
        if (*criterion) return radheat::cmd_criterion(cfg, table, summary);
        if (*supersolution) return radheat::cmd_supersolution(cfg, table, summary);
        if (*exhaust) return radheat::cmd_exhaust(cfg, table, summary);
        if (*solve) return radheat::cmd_solve(cfg, table, summary);
    } catch (const radheat::error& e) {
        std::cerr << e.what() << "\n";
        return radheat::exit_violation;
    }
    return radheat::exit_ok;
}
