#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "optsale/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerifyFailed = 4;

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::string format;
    std::string seed;
    std::string paths;
    std::string override_threshold;

    std::vector<std::pair<std::string, std::string>> overrides() const {
        std::vector<std::pair<std::string, std::string>> kv;
        for (const auto& s : sets) {
            const auto eq = s.find('=');
            if (eq == std::string::npos)
                throw optsale::validation_error("--set expects key=value (got '" + s + "')");
            kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
        }
        if (!out.empty()) kv.emplace_back("output.path", out);
        if (!format.empty()) kv.emplace_back("output.format", format);
        if (!seed.empty()) kv.emplace_back("mc.seed", seed);
        if (!paths.empty()) kv.emplace_back("mc.paths", paths);
        if (!override_threshold.empty())
            kv.emplace_back("verify.override_threshold", override_threshold);
        return kv;
    }
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "problem/config file (key = value lines)")
        ->required();
    cmd->add_option("--set", args.sets, "override a config key, e.g. --set model.mu=0.03");
    cmd->add_option("--out", args.out, "output file path");
    cmd->add_option("--format", args.format, "output format: csv or json");
    cmd->add_option("--seed", args.seed, "Monte-Carlo seed (mc.seed)");
    cmd->add_option("--paths", args.paths, "Monte-Carlo path count (mc.paths)");
    cmd->add_option("--override-threshold", args.override_threshold,
                    "verify with a perturbed sale threshold");
}

int cmd_solve(const CommonArgs& args) {
    const optsale::RunConfig cfg = optsale::load_run_config(args.config_path, args.overrides());
    const nlohmann::json summary = optsale::run_solve(cfg);
    std::cout << summary.dump(2) << "\n";
    if (!cfg.output_path.empty())
        optsale::write_text_file(cfg.output_path, summary.dump(2) + "\n");
    return kExitOk;
}

int cmd_curve(const CommonArgs& args) {
    const optsale::RunConfig cfg = optsale::load_run_config(args.config_path, args.overrides());
    const optsale::CurveTable table = optsale::run_curve(cfg);
    const std::string text = cfg.output_format == "json" ? table.to_json().dump(2) + "\n"
                                                         : table.to_csv();
    if (cfg.output_path.empty())
        std::cout << text;
    else
        optsale::write_text_file(cfg.output_path, text);
    return kExitOk;
}

int cmd_verify(const CommonArgs& args) {
    const optsale::RunConfig cfg = optsale::load_run_config(args.config_path, args.overrides());
    const optsale::VerifyOutcome outcome = optsale::run_verify(cfg);
    for (const auto& check : outcome.report.at("checks"))
        std::cout << (check.at("pass").get<bool>() ? "PASS " : "FAIL ")
                  << check.at("name").get<std::string>() << "\n";
    std::cout << (outcome.passed ? "verification passed" : "verification FAILED") << "\n";
    if (!cfg.output_path.empty())
        optsale::write_text_file(cfg.output_path, outcome.report.dump(2) + "\n");
    return outcome.passed ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"optimal risk-averse asset-sale timing: thresholds, value functions, "
                 "certainty equivalents, and Monte-Carlo verification"};
    app.require_subcommand(1);

    CommonArgs solve_args, curve_args, verify_args;
    CLI::App* solve_cmd = app.add_subcommand("solve", "solve for the optimal strategy");
    add_common(solve_cmd, solve_args);
    CLI::App* curve_cmd = app.add_subcommand("curve", "emit value/CE curve data");
    add_common(curve_cmd, curve_args);
    CLI::App* verify_cmd = app.add_subcommand("verify", "run verification checks");
    add_common(verify_cmd, verify_args);

    try {
        app.parse(argc, argv);
        if (solve_cmd->parsed()) return cmd_solve(solve_args);
        if (curve_cmd->parsed()) return cmd_curve(curve_args);
        return cmd_verify(verify_args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    } catch (const optsale::validation_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const optsale::usage_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const optsale::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
}
