#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "couplab/config.hpp"

namespace {

int fail(int code, const std::string& kind, const std::string& message) {
    nlohmann::json record;
    record["error"] = kind;
    record["message"] = message;
    record["exit"] = code;
    std::cerr << record.dump() << "\n";
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"couplab: coupling experiments for suprema of empirical, bootstrap and Gaussian processes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string preset_name;
    std::string preset_out;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    auto* run_cmd = app.add_subcommand("run", "execute the experiments declared in a config file");
    run_cmd->add_option("config", config_path, "config file (JSON)")->required();
    auto* seed_opt = run_cmd->add_option("--seed", seed, "override the config seed");
    run_cmd->add_option("--out", out_dir, "output directory (overrides config and COUPLAB_OUT)");
    auto* threads_opt =
        run_cmd->add_option("--threads", threads, "worker threads (0 = machine parallelism)");

    auto* validate_cmd = app.add_subcommand("validate", "parse and check a config file");
    validate_cmd->add_option("config", config_path, "config file (JSON)")->required();

    auto* preset_cmd = app.add_subcommand("preset", "emit a ready-to-run config");
    preset_cmd->add_option("name", preset_name, "remark1 | convex-halfspace | comparison")->required();
    preset_cmd->add_option("-o,--output", preset_out, "write the config to a file instead of stdout");

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate_cmd->parsed()) {
            const auto cfg = couplab::config::parse_file(config_path);
            const auto diag = couplab::config::validate(cfg);
            for (const auto& w : diag.warnings) std::cout << "warning: " << w << "\n";
            for (const auto& e : diag.errors) std::cout << "error: " << e << "\n";
            return diag.ok() ? 0 : 2;
        }
        if (preset_cmd->parsed()) {
            const std::string text = couplab::config::preset(preset_name);
            if (preset_out.empty()) {
                std::cout << text;
            } else {
                std::ofstream out(preset_out, std::ios::binary);
                if (!out) return fail(2, "config", "cannot write " + preset_out);
                out << text;
            }
            return 0;
        }
        // run
        const auto cfg = couplab::config::parse_file(config_path);
        couplab::config::RunOptions opts;
        if (*seed_opt) opts.seed = seed;
        if (*threads_opt) opts.threads = threads;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        const auto result = couplab::config::run(cfg, opts);
        for (const auto& p : result.csv_paths) std::cout << p << "\n";
        std::cout << result.manifest_path << "\n";
        return 0;
    } catch (const couplab::config_error& e) {
        return fail(2, "config", e.what());
    } catch (const couplab::numerical_error& e) {
        return fail(3, "numerical", e.what());
    } catch (const std::exception& e) {
        return fail(3, "internal", e.what());
    }
}
