#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "couplab/coupling_lab.hpp"
#include "couplab/convex_prob.hpp"

namespace couplab::config {

using json = nlohmann::json;

struct Diagnostics {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    bool ok() const { return errors.empty(); }
};

/// Reads and parses the config file; throws config_error when unreadable or
/// not valid JSON.
json parse_file(const std::string& path);

/// Field-level checks plus side-condition flags (warnings, e.g. K_n^3 > n).
Diagnostics validate(const json& cfg);

/// Config with all defaults materialized; serialize(parse(.)) fixed point.
json normalized(const json& cfg);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string canonical_hash(const json& cfg);

/// Ready-to-run configs: "remark1", "convex-halfspace", "comparison".
std::string preset(const std::string& name);

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
};

struct RunResult {
    std::string manifest_path;
    std::vector<std::string> csv_paths;
};

/// Executes the declared experiments, writing one CSV per experiment plus a
/// JSON manifest. Throws config_error (exit 2) or numerical_error (exit 3).
RunResult run(const json& cfg, const RunOptions& opts = {});

/// Shared translation: one experiment entry -> typed ExperimentConfig.
ExperimentConfig experiment_config(const json& cfg, const json& entry, std::uint64_t seed,
                                   unsigned threads);

}  // namespace couplab::config
