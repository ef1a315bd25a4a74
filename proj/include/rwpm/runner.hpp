#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rwpm/kernel.hpp"

namespace rwpm
{
inline constexpr const char* kVersion = "0.1.0";

struct Diagnostic
{
    enum class Level
    {
        error,
        note
    };
    Level level = Level::error;
    std::string field;
    std::string message;

    // "error: field: message"
    std::string str() const;
};

// Schema and domain checks only; nothing is computed.
std::vector<Diagnostic> validate_config(const nlohmann::json& cfg);
bool has_errors(const std::vector<Diagnostic>& d);

std::vector<std::string> experiment_names();

// {"type": "srw", "d": 3} or {"type": "stable", "gamma": 0.8,
// "phi": {"family": "log_power", "kappa": 0}, "truncation_radius": 1000000}
JumpKernel kernel_from_json(const nlohmann::json& k);

// Hash of the config without "workers" and "output", which do not change results.
std::string config_hash(const nlohmann::json& cfg);

struct RunOptions
{
    // 0: config "workers", then RWPM_WORKERS, then the hardware count
    int workers = 0;
    // empty: config "output", then "results"
    std::string out_dir;
    bool quiet = false;
};

struct RunResult
{
    // 0 ok, 2 schema violation, 3 numerical failure
    int exit_code = 0;
    std::vector<std::string> files;
    nlohmann::json manifest;
    std::vector<Diagnostic> diagnostics;
    std::string error;
};

/*!
 * Validate, run the named experiment, and write one CSV per results table
 * plus manifest.json into the output directory. A module failure keeps the
 * rows produced so far and marks the manifest as truncated.
 */
RunResult run_experiment(const nlohmann::json& cfg, const RunOptions& opts = {});

}  // namespace rwpm
