#pragma once

#include "maghom/config.hpp"
#include "maghom/error.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace maghom::pipeline {

struct RunOptions {
    std::string out_dir = "out";
    /// Accepted for interface stability; every stage runs sequentially.
    int threads = 1;
    /// Progress lines are mirrored here when non-null.
    std::ostream* progress = nullptr;
};

struct RunSummary {
    std::string config_hash;
    std::vector<std::string> artifacts; // paths relative to out_dir
};

/// Runs the stages of `config.command` and writes its artifacts plus
/// config_echo.json and run.log (the only file carrying wall times).
RunSummary run(const RunConfig& config, const RunOptions& options);

/// 2: configuration or input error, 3: solver failure, 4: I/O error, 1: other.
int exit_code(const std::string& error_name);

/// Machine-readable error record {error, message, exit_code}.
nlohmann::json error_json(const std::string& name, const std::string& message);

} // namespace maghom::pipeline
