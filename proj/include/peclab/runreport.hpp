#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace peclab {

/// One record per CLI run, appended as a JSON line to runs.jsonl next to the
/// command's primary output.
struct RunReport {
    std::string command;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> input_digests;  // (path, fnv64 hex)
    std::vector<std::string> outputs;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
};

std::string file_digest(const std::string& path);

/// Appends the report to <directory of primary_output>/runs.jsonl.
void append_run_report(const RunReport& report, const std::string& primary_output);

}  // namespace peclab
