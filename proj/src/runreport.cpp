#include "peclab/runreport.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "peclab/errors.hpp"
#include "peclab/rng.hpp"
#include "peclab/textio.hpp"

namespace peclab {

std::string file_digest(const std::string& path) {
    const std::string data = read_text_file(path);
    const std::uint64_t h = fnv1a(data.data(), data.size());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

void append_run_report(const RunReport& report, const std::string& primary_output) {
    namespace fs = std::filesystem;
    fs::path dir = fs::path(primary_output).parent_path();
    if (dir.empty()) dir = ".";
    const fs::path path = dir / "runs.jsonl";

    nlohmann::json inputs = nlohmann::json::array();
    for (const auto& [p, d] : report.input_digests) {
        inputs.push_back({{"path", p}, {"digest", d}});
    }
    const nlohmann::json j = {
        {"command", report.command}, {"config_hash", report.config_hash},
        {"inputs", inputs},          {"outputs", report.outputs},
        {"wall_ms", report.wall_ms}, {"seed", report.seed},
    };
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw IoError("cannot append run report to '" + path.string() + "'");
    out << j.dump() << "\n";
}

}  // namespace peclab
