#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "lipfield/driver.hpp"
#include "lipfield/io.hpp"

namespace lipfield::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_solver = 3;

/// Relative output directories are placed under $LIPFIELD_OUT when it is set.
std::filesystem::path resolve_output_dir(const std::string& configured);

/// Builds a simulation config from the `run` keys.
SimulationConfig simulation_config(const KeyValueConfig& cfg);
BoundarySpec boundary_spec(const KeyValueConfig& cfg);

/// Per-run bookkeeping written as manifest.json.
class RunManifest {
public:
    RunManifest(std::string command, const KeyValueConfig& cfg);

    void add_file(const std::filesystem::path& relative) { files_.push_back(relative.generic_string()); }
    void add_phase(const std::string& name, double seconds) { phases_.emplace_back(name, seconds); }
    void set_status(std::string status, std::string message = {});
    void write(const std::filesystem::path& dir) const;

private:
    std::string command_;
    std::vector<std::pair<std::string, std::string>> config_;
    std::vector<std::pair<std::string, double>> phases_;
    std::vector<std::string> files_;
    std::string status_ = "running";
    std::string message_;
};

/// Wall-clock seconds since construction or the last lap.
class PhaseTimer {
public:
    double lap();

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

int cmd_run(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_project(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_griffith(const std::filesystem::path& config, std::ostream& out, std::ostream& err);
int cmd_mesh_info(const std::filesystem::path& mesh, std::ostream& out, std::ostream& err);

/// Subcommand dispatch for the `lipfield` executable.
int main(int argc, char** argv);

}  // namespace lipfield::cli
