// CLI commands: simulate, sweep, cube, emit-figure-data.
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rvr {

struct CliOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out;
    std::size_t workers = 1;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;  // section.key=value
};

// Each returns a process exit status; errors are reported on `err`.
int cmd_simulate(const CliOptions& options, std::ostream& log, std::ostream& err);
int cmd_sweep(const CliOptions& options, std::ostream& log, std::ostream& err);
int cmd_cube(const CliOptions& options, std::ostream& log, std::ostream& err);
int cmd_emit_figure_data(const CliOptions& options, std::ostream& log, std::ostream& err);

int run_cli(int argc, char** argv);

}  // namespace rvr
