#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybridsim {

// Exit codes shared by every command:
//   0 success, 1 unexpected/resource failure, 2 config error,
//   3 intensity bound violation, 4 solver blow-up, 5 output I/O failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitBound = 3;
inline constexpr int kExitBlowup = 4;
inline constexpr int kExitIo = 5;

struct SimulateOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::optional<std::uint64_t> level_n;
    std::optional<std::string> output_dir;
    std::optional<unsigned> jobs;
};

/// Runs one path from a config file; writes path.csv, audit.csv and the run
/// manifest. Errors are reported as a machine-readable JSON line on stderr.
int cmd_simulate(const std::string& config_path, const SimulateOverrides& overrides = {});

/// Runs one shipped scenario (horizon/level 0 = scenario defaults).
int cmd_scenario(const std::string& name, std::uint64_t seed, double horizon,
                 std::uint64_t level_n, const std::string& output_dir);

struct ConvergeOptions {
    std::vector<std::uint64_t> levels;
    std::uint64_t n_fine = 4096;
    std::size_t paths = 200;
    std::uint64_t seed = 1;
    std::optional<std::string> output_dir;
    std::optional<unsigned> jobs;
};

/// Runs the coupled-level convergence study on the config's model; writes
/// report.csv, summary.txt and the manifest. Needs at least three levels.
int cmd_converge(const std::string& config_path, const ConvergeOptions& options);

} // namespace hybridsim
