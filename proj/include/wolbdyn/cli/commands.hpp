#pragma once

// Subcommand dispatch for the wolbdyn executable.

#include "wolbdyn/cli/config.hpp"
#include "wolbdyn/equilibria.hpp"

#include <cstddef>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace wolbdyn::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_integration = 3,
    exit_resource = 4,
};

inline constexpr std::size_t kMaxGridPoints = 10'000'000;

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;
    unsigned threads = 1;
};

// --threads wins, then WOLBDYN_THREADS, then the hardware concurrency.
// Throws ConfigError for a non-positive or unparsable value.
unsigned resolve_threads(std::optional<long long> flag, const char* env_value);

struct SweepCell {
    Region region = Region::A;
    std::optional<State2> coexistence;  // set in region C
};

struct SweepSummary {
    std::size_t points = 0;
    std::size_t count_A = 0;
    std::size_t count_B = 0;
    std::size_t count_C = 0;
    std::optional<double> min_tau_C;
};

using SweepSink = std::function<void(double xi, double tau, double q, const SweepCell& cell)>;

// Classifies every grid point. The sink sees the points in lexicographic
// (xi, tau, q) order regardless of the thread count.
SweepSummary run_sweep(const SweepGrid& grid, unsigned threads, const SweepSink& sink = {});

int run_command(const std::string& command, const RunOptions& opts, std::ostream& out,
                std::ostream& err);

// Full command line handling; returns the process exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace wolbdyn::cli
