#pragma once

// Scenario configuration: JSON document with the top-level keys "model",
// "parameters", "initial_state", "run" and "outputs". The full schema is
// documented in README.md. Parsing rejects unknown keys, wrong types and
// out-of-range values with a JSON-pointer diagnostic.

#include "wolbdyn/agestruct.hpp"
#include "wolbdyn/models.hpp"
#include "wolbdyn/odeint.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wolbdyn::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer.empty() ? message : pointer + ": " + message),
          pointer_(std::move(pointer)) {}

    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

enum class ModelKind {
    single,
    single_fecundity,
    multistrain,
    multistrain_simplified,
    mutually_incompatible,
    age_structured,
};

std::string to_string(ModelKind kind);
bool is_single(ModelKind kind);
bool is_multistrain(ModelKind kind);

// Either an explicit value list or `points` evenly spaced values from min
// to max inclusive. Values are generated on demand so that oversized grids
// can be rejected without allocating them.
struct GridAxis {
    double min = 0.0;
    double max = 0.0;
    std::size_t points = 1;
    std::vector<double> list;

    std::size_t size() const { return list.empty() ? points : list.size(); }
    double value(std::size_t k) const;
};

struct SweepGrid {
    GridAxis xi;
    GridAxis tau;
    GridAxis q;

    // Product of the axis lengths, saturating instead of overflowing.
    std::size_t size() const;
};

struct PhaseWindow {
    double i_min = 0.0;
    double i_max = 1.0;
    double u_min = 0.0;
    double u_max = 1.0;
    int resolution = 40;
    double arc_length = 2.0;
};

struct AgeRun {
    double T = 5.0;
    int snapshot_every = 0;
    double lambda_max = 10.0;
};

struct ScenarioConfig {
    ModelKind model = ModelKind::single;
    std::optional<SingleStrainParams> single;
    std::optional<MultiStrainParams> multi;
    std::optional<age::AgeSpec> age;

    std::optional<std::vector<double>> initial_state;  // ODE models
    std::optional<age::RateFunction> initial_i;        // age model profiles
    std::optional<age::RateFunction> initial_u;

    ode::IntegratorConfig integrator;
    AgeRun age_run;
    std::optional<SweepGrid> grid;
    std::optional<PhaseWindow> window;
    std::vector<State4> seeds;

    std::map<std::string, std::string> outputs;  // artifact key -> file name

    std::string output_name(const std::string& key, const std::string& fallback) const;
};

// Throws ConfigError. Syntax errors report line and column.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config(const std::filesystem::path& path);

}  // namespace wolbdyn::cli
