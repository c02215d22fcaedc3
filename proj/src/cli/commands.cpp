#include "wolbdyn/cli/commands.hpp"

#include "wolbdyn/agestruct.hpp"
#include "wolbdyn/cli/csv.hpp"
#include "wolbdyn/errors.hpp"
#include "wolbdyn/fields.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

namespace wolbdyn::cli {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::size_t kSweepBlock = std::size_t{1} << 18;

std::string generator() { return std::string("wolbdyn ") + kVersion; }

// Writes artifacts into --out DIR, or the primary artifact to stdout.
class Sink {
public:
    Sink(const RunOptions& opts, const ScenarioConfig& cfg, std::ostream& out)
        : dir_(opts.out_dir), cfg_(cfg), out_(out) {
        if (dir_) std::filesystem::create_directories(*dir_);
    }

    bool to_directory() const { return dir_.has_value(); }

    std::filesystem::path path(const std::string& key, const std::string& fallback) const {
        return *dir_ / cfg_.output_name(key, fallback);
    }

    void emit(const std::string& key, const std::string& fallback, const std::string& content,
              bool primary) {
        if (dir_) {
            std::ofstream f(path(key, fallback), std::ios::binary);
            if (!f) throw std::runtime_error("cannot write " + path(key, fallback).string());
            f << content;
        } else if (primary) {
            out_ << content;
        }
    }

private:
    std::optional<std::filesystem::path> dir_;
    const ScenarioConfig& cfg_;
    std::ostream& out_;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json complex_list(const std::vector<std::complex<double>>& values) {
    ordered_json arr = ordered_json::array();
    for (const auto& z : values) arr.push_back({z.real(), z.imag()});
    return arr;
}

ordered_json matrix_json(const num::Matrix& m) {
    ordered_json arr = ordered_json::array();
    for (std::size_t r = 0; r < m.size(); ++r) {
        ordered_json row = ordered_json::array();
        for (std::size_t c = 0; c < m.size(); ++c) row.push_back(m(r, c));
        arr.push_back(row);
    }
    return arr;
}

ordered_json state_json(const std::variant<State2, State4>& p) {
    if (const auto* s = std::get_if<State2>(&p)) return {{"i", s->i}, {"u", s->u}};
    const auto& s = std::get<State4>(p);
    return {{"i_AB", s.i_AB}, {"i_A", s.i_A}, {"i_B", s.i_B}, {"u", s.u}};
}

ordered_json equilibrium_json(const EquilibriumReport& r) {
    return {{"name", r.name},
            {"state", state_json(r.point)},
            {"classification", to_string(r.classification)},
            {"eigenvalues", complex_list(r.eigenvalues)},
            {"jacobian", matrix_json(r.jacobian)}};
}

ordered_json single_params_json(const SingleStrainParams& p) {
    if (p.cost_mode == CostMode::fecundity) return {{"mu", p.mu}, {"tau", p.tau}, {"q", p.q}};
    return {{"xi", p.xi()}, {"eta", p.eta}, {"tau", p.tau}, {"q", p.q}};
}

ordered_json multi_params_json(const MultiStrainParams& p) {
    return {{"tau_A", p.tau_A}, {"tau_B", p.tau_B}, {"eta_A", p.eta_A}, {"eta_B", p.eta_B},
            {"q0A", p.q0A},     {"q0B", p.q0B},     {"q0AB", p.q0AB},   {"qAB", p.qAB},
            {"qAAB", p.qAAB},   {"qBA", p.qBA},     {"qBAB", p.qBAB}};
}

ordered_json verdict_json(const age::StabilityVerdict& v) {
    ordered_json j = {{"verdict", age::to_string(v.verdict)}, {"criterion", v.criterion}};
    j["witness"] = v.witness ? ordered_json(*v.witness) : ordered_json(nullptr);
    return j;
}

ordered_json header_json(const std::string& command, const ScenarioConfig& cfg) {
    return {{"generator", generator()}, {"command", command}, {"model", to_string(cfg.model)}};
}

void require(bool cond, const std::string& ptr, const std::string& message) {
    if (!cond) throw ConfigError(ptr, message);
}

void require_parameters(const ScenarioConfig& cfg) {
    require(cfg.single || cfg.multi || cfg.age, "/parameters", "missing required key");
}

std::string profile_file(const std::string& base, const std::string& tag) {
    const std::filesystem::path p(base);
    return p.stem().string() + "_" + tag + (p.has_extension() ? p.extension().string() : ".csv");
}

std::string profile_csv(const age::SteadyStateProfile& ss, const age::AgeSpec& spec) {
    const age::AgeGrid g(spec);
    CsvWriter w({"age", "i_star", "u_star"});
    for (std::size_t j = 0; j < g.age.size(); ++j) {
        const double row[] = {g.age[j], ss.i_profile[j], ss.u_profile[j]};
        w.row(row);
    }
    return w.str();
}

int cmd_age_analyze(const ScenarioConfig& cfg, Sink& sink) {
    require(cfg.age.has_value(), "/parameters", "missing required key");
    const auto& spec = *cfg.age;
    ordered_json report = header_json("agestruct-analyze", cfg);
    report["grid"] = {{"m", spec.m}, {"N", spec.N}};
    report["trivial"] = verdict_json(age::trivial_stability(spec));
    {
        const auto ss = age::trivial_steady_state(spec);
        report["trivial"]["K0"] = age::evaluate_K(0.0, ss, spec);
    }

    std::vector<std::pair<std::string, age::SteadyStateProfile>> profiles;
    try {
        const auto ss = age::solve_disease_free(spec);
        ordered_json d = {{"status", "exists"}, {"U_star", ss.U_star}, {"u0", ss.u0}};
        d["residual"] = age::steady_state_residuals(ss, spec).max();
        d["K0"] = age::evaluate_K(0.0, ss, spec);
        d["invasion"] = verdict_json(age::disease_free_instability(spec));
        report["disease_free"] = d;
        profiles.emplace_back("disease_free", ss);
    } catch (const NonexistenceError&) {
        report["disease_free"] = "nonexistent";
    } catch (const DivergenceError&) {
        report["disease_free"] = "divergent";
    }

    try {
        const auto states = age::solve_positive_steady_state(spec);
        ordered_json list = ordered_json::array();
        for (std::size_t k = 0; k < states.size(); ++k) {
            const auto& ss = states[k];
            ordered_json s = {{"I_star", ss.I_star}, {"U_star", ss.U_star}, {"c1", ss.c1},
                              {"c2", ss.c2},         {"c3", ss.c3},         {"c4", ss.c4},
                              {"i0", ss.i0},         {"u0", ss.u0}};
            s["residual"] = age::steady_state_residuals(ss, spec).max();
            s["K0"] = age::evaluate_K(0.0, ss, spec);
            s["instability"] = verdict_json(age::instability_check(ss, spec, cfg.age_run.lambda_max));
            if (spec.tau == 1.0 && ss.I_star > 0.0 && ss.U_star > 0.0)
                s["complete_transmission"] = verdict_json(age::complete_transmission_instability(ss, spec));
            list.push_back(s);
            profiles.emplace_back("positive_" + std::to_string(k), ss);
        }
        report["positive"] = list;
    } catch (const NonexistenceError&) {
        report["positive"] = "nonexistent";
    } catch (const DivergenceError&) {
        report["positive"] = "divergent";
    }

    sink.emit("report", "report.json", dump(report), true);
    if (sink.to_directory()) {
        const auto base = cfg.output_name("profiles", "profiles.csv");
        for (const auto& [tag, ss] : profiles)
            sink.emit("__profile", profile_file(base, tag), profile_csv(ss, spec), false);
    }
    return exit_ok;
}

int cmd_analyze(const ScenarioConfig& cfg, Sink& sink) {
    require_parameters(cfg);
    if (cfg.model == ModelKind::age_structured) return cmd_age_analyze(cfg, sink);
    ordered_json report = header_json("analyze", cfg);
    ordered_json eq = ordered_json::array();
    if (cfg.single) {
        const auto& p = *cfg.single;
        report["parameters"] = single_params_json(p);
        if (p.cost_mode == CostMode::mortality) {
            report["region"] = to_string(region_classify(p.xi(), p.tau, p.q));
            for (const auto& r : single_equilibria(p)) eq.push_back(equilibrium_json(r));
        } else {
            for (const auto& r : fecundity_equilibria(p)) eq.push_back(equilibrium_json(r));
        }
    } else {
        const auto& p = *cfg.multi;
        report["parameters"] = multi_params_json(p);
        for (const auto& r : multistrain_equilibria(p, cfg.seeds)) eq.push_back(equilibrium_json(r));
    }
    report["equilibria"] = eq;
    sink.emit("report", "report.json", dump(report), true);
    return exit_ok;
}

std::string trajectory_csv(const ode::Trajectory& traj, bool single, const std::string& flag) {
    std::vector<std::string> cols = single ? std::vector<std::string>{"t", "i", "u"}
                                           : std::vector<std::string>{"t", "i_AB", "i_A", "i_B", "u"};
    CsvWriter w(cols);
    std::vector<double> row;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        row.assign(1, traj.times[k]);
        row.insert(row.end(), traj.states[k].begin(), traj.states[k].end());
        w.row(row);
    }
    w.meta("accepted_steps", std::to_string(traj.accepted_steps));
    w.meta("rejected_steps", std::to_string(traj.rejected_steps));
    w.meta("terminal_flag", flag);
    return w.str();
}

int cmd_age_simulate(const ScenarioConfig& cfg, Sink& sink) {
    require(cfg.age.has_value(), "/parameters", "missing required key");
    require(cfg.initial_i && cfg.initial_u, "/initial_state", "missing required key");
    const auto& spec = *cfg.age;
    const auto i0 = age::sample_profile(spec, *cfg.initial_i);
    const auto u0 = age::sample_profile(spec, *cfg.initial_u);
    const auto series = age::simulate_pde(spec, i0, u0, cfg.age_run.T, cfg.age_run.snapshot_every);

    CsvWriter w({"t", "I", "U"});
    for (std::size_t k = 0; k < series.times.size(); ++k) {
        const double row[] = {series.times[k], series.I[k], series.U[k]};
        w.row(row);
    }
    w.meta("steps", std::to_string(series.times.size() - 1));
    w.meta("terminal_flag", "reached_T");
    sink.emit("series", "series.csv", w.str(), true);

    if (sink.to_directory()) {
        const age::AgeGrid g(spec);
        CsvWriter p({"t", "age", "i", "u"});
        const auto add = [&](double t, const std::vector<double>& i, const std::vector<double>& u) {
            for (std::size_t j = 0; j < g.age.size(); ++j) {
                const double row[] = {t, g.age[j], i[j], u[j]};
                p.row(row);
            }
        };
        if (series.snapshot_times.empty()) {
            add(series.times.back(), series.i_final, series.u_final);
        } else {
            for (std::size_t s = 0; s < series.snapshot_times.size(); ++s)
                add(series.snapshot_times[s], series.i_snapshots[s], series.u_snapshots[s]);
        }
        sink.emit("profiles", "profiles.csv", p.str(), false);
    }
    return exit_ok;
}

int cmd_simulate(const ScenarioConfig& cfg, Sink& sink, std::ostream& err) {
    require_parameters(cfg);
    if (cfg.model == ModelKind::age_structured) return cmd_age_simulate(cfg, sink);
    require(cfg.initial_state.has_value(), "/initial_state", "missing required key");
    const bool single = cfg.single.has_value();
    const ode::Rhs rhs = single ? single_field(*cfg.single) : multistrain_field(*cfg.multi);
    try {
        const auto traj = ode::integrate(rhs, *cfg.initial_state, cfg.integrator);
        const auto flag = ode::to_string(traj.terminal_flag);
        sink.emit("trajectory", "trajectory.csv", trajectory_csv(traj, single, flag), true);
        if (traj.terminal_flag == ode::TerminalFlag::blow_up) {
            err << "integration failure: blow_up\n";
            return exit_integration;
        }
        return exit_ok;
    } catch (const ode::StiffnessFailure& e) {
        sink.emit("trajectory", "trajectory.csv", trajectory_csv(e.partial(), single, "stiffness_failure"),
                  true);
        err << "integration failure: " << e.what() << "\n";
        return exit_integration;
    }
}

void append_sweep_row(std::string& buf, double xi, double tau, double q, const SweepCell& cell) {
    buf += format_double(xi);
    buf += ',';
    buf += format_double(tau);
    buf += ',';
    buf += format_double(q);
    buf += ',';
    buf += to_string(cell.region);
    buf += ',';
    if (cell.coexistence) {
        buf += format_double(cell.coexistence->i);
        buf += ',';
        buf += format_double(cell.coexistence->u);
    } else {
        buf += ',';
    }
    buf += '\n';
}

int cmd_sweep(const ScenarioConfig& cfg, const RunOptions& opts, Sink& sink, std::ostream& out,
              std::ostream& err) {
    require(cfg.model == ModelKind::single, "/model", "sweep needs the 'single' model");
    require(cfg.grid.has_value(), "/run/grid", "missing required key");
    const auto& grid = *cfg.grid;
    if (grid.size() > kMaxGridPoints) {
        err << "resource guard: grid has more than " << kMaxGridPoints << " points\n";
        return exit_resource;
    }

    std::ofstream file;
    std::ostream* dst = &out;
    if (sink.to_directory()) {
        file.open(sink.path("region_map", "region_map.csv"), std::ios::binary);
        if (!file) throw std::runtime_error("cannot write region map");
        dst = &file;
    }
    *dst << version_line() << "xi,tau,q,region,i2,u2\n";
    std::string buf;
    const auto summary = run_sweep(grid, opts.threads, [&](double xi, double tau, double q, const SweepCell& c) {
        append_sweep_row(buf, xi, tau, q, c);
        if (buf.size() > (std::size_t{1} << 22)) {
            *dst << buf;
            buf.clear();
        }
    });
    *dst << buf;

    ordered_json s = header_json("sweep", cfg);
    s["points"] = summary.points;
    s["counts"] = {{"A", summary.count_A}, {"B", summary.count_B}, {"C", summary.count_C}};
    s["min_tau_C"] = summary.min_tau_C ? ordered_json(*summary.min_tau_C) : ordered_json(nullptr);
    sink.emit("summary", "summary.json", dump(s), false);
    return exit_ok;
}

std::string sign_label(double v) { return v > 0.0 ? "1" : (v < 0.0 ? "-1" : "0"); }

int cmd_phasefield(const ScenarioConfig& cfg, Sink& sink) {
    require(is_single(cfg.model), "/model", "phasefield needs a single-strain model");
    require_parameters(cfg);
    require(cfg.window.has_value(), "/run/window", "missing required key");
    const auto& p = *cfg.single;
    const auto& w = *cfg.window;

    CsvWriter csv({"kind", "index", "i", "u", "di", "du", "sign_di", "sign_du"});
    const auto add = [&](const std::string& kind, std::size_t index, double i, double u) {
        const State2 d = (i + u == 0.0) ? State2{0.0, 0.0} : rhs_single_unchecked({i, u}, p);
        csv.row({kind, std::to_string(index), format_double(i), format_double(u), format_double(d.i),
                 format_double(d.u), sign_label(d.i), sign_label(d.u)});
    };
    const int r = w.resolution;
    const auto coord = [r](double lo, double hi, int k) {
        if (r == 1 || k == 0) return lo;
        if (k == r - 1) return hi;
        return lo + (hi - lo) * k / (r - 1);
    };
    std::size_t index = 0;
    for (int ju = 0; ju < r; ++ju) {
        for (int ki = 0; ki < r; ++ki) add("grid", index++, coord(w.i_min, w.i_max, ki), coord(w.u_min, w.u_max, ju));
    }

    const auto eqs = p.cost_mode == CostMode::mortality ? single_equilibria(p) : fecundity_equilibria(p);
    int n_saddle = 0;
    for (const auto& e : eqs) {
        if (e.classification != StabilityClass::saddle) continue;
        const auto line = saddle_separatrix(p, e, w.arc_length);
        const std::string kind = "separatrix_" + std::to_string(n_saddle++);
        for (std::size_t k = 0; k < line.size(); ++k) add(kind, k, line[k].i, line[k].u);
    }
    csv.meta("saddles", std::to_string(n_saddle));
    sink.emit("phasefield", "phasefield.csv", csv.str(), true);
    return exit_ok;
}

}  // namespace

unsigned resolve_threads(std::optional<long long> flag, const char* env_value) {
    if (flag) {
        if (*flag < 1 || *flag > 4096) throw ConfigError("--threads", "must lie in [1, 4096]");
        return static_cast<unsigned>(*flag);
    }
    if (env_value && *env_value) {
        const std::string s(env_value);
        long long v = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size() || v < 1 || v > 4096)
            throw ConfigError("WOLBDYN_THREADS", "must be an integer in [1, 4096]");
        return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

SweepSummary run_sweep(const SweepGrid& grid, unsigned threads, const SweepSink& sink) {
    SweepSummary summary;
    summary.points = grid.size();
    const std::size_t nt = grid.tau.size();
    const std::size_t nq = grid.q.size();
    const std::size_t total = summary.points;
    threads = std::max(1u, threads);

    std::vector<SweepCell> block;
    for (std::size_t start = 0; start < total; start += kSweepBlock) {
        const std::size_t len = std::min(kSweepBlock, total - start);
        block.assign(len, SweepCell{});
        const auto work = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t k = lo; k < hi; ++k) {
                const std::size_t idx = start + k;
                const double xi = grid.xi.value(idx / (nt * nq));
                const double tau = grid.tau.value((idx / nq) % nt);
                const double q = grid.q.value(idx % nq);
                SweepCell& c = block[k];
                c.region = region_classify(xi, tau, q);
                if (c.region == Region::C) c.coexistence = upper_interior_root(xi, tau, q);
            }
        };
        const unsigned used = static_cast<unsigned>(std::min<std::size_t>(threads, len));
        if (used <= 1) {
            work(0, len);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (len + used - 1) / used;
            for (unsigned t = 0; t < used; ++t) {
                const std::size_t lo = t * chunk;
                const std::size_t hi = std::min(len, lo + chunk);
                if (lo < hi) pool.emplace_back(work, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        for (std::size_t k = 0; k < len; ++k) {
            const std::size_t idx = start + k;
            const double xi = grid.xi.value(idx / (nt * nq));
            const double tau = grid.tau.value((idx / nq) % nt);
            const double q = grid.q.value(idx % nq);
            const SweepCell& c = block[k];
            switch (c.region) {
                case Region::A: ++summary.count_A; break;
                case Region::B_only: ++summary.count_B; break;
                case Region::C:
                    ++summary.count_C;
                    if (!summary.min_tau_C || tau < *summary.min_tau_C) summary.min_tau_C = tau;
                    break;
            }
            if (sink) sink(xi, tau, q, c);
        }
    }
    return summary;
}

int run_command(const std::string& command, const RunOptions& opts, std::ostream& out,
                std::ostream& err) {
    try {
        const ScenarioConfig cfg = load_config(opts.config);
        Sink sink(opts, cfg, out);
        if (command == "analyze") return cmd_analyze(cfg, sink);
        if (command == "simulate") return cmd_simulate(cfg, sink, err);
        if (command == "sweep") return cmd_sweep(cfg, opts, sink, out, err);
        if (command == "phasefield") return cmd_phasefield(cfg, sink);
        if (command == "agestruct-analyze" || command == "agestruct-simulate") {
            require(cfg.model == ModelKind::age_structured, "/model",
                    command + " needs the 'age_structured' model");
            return command == "agestruct-analyze" ? cmd_age_analyze(cfg, sink) : cmd_age_simulate(cfg, sink);
        }
        err << "unknown command '" << command << "'\n";
        return exit_config;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const DomainError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_failure;
    }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Wolbachia infection dynamics: equilibria, simulation and sweeps", "wolbdyn"};
    std::string command;
    std::string config;
    std::string out_dir;
    std::optional<long long> threads;
    long long seed = 0;
    app.add_option("command", command, "analyze | simulate | sweep | phasefield | agestruct-analyze | agestruct-simulate")
        ->required()
        ->check(CLI::IsMember({"analyze", "simulate", "sweep", "phasefield", "agestruct-analyze",
                               "agestruct-simulate"}));
    app.add_option("--config", config, "scenario JSON file")->required();
    app.add_option("--out", out_dir, "output directory (default: primary artifact to stdout)");
    app.add_option("--threads", threads, "worker threads (default: WOLBDYN_THREADS or all cores)");
    app.add_option("--seed", seed, "accepted for interface stability; runs are deterministic");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return exit_config;
    }
    RunOptions opts;
    opts.config = config;
    if (!out_dir.empty()) opts.out_dir = out_dir;
    try {
        opts.threads = resolve_threads(threads, std::getenv("WOLBDYN_THREADS"));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return exit_config;
    }
    return run_command(command, opts, out, err);
}

}  // namespace wolbdyn::cli
