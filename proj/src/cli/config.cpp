#include "wolbdyn/cli/config.hpp"

#include "wolbdyn/errors.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace wolbdyn::cli {

using nlohmann::json;

namespace {

std::string join(const std::string& ptr, const std::string& key) { return ptr + "/" + key; }

void check_keys(const json& obj, const std::string& ptr, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(ptr.empty() ? "/" : ptr, "expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) throw ConfigError(join(ptr, key), "unknown key");
    }
}

void require_keys(const json& obj, const std::string& ptr, const std::set<std::string>& required) {
    for (const auto& key : required) {
        if (!obj.contains(key)) throw ConfigError(join(ptr, key), "missing required key");
    }
}

double number(const json& obj, const std::string& ptr, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(join(ptr, key), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(join(ptr, key), "expected a finite number");
    return d;
}

double number_or(const json& obj, const std::string& ptr, const std::string& key, double fallback) {
    return obj.contains(key) ? number(obj, ptr, key) : fallback;
}

long long integer(const json& obj, const std::string& ptr, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number_integer()) throw ConfigError(join(ptr, key), "expected an integer");
    return v.get<long long>();
}

void in_range(double v, double lo, double hi, const std::string& ptr) {
    if (!(v >= lo && v <= hi)) {
        std::ostringstream msg;
        msg << "value " << v << " outside [" << lo << ", " << hi << "]";
        throw ConfigError(ptr, msg.str());
    }
}

ModelKind parse_model(const json& root) {
    if (!root.contains("model")) throw ConfigError("/model", "missing required key");
    const json& m = root.at("model");
    if (!m.is_string()) throw ConfigError("/model", "expected a string");
    const auto name = m.get<std::string>();
    for (ModelKind k : {ModelKind::single, ModelKind::single_fecundity, ModelKind::multistrain,
                        ModelKind::multistrain_simplified, ModelKind::mutually_incompatible,
                        ModelKind::age_structured}) {
        if (to_string(k) == name) return k;
    }
    throw ConfigError("/model", "unknown model '" + name + "'");
}

age::RateFunction parse_rate(const json& v, const std::string& ptr) {
    if (v.is_number()) {
        const double c = v.get<double>();
        if (!(c >= 0.0) || !std::isfinite(c)) throw ConfigError(ptr, "rate must be finite and >= 0");
        return age::RateFunction::constant(c);
    }
    check_keys(v, ptr, {"knots", "values"});
    require_keys(v, ptr, {"knots", "values"});
    std::vector<double> knots;
    std::vector<double> values;
    for (const auto* field : {"knots", "values"}) {
        const json& arr = v.at(field);
        const auto fptr = join(ptr, field);
        if (!arr.is_array() || arr.empty()) throw ConfigError(fptr, "expected a non-empty array");
        auto& dst = std::string(field) == "knots" ? knots : values;
        for (std::size_t k = 0; k < arr.size(); ++k) {
            if (!arr[k].is_number()) throw ConfigError(fptr + "/" + std::to_string(k), "expected a number");
            dst.push_back(arr[k].get<double>());
        }
    }
    try {
        return age::RateFunction(std::move(knots), std::move(values));
    } catch (const DomainError& e) {
        throw ConfigError(ptr, e.what());
    }
}

void parse_parameters_unchecked(const json& p, ScenarioConfig& cfg) {
    const std::string ptr = "/parameters";
    switch (cfg.model) {
        case ModelKind::single: {
            check_keys(p, ptr, {"xi", "eta", "tau", "q"});
            require_keys(p, ptr, {"tau", "q"});
            if (p.contains("xi") == p.contains("eta"))
                throw ConfigError(ptr, "give exactly one of 'xi' and 'eta'");
            SingleStrainParams s;
            s.tau = number(p, ptr, "tau");
            s.q = number(p, ptr, "q");
            if (p.contains("xi")) {
                const double xi = number(p, ptr, "xi");
                in_range(xi, std::numeric_limits<double>::min(), 1.0, join(ptr, "xi"));
                s.eta = 1.0 / xi;
            } else {
                s.eta = number(p, ptr, "eta");
            }
            cfg.single = s;
            break;
        }
        case ModelKind::single_fecundity: {
            check_keys(p, ptr, {"mu", "tau", "q"});
            require_keys(p, ptr, {"mu", "tau", "q"});
            cfg.single = SingleStrainParams::fecundity(number(p, ptr, "mu"), number(p, ptr, "tau"),
                                                       number(p, ptr, "q"));
            break;
        }
        case ModelKind::multistrain: {
            const std::set<std::string> base{"tau_A", "tau_B", "eta_A", "eta_B", "q0A", "q0B"};
            std::string preset = "general";
            if (p.is_object() && p.contains("preset")) {
                if (!p.at("preset").is_string()) throw ConfigError(join(ptr, "preset"), "expected a string");
                preset = p.at("preset").get<std::string>();
            }
            if (preset == "double_infection") {
                auto allowed = base;
                allowed.insert("preset");
                check_keys(p, ptr, allowed);
                require_keys(p, ptr, base);
                cfg.multi = double_infection(number(p, ptr, "tau_A"), number(p, ptr, "tau_B"),
                                             number(p, ptr, "eta_A"), number(p, ptr, "eta_B"),
                                             number(p, ptr, "q0A"), number(p, ptr, "q0B"));
            } else if (preset == "general") {
                auto required = base;
                required.insert({"q0AB", "qAB", "qAAB", "qBA", "qBAB"});
                auto allowed = required;
                allowed.insert("preset");
                check_keys(p, ptr, allowed);
                require_keys(p, ptr, required);
                MultiStrainParams m;
                m.tau_A = number(p, ptr, "tau_A");
                m.tau_B = number(p, ptr, "tau_B");
                m.eta_A = number(p, ptr, "eta_A");
                m.eta_B = number(p, ptr, "eta_B");
                m.q0A = number(p, ptr, "q0A");
                m.q0B = number(p, ptr, "q0B");
                m.q0AB = number(p, ptr, "q0AB");
                m.qAB = number(p, ptr, "qAB");
                m.qAAB = number(p, ptr, "qAAB");
                m.qBA = number(p, ptr, "qBA");
                m.qBAB = number(p, ptr, "qBAB");
                cfg.multi = m;
            } else {
                throw ConfigError(join(ptr, "preset"), "unknown preset '" + preset + "'");
            }
            break;
        }
        case ModelKind::multistrain_simplified: {
            check_keys(p, ptr, {"tau", "eta", "q0A", "q0B"});
            require_keys(p, ptr, {"tau", "eta", "q0A", "q0B"});
            cfg.multi = simplified_compatible(number(p, ptr, "tau"), number(p, ptr, "eta"),
                                              number(p, ptr, "q0A"), number(p, ptr, "q0B"));
            break;
        }
        case ModelKind::mutually_incompatible: {
            check_keys(p, ptr, {"tau", "eta", "q0", "qAB", "qBA"});
            require_keys(p, ptr, {"tau", "eta", "q0", "qAB", "qBA"});
            cfg.multi = mutually_incompatible(number(p, ptr, "tau"), number(p, ptr, "eta"),
                                              number(p, ptr, "q0"), number(p, ptr, "qAB"),
                                              number(p, ptr, "qBA"));
            break;
        }
        case ModelKind::age_structured: {
            const std::set<std::string> keys{"m", "N", "tau", "q", "beta1", "beta2", "eta1", "eta2"};
            check_keys(p, ptr, keys);
            require_keys(p, ptr, keys);
            age::AgeSpec a;
            a.m = number(p, ptr, "m");
            const long long N = integer(p, ptr, "N");
            if (N < 1 || N > 10'000'000) throw ConfigError(join(ptr, "N"), "N must lie in [1, 1e7]");
            a.N = static_cast<int>(N);
            a.tau = number(p, ptr, "tau");
            a.q = number(p, ptr, "q");
            a.beta1 = parse_rate(p.at("beta1"), join(ptr, "beta1"));
            a.beta2 = parse_rate(p.at("beta2"), join(ptr, "beta2"));
            a.eta1 = parse_rate(p.at("eta1"), join(ptr, "eta1"));
            a.eta2 = parse_rate(p.at("eta2"), join(ptr, "eta2"));
            cfg.age = a;
            break;
        }
    }
}

void parse_parameters(const json& p, ScenarioConfig& cfg) {
    try {
        parse_parameters_unchecked(p, cfg);
        if (cfg.single) cfg.single->validate();
        if (cfg.multi) cfg.multi->validate();
        if (cfg.age) cfg.age->validate();
    } catch (const DomainError& e) {
        throw ConfigError("/parameters", e.what());
    }
}

void parse_initial_state(const json& s, ScenarioConfig& cfg) {
    const std::string ptr = "/initial_state";
    if (cfg.model == ModelKind::age_structured) {
        check_keys(s, ptr, {"i", "u"});
        require_keys(s, ptr, {"i", "u"});
        cfg.initial_i = parse_rate(s.at("i"), join(ptr, "i"));
        cfg.initial_u = parse_rate(s.at("u"), join(ptr, "u"));
        return;
    }
    std::vector<std::string> names;
    if (is_single(cfg.model)) {
        names = {"i", "u"};
    } else {
        names = {"i_AB", "i_A", "i_B", "u"};
    }
    check_keys(s, ptr, std::set<std::string>(names.begin(), names.end()));
    require_keys(s, ptr, std::set<std::string>(names.begin(), names.end()));
    std::vector<double> y;
    for (const auto& n : names) {
        const double v = number(s, ptr, n);
        if (v < 0.0) throw ConfigError(join(ptr, n), "state components must be >= 0");
        y.push_back(v);
    }
    cfg.initial_state = y;
}

GridAxis parse_axis(const json& a, const std::string& ptr, double lo, double hi, bool open_lo) {
    GridAxis axis;
    const auto check = [&](double v, const std::string& vptr) {
        if (!(v >= lo && v <= hi) || (open_lo && v <= lo)) {
            std::ostringstream msg;
            msg << "value " << v << " outside " << (open_lo ? "(" : "[") << lo << ", " << hi << "]";
            throw ConfigError(vptr, msg.str());
        }
    };
    if (a.is_object() && a.contains("values")) {
        check_keys(a, ptr, {"values"});
        const json& arr = a.at("values");
        if (!arr.is_array() || arr.empty()) throw ConfigError(join(ptr, "values"), "expected a non-empty array");
        for (std::size_t k = 0; k < arr.size(); ++k) {
            const auto vptr = join(ptr, "values") + "/" + std::to_string(k);
            if (!arr[k].is_number()) throw ConfigError(vptr, "expected a number");
            const double v = arr[k].get<double>();
            check(v, vptr);
            axis.list.push_back(v);
        }
        return axis;
    }
    check_keys(a, ptr, {"min", "max", "points"});
    require_keys(a, ptr, {"min", "max", "points"});
    axis.min = number(a, ptr, "min");
    axis.max = number(a, ptr, "max");
    check(axis.min, join(ptr, "min"));
    check(axis.max, join(ptr, "max"));
    if (axis.max < axis.min) throw ConfigError(join(ptr, "max"), "max must be >= min");
    const long long points = integer(a, ptr, "points");
    if (points < 1) throw ConfigError(join(ptr, "points"), "points must be >= 1");
    axis.points = static_cast<std::size_t>(points);
    return axis;
}

void parse_run(const json& r, ScenarioConfig& cfg) {
    const std::string ptr = "/run";
    check_keys(r, ptr,
               {"T", "rel_tol", "abs_tol", "max_step", "conv_tol", "initial_step", "min_step",
                "max_steps", "snapshot_every", "lambda_max", "grid", "window", "seeds"});
    auto& ic = cfg.integrator;
    ic.rel_tol = number_or(r, ptr, "rel_tol", ic.rel_tol);
    ic.abs_tol = number_or(r, ptr, "abs_tol", ic.abs_tol);
    ic.max_step = number_or(r, ptr, "max_step", ic.max_step);
    ic.conv_tol = number_or(r, ptr, "conv_tol", ic.conv_tol);
    ic.initial_step = number_or(r, ptr, "initial_step", ic.initial_step);
    ic.min_step = number_or(r, ptr, "min_step", ic.min_step);
    if (r.contains("max_steps")) {
        const long long ms = integer(r, ptr, "max_steps");
        if (ms < 1) throw ConfigError(join(ptr, "max_steps"), "must be >= 1");
        ic.max_steps = static_cast<std::size_t>(ms);
    }
    if (cfg.model == ModelKind::age_structured) {
        cfg.age_run.T = number_or(r, ptr, "T", cfg.age_run.T);
        if (cfg.age_run.T < 0.0) throw ConfigError(join(ptr, "T"), "T must be >= 0");
    } else {
        ic.T = number_or(r, ptr, "T", ic.T);
    }
    if (r.contains("snapshot_every")) {
        const long long se = integer(r, ptr, "snapshot_every");
        if (se < 0 || se > std::numeric_limits<int>::max())
            throw ConfigError(join(ptr, "snapshot_every"), "must be >= 0");
        cfg.age_run.snapshot_every = static_cast<int>(se);
    }
    cfg.age_run.lambda_max = number_or(r, ptr, "lambda_max", cfg.age_run.lambda_max);
    if (!(cfg.age_run.lambda_max > 0.0)) throw ConfigError(join(ptr, "lambda_max"), "must be > 0");
    try {
        ic.validate();
    } catch (const DomainError& e) {
        throw ConfigError(ptr, e.what());
    }

    if (r.contains("grid")) {
        const json& g = r.at("grid");
        const auto gptr = join(ptr, "grid");
        check_keys(g, gptr, {"xi", "tau", "q"});
        require_keys(g, gptr, {"xi", "tau", "q"});
        SweepGrid grid;
        grid.xi = parse_axis(g.at("xi"), join(gptr, "xi"), 0.0, 1.0, true);
        grid.tau = parse_axis(g.at("tau"), join(gptr, "tau"), 0.0, 1.0, false);
        grid.q = parse_axis(g.at("q"), join(gptr, "q"), 0.0, 1.0, false);
        cfg.grid = grid;
    }
    if (r.contains("window")) {
        const json& w = r.at("window");
        const auto wptr = join(ptr, "window");
        check_keys(w, wptr, {"i_min", "i_max", "u_min", "u_max", "resolution", "arc_length"});
        PhaseWindow win;
        win.i_min = number_or(w, wptr, "i_min", win.i_min);
        win.i_max = number_or(w, wptr, "i_max", win.i_max);
        win.u_min = number_or(w, wptr, "u_min", win.u_min);
        win.u_max = number_or(w, wptr, "u_max", win.u_max);
        win.arc_length = number_or(w, wptr, "arc_length", win.arc_length);
        if (w.contains("resolution")) {
            const long long res = integer(w, wptr, "resolution");
            if (res < 1 || res > 100'000) throw ConfigError(join(wptr, "resolution"), "must lie in [1, 100000]");
            win.resolution = static_cast<int>(res);
        }
        if (win.i_min < 0.0 || win.u_min < 0.0)
            throw ConfigError(wptr, "window must lie in the non-negative quadrant");
        if (win.i_max < win.i_min || win.u_max < win.u_min)
            throw ConfigError(wptr, "window maxima must be >= minima");
        if (!(win.arc_length > 0.0)) throw ConfigError(join(wptr, "arc_length"), "must be > 0");
        cfg.window = win;
    }
    if (r.contains("seeds")) {
        const json& s = r.at("seeds");
        const auto sptr = join(ptr, "seeds");
        if (!s.is_array()) throw ConfigError(sptr, "expected an array of [i_AB, i_A, i_B, u]");
        for (std::size_t k = 0; k < s.size(); ++k) {
            const auto eptr = sptr + "/" + std::to_string(k);
            if (!s[k].is_array() || s[k].size() != 4) throw ConfigError(eptr, "expected 4 numbers");
            double v[4];
            for (std::size_t c = 0; c < 4; ++c) {
                if (!s[k][c].is_number()) throw ConfigError(eptr + "/" + std::to_string(c), "expected a number");
                v[c] = s[k][c].get<double>();
            }
            cfg.seeds.push_back(State4{v[0], v[1], v[2], v[3]});
        }
    }
}

void parse_outputs(const json& o, ScenarioConfig& cfg) {
    const std::string ptr = "/outputs";
    check_keys(o, ptr, {"report", "trajectory", "region_map", "summary", "phasefield", "series", "profiles"});
    for (const auto& [key, value] : o.items()) {
        if (!value.is_string()) throw ConfigError(join(ptr, key), "expected a file name");
        const auto name = value.get<std::string>();
        const std::filesystem::path p(name);
        if (name.empty() || p.is_absolute() || p.filename() != p)
            throw ConfigError(join(ptr, key), "expected a plain relative file name");
        cfg.outputs[key] = name;
    }
}

}  // namespace

double GridAxis::value(std::size_t k) const {
    if (!list.empty()) return list.at(k);
    if (points == 1 || k == 0) return min;
    if (k + 1 == points) return max;
    return min + (max - min) * static_cast<double>(k) / static_cast<double>(points - 1);
}

std::size_t SweepGrid::size() const {
    const std::size_t cap = std::numeric_limits<std::size_t>::max();
    std::size_t n = 1;
    for (std::size_t s : {xi.size(), tau.size(), q.size()}) {
        if (s != 0 && n > cap / s) return cap;
        n *= s;
    }
    return n;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::single: return "single";
        case ModelKind::single_fecundity: return "single_fecundity";
        case ModelKind::multistrain: return "multistrain";
        case ModelKind::multistrain_simplified: return "multistrain_simplified";
        case ModelKind::mutually_incompatible: return "mutually_incompatible";
        case ModelKind::age_structured: return "age_structured";
    }
    return "unknown";
}

bool is_single(ModelKind kind) {
    return kind == ModelKind::single || kind == ModelKind::single_fecundity;
}

bool is_multistrain(ModelKind kind) {
    return kind == ModelKind::multistrain || kind == ModelKind::multistrain_simplified ||
           kind == ModelKind::mutually_incompatible;
}

std::string ScenarioConfig::output_name(const std::string& key, const std::string& fallback) const {
    const auto it = outputs.find(key);
    return it == outputs.end() ? fallback : it->second;
}

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t stop = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t k = 0; k < stop; ++k) {
            if (text[k] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("", "syntax error at line " + std::to_string(line) + ", column " +
                                  std::to_string(col) + ": " + e.what());
    }
    check_keys(root, "", {"model", "description", "parameters", "initial_state", "run", "outputs"});
    if (root.contains("description") && !root.at("description").is_string())
        throw ConfigError("/description", "expected a string");

    ScenarioConfig cfg;
    cfg.model = parse_model(root);
    if (root.contains("parameters")) parse_parameters(root.at("parameters"), cfg);
    if (root.contains("initial_state")) parse_initial_state(root.at("initial_state"), cfg);
    if (root.contains("run")) parse_run(root.at("run"), cfg);
    if (root.contains("outputs")) parse_outputs(root.at("outputs"), cfg);
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("", "cannot read config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace wolbdyn::cli
