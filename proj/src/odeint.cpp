#include "wolbdyn/odeint.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wolbdyn::ode {

namespace {

// Fehlberg 4(5) tableau.
constexpr std::array<double, 6> kC{0.0, 1.0 / 4.0, 3.0 / 8.0, 12.0 / 13.0, 1.0, 1.0 / 2.0};
constexpr double kA[6][5] = {
    {0, 0, 0, 0, 0},
    {1.0 / 4.0, 0, 0, 0, 0},
    {3.0 / 32.0, 9.0 / 32.0, 0, 0, 0},
    {1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0, 0, 0},
    {439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0, 0},
    {-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0},
};
constexpr std::array<double, 6> kB4{25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0,
                                    0.0};
constexpr std::array<double, 6> kB5{16.0 / 135.0,     0.0,         6656.0 / 12825.0,
                                    28561.0 / 56430.0, -9.0 / 50.0, 2.0 / 55.0};

constexpr double kSafety = 0.9;
constexpr double kAlpha = 0.7 / 5.0;
constexpr double kBeta = 0.4 / 5.0;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;
constexpr double kBlowUp = 1e100;

struct StepWork {
    explicit StepWork(std::size_t n) : k(6, std::vector<double>(n)), stage(n), y4(n), err(n) {}
    std::vector<std::vector<double>> k;
    std::vector<double> stage;
    std::vector<double> y4;
    std::vector<double> err;
};

// k[0] must already hold f(y). Fills y4 and the embedded error vector.
void fehlberg_step(const Rhs& rhs, std::span<const double> y, double h, StepWork& w) {
    const std::size_t n = y.size();
    for (std::size_t s = 1; s < 6; ++s) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < s; ++j) acc += kA[s][j] * w.k[j][i];
            w.stage[i] = y[i] + h * acc;
        }
        rhs(w.stage, w.k[s]);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double s4 = 0.0;
        double s5 = 0.0;
        for (std::size_t j = 0; j < 6; ++j) {
            s4 += kB4[j] * w.k[j][i];
            s5 += kB5[j] * w.k[j][i];
        }
        w.y4[i] = y[i] + h * s4;
        w.err[i] = h * (s5 - s4);
    }
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

std::string to_string(TerminalFlag flag) {
    switch (flag) {
        case TerminalFlag::reached_T: return "reached_T";
        case TerminalFlag::converged: return "converged";
        case TerminalFlag::blow_up: return "blow_up";
    }
    return "unknown";
}

void IntegratorConfig::validate() const {
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw DomainError("integrator tolerances must be > 0");
    if (!(max_step > 0.0)) throw DomainError("max_step must be > 0");
    if (!(conv_tol >= 0.0)) throw DomainError("conv_tol must be >= 0");
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be finite and >= 0");
    if (!(initial_step > 0.0) || !(min_step > 0.0)) throw DomainError("step bounds must be > 0");
}

double max_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Trajectory integrate(const Rhs& rhs, std::vector<double> y0, const IntegratorConfig& cfg) {
    return integrate(rhs, std::move(y0), cfg, StopObserver{});
}

Trajectory integrate(const Rhs& rhs, std::vector<double> y0, const IntegratorConfig& cfg,
                     const StopObserver& stop) {
    cfg.validate();
    for (double v : y0)
        if (!(v >= 0.0)) throw DomainError("integrate: initial state must be non-negative");

    const std::size_t n = y0.size();
    Trajectory traj;
    traj.times.push_back(0.0);
    traj.states.push_back(y0);

    StepWork w(n);
    std::vector<double> y = std::move(y0);
    rhs(y, w.k[0]);

    double t = 0.0;
    double h = std::min(cfg.initial_step, cfg.max_step);
    double err_prev = 1.0;
    bool nonfinite_trial = false;

    while (t < cfg.T) {
        if (traj.accepted_steps + traj.rejected_steps >= cfg.max_steps)
            throw StiffnessFailure("integrate: step budget exhausted", std::move(traj));
        const bool last = t + h >= cfg.T;
        const double step = last ? cfg.T - t : h;

        fehlberg_step(rhs, y, step, w);

        double err = 0.0;
        bool finite = all_finite(w.y4) && all_finite(w.err);
        if (finite) {
            for (std::size_t i = 0; i < n; ++i) {
                const double scale =
                    cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y[i]), std::abs(w.y4[i]));
                err = std::max(err, std::abs(w.err[i]) / scale);
            }
            for (std::size_t i = 0; i < n; ++i)
                if (w.y4[i] < -cfg.clip_tol) err = std::max(err, 2.0);
        }

        if (!finite || err > 1.0) {
            ++traj.rejected_steps;
            nonfinite_trial = !finite;
            const double factor =
                finite ? std::max(kMinFactor, kSafety * std::pow(err, -kAlpha)) : kMinFactor;
            h = step * factor;
            if (h < cfg.min_step) {
                if (nonfinite_trial) {
                    traj.terminal_flag = TerminalFlag::blow_up;
                    return traj;
                }
                throw StiffnessFailure("integrate: step size underflow at t = " + std::to_string(t),
                                       std::move(traj));
            }
            continue;
        }

        for (std::size_t i = 0; i < n; ++i) {
            y[i] = w.y4[i];
            if (y[i] < 0.0) y[i] = 0.0;  // within clip_tol by the check above
        }
        t = last ? cfg.T : t + step;
        ++traj.accepted_steps;
        traj.times.push_back(t);
        traj.states.push_back(y);

        if (stop && stop(t, y)) {
            traj.terminal_flag = TerminalFlag::reached_T;
            return traj;
        }
        if (max_norm(y) > kBlowUp) {
            traj.terminal_flag = TerminalFlag::blow_up;
            return traj;
        }

        rhs(y, w.k[0]);
        if (!all_finite(w.k[0])) {
            traj.terminal_flag = TerminalFlag::blow_up;
            return traj;
        }
        if (cfg.conv_tol > 0.0 && max_norm(w.k[0]) < cfg.conv_tol) {
            traj.terminal_flag = TerminalFlag::converged;
            return traj;
        }

        const double e = std::max(err, 1e-10);
        double factor = kSafety * std::pow(e, -kAlpha) * std::pow(err_prev, kBeta);
        factor = std::clamp(factor, kMinFactor, kMaxFactor);
        err_prev = e;
        h = std::min(step * factor, cfg.max_step);
    }
    traj.terminal_flag = TerminalFlag::reached_T;
    return traj;
}

std::vector<double> integrate_fixed(const Rhs& rhs, std::vector<double> y0, double T, double h) {
    if (!(h > 0.0) || !(T >= 0.0)) throw DomainError("integrate_fixed: need h > 0 and T >= 0");
    const double steps_real = T / h;
    const auto steps = static_cast<std::size_t>(std::llround(steps_real));
    if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real))
        throw DomainError("integrate_fixed: T must be an integer multiple of h");
    StepWork w(y0.size());
    std::vector<double> y = std::move(y0);
    for (std::size_t s = 0; s < steps; ++s) {
        rhs(y, w.k[0]);
        fehlberg_step(rhs, y, h, w);
        y = w.y4;
    }
    return y;
}

double order_check(const Rhs& rhs, const std::vector<double>& y0, double T,
                   const std::vector<double>& exact, double h) {
    auto error_at = [&](double step) {
        const auto y = integrate_fixed(rhs, y0, T, step);
        double e = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i) e = std::max(e, std::abs(y[i] - exact[i]));
        return e;
    };
    const double coarse = error_at(h);
    const double fine = error_at(0.5 * h);
    if (coarse == 0.0 || fine == 0.0)
        throw DomainError("order_check: integration is exact, order undefined");
    return std::log2(coarse / fine);
}

}  // namespace wolbdyn::ode
