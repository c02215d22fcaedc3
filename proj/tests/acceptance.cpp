// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "wolbdyn/agestruct.hpp"
#include "wolbdyn/cli/commands.hpp"
#include "wolbdyn/equilibria.hpp"
#include "wolbdyn/fields.hpp"
#include "wolbdyn/models.hpp"
#include "wolbdyn/odeint.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace wolbdyn;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

int failures = 0;

void criterion(int id, const char* title, const std::function<void(Outcome&)>& body) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.detail += std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("%s criterion %d (%s) [%.3f s]%s%s\n", o.pass ? "PASS" : "FAIL", id, title, secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
}

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const EquilibriumReport* find(const std::vector<EquilibriumReport>& eqs, double i, double u, double tol) {
    for (const auto& e : eqs) {
        const auto s = std::get<State2>(e.point);
        if (std::abs(s.i - i) < tol && std::abs(s.u - u) < tol) return &e;
    }
    return nullptr;
}

std::string fmt(const char* f, double x) {
    char buf[96];
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

age::AgeSpec constant_spec(double b1, double b2, double tau, double q, int N) {
    age::AgeSpec s;
    s.m = 1.0;
    s.N = N;
    s.beta1 = age::RateFunction::constant(b1);
    s.beta2 = age::RateFunction::constant(b2);
    s.eta1 = age::RateFunction::constant(1.0);
    s.eta2 = age::RateFunction::constant(1.0);
    s.tau = tau;
    s.q = q;
    return s;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

int main() {
    criterion(1, "three equilibria at (0.9, 1, 1)", [](Outcome& o) {
        const auto t0 = Clock::now();
        const auto eqs = single_equilibria(SingleStrainParams::from_xi(0.9, 1.0, 1.0));
        const auto* df = find(eqs, 0.0, 1.0, 1e-12);
        const auto* mid = find(eqs, 0.09, 0.81, 1e-12);
        const auto* inf = find(eqs, 0.9, 0.0, 1e-12);
        o.require(df && df->classification == StabilityClass::stable_node_or_focus, "(0,1) stable");
        o.require(mid && mid->classification == StabilityClass::saddle, "(0.09,0.81) saddle");
        o.require(inf && inf->classification == StabilityClass::stable_node_or_focus, "(0.9,0) stable");
        o.require(elapsed(t0) < 1.0, "runtime < 1 s");
    });

    criterion(2, "stable coexistence at (1, 0.76, 1)", [](Outcome& o) {
        const double xi = 1.0, tau = 0.76, q = 1.0;
        const auto eqs = single_equilibria(SingleStrainParams::from_xi(xi, tau, q));
        const auto* c = find(eqs, 0.456, 0.304, 1e-3);
        o.require(c && c->classification == StabilityClass::stable_node_or_focus, "(0.456,0.304) stable");
        // with p = tau xi and u = p - i: q i^2 + p (p - tau - q) i + p^2 (1 - p) = 0
        const double pp = tau * xi;
        const double a = q;
        const double b = pp * (pp - tau - q);
        const double cc = pp * pp * (1.0 - pp);
        const double i2 = (-b + std::sqrt(b * b - 4 * a * cc)) / (2 * a);
        if (c) {
            const auto s = std::get<State2>(c->point);
            o.require(std::abs(s.i - i2) < 1e-12 && std::abs(s.u - (pp - i2)) < 1e-12,
                      "quadratic formula agreement " + fmt("%.3g", std::abs(s.i - i2)));
        }
    });

    criterion(3, "saddle infected state and outside root at (0.5, 1, 0.1)", [](Outcome& o) {
        const auto eqs = single_equilibria(SingleStrainParams::from_xi(0.5, 1.0, 0.1));
        const auto* inf = find(eqs, 0.5, 0.0, 1e-12);
        o.require(inf && inf->classification == StabilityClass::saddle, "(0.5,0) saddle");
        bool outside = false;
        for (const auto& e : eqs) {
            const auto s = std::get<State2>(e.point);
            if (s.u < 0.0) outside = e.classification == StabilityClass::outside_domain;
        }
        o.require(outside, "root with u < 0 labelled outside_domain");
        const auto* df = find(eqs, 0.0, 1.0, 1e-12);
        o.require(df && df->classification == StabilityClass::stable_node_or_focus, "(0,1) stable");
    });

    criterion(4, "tau threshold on a 200^3 sweep", [](Outcome& o) {
        const auto t0 = Clock::now();
        cli::SweepGrid g;
        g.xi = {0.005, 1.0, 200, {}};
        g.tau = {0.0, 1.0, 200, {}};
        g.q = {0.005, 1.0, 200, {}};
        const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
        const auto s = cli::run_sweep(g, threads);
        const double secs = elapsed(t0);
        o.require(s.points == 8'000'000, "point count");
        o.require(s.min_tau_C.has_value(), "region C reached");
        if (s.min_tau_C) {
            o.require(std::abs(*s.min_tau_C - 0.75) <= 5e-3, "min tau_C = " + fmt("%.6f", *s.min_tau_C));
        }
        o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
        if (o.pass && s.min_tau_C) o.detail = "min tau_C = " + fmt("%.6f", *s.min_tau_C);
    });

    criterion(5, "invariant planes and ratio drift", [](Outcome& o) {
        std::mt19937_64 rng(20261015);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double tau = U(rng);
            const double eta = 1.0 + U(rng);
            const State4 s{0.0, U(rng), U(rng), U(rng)};
            const double alpha = 3.0 * U(rng);
            const auto pa = simplified_compatible(tau, eta, U(rng), U(rng));
            const State4 d = rhs_multistrain(s, pa);
            worst = std::max(worst, std::abs(d.i_A - alpha * d.i_B -
                                             (tau - eta * s.total()) * (s.i_A - alpha * s.i_B)));
            const double qAB = U(rng), qBA = U(rng);
            const auto pm = mutually_incompatible(tau, eta, U(rng), qAB, qBA);
            const State4 e = rhs_multistrain(s, pm);
            worst = std::max(worst, std::abs(qBA * e.i_A - qAB * e.i_B -
                                             (tau - eta * s.total()) * (qBA * s.i_A - qAB * s.i_B)));
        }
        o.require(worst < 1e-12, "identity residual " + fmt("%.3g", worst));

        const auto p = simplified_compatible(1.0, 1.1, 0.95, 0.5);
        ode::IntegratorConfig cfg;
        cfg.T = 50.0;
        double drift = 0.0;
        for (int k = 0; k < 20; ++k) {
            const std::vector<double> y0{0.0, 0.01 + 0.5 * U(rng), 0.01 + 0.5 * U(rng), 0.1 + 0.9 * U(rng)};
            drift = std::max(drift, ratio_drift(to_state4(ode::integrate(multistrain_field(p), y0, cfg))));
        }
        o.require(drift < 1e-6, "ratio drift " + fmt("%.3g", drift));
    });

    criterion(6, "double infection dominates", [](Outcome& o) {
        const auto t0 = Clock::now();
        const auto p = double_infection(0.9, 0.9, 1.1, 1.1, 0.9, 0.9);
        ode::IntegratorConfig cfg;
        cfg.T = 5000.0;
        cfg.conv_tol = 1e-10;
        const auto f = multistrain_field(p);
        const auto tr = ode::integrate(f, {0.1, 0.1, 0.1, 0.1}, cfg);
        const auto& y = tr.final_state();
        std::vector<double> d(4);
        f(y, d);
        o.require(tr.terminal_flag == ode::TerminalFlag::converged, "terminal flag converged");
        o.require(ode::max_norm(d) < 1e-10, "rhs norm " + fmt("%.3g", ode::max_norm(d)));
        o.require(y[0] > y[1] && y[0] > y[2], "i_AB largest");
        o.require(y[1] > 0.0 && y[2] > 0.0 && y[3] > 0.0, "coexistence");
        o.require(elapsed(t0) < 5.0, "runtime < 5 s");
    });

    criterion(7, "age-structured steady states at N = 800", [](Outcome& o) {
        const auto s = constant_spec(5, 5, 0.9, 1.0, 800);
        const auto states = age::solve_positive_steady_state(s);
        o.require(states.size() == 2, "two positive states");
        if (states.size() != 2) return;
        // frozen oracle: independent numpy/scipy evaluation on the same grid
        constexpr double c1 = 4.447316695407763;
        constexpr double I_lo = 0.5012199980414342;
        constexpr double I_hi = 3.946096697366328;
        o.require(std::abs(states[0].c1 - c1) < 1e-6, "c1 " + fmt("%.12f", states[0].c1));
        o.require(std::abs(states[0].I_star - I_lo) < 1e-6, "I*_lo " + fmt("%.12f", states[0].I_star));
        o.require(std::abs(states[1].I_star - I_hi) < 1e-6, "I*_hi " + fmt("%.12f", states[1].I_star));
        for (const auto& ss : states) {
            const double r = age::steady_state_residuals(ss, s).max();
            o.require(r < 1e-8, "residual " + fmt("%.3g", r));
        }
    });

    criterion(8, "characteristic function", [](Outcome& o) {
        const auto s = constant_spec(5, 5, 0.9, 1.0, 800);
        const auto states = age::solve_positive_steady_state(s);
        if (states.size() != 2) {
            o.require(false, "two positive states");
            return;
        }
        for (const auto& ss : states) {
            const double k = age::evaluate_K(100.0 / s.m, ss, s);
            o.require(k >= 0.99 && k <= 1.01, "K(100/m) = " + fmt("%.6f", k));
        }

        const auto f = constant_spec(3, 2, 0.9, 0.8, 400);
        const auto triv = age::trivial_steady_state(f);
        const auto df = age::solve_disease_free(f);
        double worst = 0.0;
        for (double lambda : {0.0, 0.25, 1.0, 5.0, 20.0}) {
            const auto kt = age::characteristic_coefficients(lambda, triv, f);
            worst = std::max(worst, std::abs(age::evaluate_K(lambda, triv, f) -
                                             (f.tau * kt.a5 - 1.0) * (kt.a7 - 1.0)));
            const auto kd = age::characteristic_coefficients(lambda, df, f);
            const double block = (kd.a7 - 1.0) * (-kd.a4 - 1.0) + kd.a3 * kd.a9;
            worst = std::max(worst, std::abs(age::evaluate_K(lambda, df, f) + (f.tau * kd.a5 - 1.0) * block));
        }
        o.require(worst < 1e-10, "factorisation residual " + fmt("%.3g", worst));

        const double k0 = age::evaluate_K(0.0, states[0], s);
        o.require(k0 < 0.0, "K(0) = " + fmt("%.6f", k0));
        const auto v = age::instability_check(states[0], s, 10.0 / s.m);
        o.require(v.verdict == age::Verdict::unstable && v.witness.has_value(), "located root");
        if (v.witness) {
            const double kr = age::evaluate_K(*v.witness, states[0], s);
            o.require(*v.witness > 0.0 && std::abs(kr) < 1e-8, "|K(lambda*)| = " + fmt("%.3g", kr));
        }
    });

    criterion(9, "complete transmission instability agrees with K(0)", [](Outcome& o) {
        // beta2 = 6: with beta1 = beta2 only the boundary states exist at tau = 1
        const auto s = constant_spec(5, 6, 1.0, 1.0, 400);
        const age::SteadyStateProfile* inner = nullptr;
        const auto states = age::solve_positive_steady_state(s);
        for (const auto& ss : states)
            if (ss.I_star > 0.0 && ss.U_star > 0.0) inner = &ss;
        o.require(inner != nullptr, "interior steady state");
        if (!inner) return;
        const auto v = age::complete_transmission_instability(*inner, s);
        o.require(v.verdict == age::Verdict::unstable, "verdict unstable");
        o.require(v.witness && *v.witness < 0.0, "condition < 0");
        const auto k = age::instability_check(*inner, s, 10.0);
        o.require(k.verdict == age::Verdict::unstable, "instability_check unstable");
        o.require(age::evaluate_K(0.0, *inner, s) < 0.0, "K(0) < 0");
    });

    criterion(10, "PDE consistency", [](Outcome& o) {
        const auto s = constant_spec(5, 5, 0.9, 1.0, 400);
        double worst = 0.0;
        for (const auto& ss : age::solve_positive_steady_state(s)) {
            const auto run = age::simulate_pde(s, ss.i_profile, ss.u_profile, 5.0 * s.m);
            for (std::size_t k = 0; k < run.I.size(); ++k)
                worst = std::max({worst, rel(run.I[k], ss.I_star), rel(run.U[k], ss.U_star)});
        }
        o.require(worst < 1e-3, "steady-state drift " + fmt("%.3g", worst));

        const auto inv = constant_spec(3, 2, 0.9, 1.0, 400);
        o.require(age::disease_free_instability(inv).verdict == age::Verdict::unstable, "invasion condition");
        const auto df = age::solve_disease_free(inv);
        std::vector<double> i0(df.u_profile.size());
        for (std::size_t j = 0; j < i0.size(); ++j) i0[j] = 0.01 * df.u_profile[j];
        const auto run = age::simulate_pde(inv, i0, df.u_profile, 2.0 * inv.m);
        bool monotone = true;
        for (std::size_t k = 1; k < run.I.size(); ++k) monotone = monotone && run.I[k] > run.I[k - 1];
        o.require(monotone, "monotone I(t) growth");
    });

    return failures == 0 ? 0 : 1;
}
