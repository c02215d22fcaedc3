#include "wolbdyn/equilibria.hpp"

#include "wolbdyn/errors.hpp"
#include "wolbdyn/fields.hpp"
#include "wolbdyn/odeint.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace wolbdyn {

std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::stable_node_or_focus: return "stable_node_or_focus";
        case StabilityClass::saddle: return "saddle";
        case StabilityClass::unstable: return "unstable";
        case StabilityClass::nonhyperbolic: return "nonhyperbolic";
        case StabilityClass::outside_domain: return "outside_domain";
    }
    return "unknown";
}

std::string to_string(Region r) {
    switch (r) {
        case Region::A: return "A";
        case Region::B_only: return "B_only";
        case Region::C: return "C";
    }
    return "unknown";
}

StabilityClass classify(std::span<const std::complex<double>> eigenvalues, bool in_domain,
                        double tol) {
    if (!in_domain) return StabilityClass::outside_domain;
    bool any_pos = false;
    bool any_neg = false;
    for (const auto& ev : eigenvalues) {
        const double re = ev.real();
        if (std::abs(re) <= tol) return StabilityClass::nonhyperbolic;
        (re > 0.0 ? any_pos : any_neg) = true;
    }
    if (any_pos && any_neg) return StabilityClass::saddle;
    return any_pos ? StabilityClass::unstable : StabilityClass::stable_node_or_focus;
}

num::Matrix jacobian_single(State2 s, const SingleStrainParams& k) {
    const double i = s.i;
    const double u = s.u;
    const double p = i + u;
    if (p == 0.0) throw DomainError("jacobian_single: undefined at i + u = 0");
    const double p2 = p * p;
    num::Matrix j(2);
    if (k.cost_mode == CostMode::fecundity) {
        j(0, 0) = k.mu * k.tau - (2.0 * i + u);
        j(0, 1) = -i;
        j(1, 0) = k.mu * (1.0 - k.tau) + k.q * u * (i / p2 - 1.0 / p) - u;
    } else {
        j(0, 0) = k.tau - k.eta * (2.0 * i + u);
        j(0, 1) = -k.eta * i;
        j(1, 0) = 1.0 - k.tau + k.q * u * (i / p2 - 1.0 / p) - u;
    }
    j(1, 1) = 1.0 + k.q * i * (u / p2 - 1.0 / p) - (2.0 * u + i);
    return j;
}

num::Matrix jacobian_multistrain(State4 s, const MultiStrainParams& k) {
    const double p = s.total();
    if (p == 0.0) throw DomainError("jacobian_multistrain: undefined at zero population");
    const std::array<double, 4> x{s.i_AB, s.i_A, s.i_B, s.u};
    const std::array<double, 4> cA{k.qAAB, 0.0, k.qAB, 0.0};
    const std::array<double, 4> cB{k.qBAB, k.qBA, 0.0, 0.0};
    const std::array<double, 4> c0{k.q0AB, k.q0A, k.q0B, 0.0};
    auto dot = [&](const std::array<double, 4>& c) {
        return c[0] * x[0] + c[1] * x[1] + c[2] * x[2] + c[3] * x[3];
    };
    const double sA = dot(cA);
    const double sB = dot(cB);
    const double s0 = dot(c0);
    const double gA = 1.0 - sA / p;
    const double gB = 1.0 - sB / p;
    const double g0 = 1.0 - s0 / p;
    const double tA = k.tau_A;
    const double tB = k.tau_B;
    const double p2 = p * p;

    num::Matrix j(4);
    for (std::size_t c = 0; c < 4; ++c) {
        const double dgA = -cA[c] / p + sA / p2;
        const double dgB = -cB[c] / p + sB / p2;
        const double dg0 = -c0[c] / p + s0 / p2;
        const double d0 = (c == 0) ? 1.0 : 0.0;
        const double d1 = (c == 1) ? 1.0 : 0.0;
        const double d2 = (c == 2) ? 1.0 : 0.0;
        const double d3 = (c == 3) ? 1.0 : 0.0;
        j(0, c) = d0 * (tA * tB - k.eta_AB() * p) - k.eta_AB() * s.i_AB;
        j(1, c) = d0 * tA * (1.0 - tB) + tA * (dgA * s.i_A + gA * d1) -
                  k.eta_A * (s.i_A + p * d1);
        j(2, c) = d0 * (1.0 - tA) * tB + tB * (dgB * s.i_B + gB * d2) -
                  k.eta_B * (s.i_B + p * d2);
        j(3, c) = d0 * (1.0 - tA) * (1.0 - tB) + (1.0 - tA) * (dgA * s.i_A + gA * d1) +
                  (1.0 - tB) * (dgB * s.i_B + gB * d2) + dg0 * s.u + g0 * d3 - s.u - p * d3;
    }
    return j;
}

EquilibriumReport analyze_point(State2 s, const SingleStrainParams& params, std::string name) {
    EquilibriumReport r;
    r.name = std::move(name);
    r.point = s;
    if (s.i == 0.0 && s.u == 0.0) {
        // Not differentiable here; the total population grows from any
        // small positive state, so the origin repels.
        r.classification = StabilityClass::unstable;
        return r;
    }
    r.jacobian = jacobian_single(s, params);
    r.eigenvalues = num::eigenvalues(r.jacobian);
    r.classification = classify(r.eigenvalues, s.i >= 0.0 && s.u >= 0.0);
    return r;
}

EquilibriumReport analyze_point(State4 s, const MultiStrainParams& params, std::string name) {
    EquilibriumReport r;
    r.name = std::move(name);
    r.point = s;
    r.jacobian = jacobian_multistrain(s, params);
    r.eigenvalues = num::eigenvalues(r.jacobian);
    const bool in_domain = s.i_AB >= 0.0 && s.i_A >= 0.0 && s.i_B >= 0.0 && s.u >= 0.0;
    r.classification = classify(r.eigenvalues, in_domain);
    return r;
}

namespace {

struct InteriorRoot {
    double i;
    const char* name;
};

// Roots of (q / (tau xi)) i^2 + (tau (xi - 1) - q) i + tau xi (1 - xi tau) = 0.
std::vector<InteriorRoot> interior_roots(double xi, double tau, double q) {
    if (tau == 0.0) return {};
    const double txi = tau * xi;
    const double b = tau * (xi - 1.0) - q;
    const double c = txi * (1.0 - xi * tau);
    if (q == 0.0) {
        if (b == 0.0) return {};
        return {{-c / b, "i1"}};
    }
    const double disc = existence_discriminant(xi, tau, q);
    if (disc < 0.0) return {};
    const double i2 = txi * (-b + std::sqrt(disc)) / (2.0 * q);
    // product of the roots is c / a = (tau xi)^2 (1 - xi tau) / q
    const double i1 = (i2 != 0.0) ? txi * txi * (1.0 - xi * tau) / (q * i2) : 0.0;
    return {{i1, "i1"}, {i2, "i2"}};
}

bool near(State2 a, State2 b) { return std::abs(a.i - b.i) <= 1e-12 && std::abs(a.u - b.u) <= 1e-12; }

bool near(State4 a, State4 b) {
    return std::abs(a.i_AB - b.i_AB) <= 1e-9 && std::abs(a.i_A - b.i_A) <= 1e-9 &&
           std::abs(a.i_B - b.i_B) <= 1e-9 && std::abs(a.u - b.u) <= 1e-9;
}

}  // namespace

double existence_discriminant(double xi, double tau, double q) {
    const double b = tau * (xi - 1.0) - q;
    return b * b - 4.0 * q * (1.0 - xi * tau);
}

std::vector<EquilibriumReport> single_equilibria(const SingleStrainParams& params) {
    params.validate();
    if (params.cost_mode != CostMode::mortality)
        throw DomainError("single_equilibria: closed form needs the mortality cost mode");
    std::vector<EquilibriumReport> out;
    out.push_back(analyze_point(State2{0.0, 1.0}, params, "disease_free"));
    out.push_back(analyze_point(State2{0.0, 0.0}, params, "origin"));
    const double xi = params.xi();
    for (const auto& root : interior_roots(xi, params.tau, params.q)) {
        const State2 s{root.i, params.tau * xi - root.i};
        const bool dup = std::any_of(out.begin(), out.end(), [&](const EquilibriumReport& r) {
            return near(std::get<State2>(r.point), s);
        });
        if (!dup) out.push_back(analyze_point(s, params, root.name));
    }
    return out;
}

std::vector<EquilibriumReport> fecundity_equilibria(const SingleStrainParams& params,
                                                    int scan_intervals) {
    params.validate();
    if (params.cost_mode != CostMode::fecundity)
        throw DomainError("fecundity_equilibria: params are not in fecundity mode");
    if (scan_intervals < 1) throw DomainError("fecundity_equilibria: scan_intervals must be >= 1");
    std::vector<EquilibriumReport> out;
    out.push_back(analyze_point(State2{0.0, 1.0}, params, "disease_free"));
    out.push_back(analyze_point(State2{0.0, 0.0}, params, "origin"));
    const double total = params.mu * params.tau;
    if (total <= 0.0) return out;
    // On i + u = mu tau the i-equation vanishes; the u-equation reduces to g(i).
    auto g = [&](double i) {
        return rhs_single_unchecked({i, total - i}, params).u;
    };
    std::vector<double> roots;
    double prev_x = 0.0;
    double prev_g = g(prev_x);
    if (prev_g == 0.0) roots.push_back(0.0);
    for (int k = 1; k <= scan_intervals; ++k) {
        const double x = total * static_cast<double>(k) / scan_intervals;
        const double gx = g(x);
        if (gx == 0.0) {
            roots.push_back(x);
        } else if (prev_g != 0.0 && std::signbit(gx) != std::signbit(prev_g)) {
            roots.push_back(num::bisect(g, prev_x, x, {1e-15, 200}).root);
        }
        prev_x = x;
        prev_g = gx;
    }
    int idx = 1;
    for (double i : roots) {
        const State2 s{i, std::max(0.0, total - i)};
        const bool dup = std::any_of(out.begin(), out.end(), [&](const EquilibriumReport& r) {
            return near(std::get<State2>(r.point), s);
        });
        if (!dup) out.push_back(analyze_point(s, params, "i" + std::to_string(idx++)));
    }
    return out;
}

Region region_classify(double xi, double tau, double q) {
    if (!(xi > 0.0 && xi <= 1.0) || !(tau >= 0.0 && tau <= 1.0) || !(q >= 0.0 && q <= 1.0))
        throw DomainError("region_classify: parameters out of range");
    if (existence_discriminant(xi, tau, q) < 0.0) return Region::A;
    if (q + tau * (xi - 1.0) >= 0.0) return Region::C;
    return Region::B_only;
}

std::optional<State2> upper_interior_root(double xi, double tau, double q) {
    const auto roots = interior_roots(xi, tau, q);
    if (roots.empty()) return std::nullopt;
    double i = roots.front().i;
    for (const auto& r : roots) i = std::max(i, r.i);
    return State2{i, tau * xi - i};
}

ContinuumPoint continuum_equilibria(double u, const MultiStrainParams& params) {
    params.validate();
    if (!is_simplified_compatible(params))
        throw DomainError("continuum_equilibria: needs the simplified compatible preset");
    const double tau = params.tau_A;
    const double eta = params.eta_A;
    if (!(u > 0.0 && u < tau / eta)) throw DomainError("continuum_equilibria: u outside (0, tau*xi)");
    const double qa = params.q0A;
    const double qb = params.q0B;
    if (qa == qb) throw SingularFormulaError("continuum_equilibria: q0A == q0B");
    const double den = eta * eta * (qa - qb) * u;
    const double common = tau * tau * tau - tau * tau * (1.0 + (eta - 1.0) * u);
    ContinuumPoint pt;
    pt.i_A = (-common - eta * qb * tau * u + eta * eta * qb * u * u) / den;
    pt.i_B = (common + eta * qa * tau * u - eta * eta * qa * u * u) / den;
    pt.nonnegative = pt.i_A >= 0.0 && pt.i_B >= 0.0;
    return pt;
}

double tau_persistence_threshold(int grid_resolution) {
    if (grid_resolution < 100) throw DomainError("tau_persistence_threshold: resolution must be >= 100");
    const int n = grid_resolution;
    const double step = 1.0 / n;
    auto feasible = [&](double tau) {
        for (int j = 1; j <= n; ++j) {
            const double xi = j * step;
            for (int k = 1; k <= n; ++k) {
                if (region_classify(xi, tau, k * step) == Region::C) return true;
            }
        }
        return false;
    };
    int first = -1;
    for (int k = 0; k <= n; ++k) {
        if (feasible(k * step)) {
            first = k;
            break;
        }
    }
    if (first < 0) return std::numeric_limits<double>::quiet_NaN();
    if (first == 0) return 0.0;
    double lo = (first - 1) * step;
    double hi = first * step;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::vector<State2> saddle_separatrix(const SingleStrainParams& params,
                                      const EquilibriumReport& saddle, double arc_length,
                                      double eps) {
    if (saddle.classification != StabilityClass::saddle || !std::holds_alternative<State2>(saddle.point))
        throw DomainError("saddle_separatrix: report is not a single-strain saddle");
    if (!(arc_length > 0.0)) throw DomainError("saddle_separatrix: arc_length must be > 0");
    const State2 p0 = std::get<State2>(saddle.point);
    const num::Matrix j = jacobian_single(p0, params);
    const auto ev = num::eigenvalues(j);
    const double stable = ev.front().real();  // sorted ascending; saddle has one negative
    const auto v = num::eigenvector_2x2(j, stable);

    ode::IntegratorConfig cfg;
    cfg.rel_tol = 1e-10;
    cfg.abs_tol = 1e-13;
    cfg.max_step = 0.02;
    cfg.initial_step = 1e-4;
    cfg.conv_tol = 1e-13;
    cfg.T = 1e4;
    const auto reversed = single_field(params, -1.0);

    auto trace = [&](double sign) {
        std::vector<State2> branch;
        State2 start{p0.i + sign * eps * v[0], p0.u + sign * eps * v[1]};
        if (start.i < 0.0 || start.u < 0.0) return branch;
        branch.push_back(start);
        double length = std::hypot(start.i - p0.i, start.u - p0.u);
        bool done = false;
        auto observer = [&](double, std::span<const double> y) {
            const State2 prev = branch.back();
            State2 cur{y[0], y[1]};
            double t_cut = 1.0;
            // leaving the quadrant: cut the segment at the boundary
            if (cur.i < 0.0) t_cut = std::min(t_cut, prev.i / (prev.i - cur.i));
            if (cur.u < 0.0) t_cut = std::min(t_cut, prev.u / (prev.u - cur.u));
            const double seg = std::hypot(cur.i - prev.i, cur.u - prev.u);
            if (length + t_cut * seg >= arc_length) t_cut = std::min(t_cut, (arc_length - length) / seg);
            if (t_cut < 1.0) {
                cur = {prev.i + t_cut * (cur.i - prev.i), prev.u + t_cut * (cur.u - prev.u)};
                cur.i = std::max(0.0, cur.i);
                cur.u = std::max(0.0, cur.u);
                done = true;
            }
            length += t_cut * seg;
            branch.push_back(cur);
            return done;
        };
        try {
            ode::integrate(reversed, {start.i, start.u}, cfg, observer);
        } catch (const StiffnessError&) {
            // keep what was traced before the step size collapsed
        }
        return branch;
    };

    auto minus = trace(-1.0);
    auto plus = trace(1.0);
    std::vector<State2> line(minus.rbegin(), minus.rend());
    line.push_back(p0);
    line.insert(line.end(), plus.begin(), plus.end());
    return line;
}

State4 refine_multistrain_equilibrium(const MultiStrainParams& params, State4 seed,
                                      NewtonOptions opts) {
    params.validate();
    auto residual = [&](const State4& s) {
        const State4 f = rhs_multistrain_unchecked(s, params);
        return std::vector<double>{f.i_AB, f.i_A, f.i_B, f.u};
    };
    auto add = [](const State4& s, const std::vector<double>& d, double a) {
        return State4{s.i_AB + a * d[0], s.i_A + a * d[1], s.i_B + a * d[2], s.u + a * d[3]};
    };
    State4 x = seed;
    auto f = residual(x);
    double fnorm = ode::max_norm(f);
    double lm = 1e-6;
    for (int it = 0; it < opts.max_iter && fnorm >= opts.tol; ++it) {
        const num::Matrix j = jacobian_multistrain(x, params);
        std::vector<double> neg_f(4);
        for (std::size_t k = 0; k < 4; ++k) neg_f[k] = -f[k];

        std::vector<double> step;
        try {
            step = num::solve(j, neg_f);
        } catch (const SingularFormulaError&) {
            step.clear();
        }
        bool accepted = false;
        if (!step.empty()) {
            for (double a = 1.0; a >= 1.0 / 1024.0; a *= 0.5) {
                const State4 trial = add(x, step, a);
                if (trial.total() <= 0.0) continue;
                const auto ft = residual(trial);
                const double nt = ode::max_norm(ft);
                if (nt < fnorm) {
                    x = trial;
                    f = ft;
                    fnorm = nt;
                    accepted = true;
                    break;
                }
            }
        }
        if (accepted) continue;
        // Levenberg-Marquardt: (J^T J + lm I) d = -J^T f
        for (int tries = 0; tries < 30 && !accepted; ++tries, lm *= 10.0) {
            num::Matrix jtj(4);
            std::vector<double> rhs(4, 0.0);
            for (std::size_t r = 0; r < 4; ++r) {
                for (std::size_t c = 0; c < 4; ++c) {
                    double s = 0.0;
                    for (std::size_t k = 0; k < 4; ++k) s += j(k, r) * j(k, c);
                    jtj(r, c) = s + (r == c ? lm : 0.0);
                }
                for (std::size_t k = 0; k < 4; ++k) rhs[r] -= j(k, r) * f[k];
            }
            const auto d = num::solve(jtj, rhs);
            const State4 trial = add(x, d, 1.0);
            if (trial.total() <= 0.0) continue;
            const auto ft = residual(trial);
            const double nt = ode::max_norm(ft);
            if (nt < fnorm) {
                x = trial;
                f = ft;
                fnorm = nt;
                accepted = true;
                lm = std::max(lm / 100.0, 1e-12);
            }
        }
        if (!accepted) break;
    }
    if (!(fnorm < opts.tol)) throw DivergenceError("refine_multistrain_equilibrium: no convergence");
    return x;
}

std::vector<EquilibriumReport> multistrain_equilibria(const MultiStrainParams& params,
                                                      std::span<const State4> seeds) {
    params.validate();
    std::vector<EquilibriumReport> out;
    auto push = [&](State4 s, std::string name) {
        const bool dup = std::any_of(out.begin(), out.end(), [&](const EquilibriumReport& r) {
            return near(std::get<State4>(r.point), s);
        });
        if (!dup) out.push_back(analyze_point(s, params, std::move(name)));
    };
    push(State4{0.0, 0.0, 0.0, 1.0}, "disease_free");
    // On {i_AB = i_B = 0} the system is the single-strain model for strain A
    // (and symmetrically for B).
    const auto marginal = [&](double tau, double eta, double q) {
        SingleStrainParams sp;
        sp.tau = tau;
        sp.eta = eta;
        sp.q = q;
        std::vector<std::pair<double, double>> pts;
        for (const auto& r : single_equilibria(sp)) {
            const auto s = std::get<State2>(r.point);
            if (r.name == "i1" || r.name == "i2") pts.emplace_back(s.i, s.u);
        }
        return pts;
    };
    for (const auto& [i, u] : marginal(params.tau_A, params.eta_A, params.q0A))
        push(State4{0.0, i, 0.0, u}, "A_marginal");
    for (const auto& [i, u] : marginal(params.tau_B, params.eta_B, params.q0B))
        push(State4{0.0, 0.0, i, u}, "B_marginal");
    int k = 0;
    for (const auto& seed : seeds) {
        ++k;
        try {
            push(refine_multistrain_equilibrium(params, seed), "seed_" + std::to_string(k));
        } catch (const DivergenceError&) {
            // seed did not lead to an equilibrium; nothing to report
        }
    }
    return out;
}

}  // namespace wolbdyn
