#include "wolbdyn/agestruct.hpp"

#include "wolbdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

namespace wolbdyn::age {

namespace {

constexpr double kEqualityTol = 1e-12;
constexpr double kKZeroTol = 1e-10;
constexpr double kRootTol = 1e-8;
constexpr int kScanSteps = 200;
constexpr int kMaxWidenings = 60;
constexpr int kMinAnalysisCells = 100;

void require_analysis_grid(const AgeSpec& spec) {
    spec.validate();
    if (spec.N < kMinAnalysisCells)
        throw DomainError("analysis operations need N >= 100 grid cells");
}

std::vector<double> weighted_exp(const std::vector<double>& w, const std::vector<double>& cum,
                                 double c) {
    std::vector<double> out(cum.size());
    for (std::size_t j = 0; j < cum.size(); ++j) out[j] = w[j] * std::exp(-c * cum[j]);
    return out;
}

std::vector<double> exp_profile(const std::vector<double>& cum, double c) {
    std::vector<double> out(cum.size());
    for (std::size_t j = 0; j < cum.size(); ++j) out[j] = std::exp(-c * cum[j]);
    return out;
}

bool identically_zero(const RateFunction& r) {
    return std::all_of(r.values().begin(), r.values().end(), [](double v) { return v == 0.0; });
}

// f(a) * ∫_0^a g/f by running trapezoid, without forming 1/f.
std::vector<double> scaled_running_integral(const std::vector<double>& f,
                                            const std::vector<double>& g, double lambda_h,
                                            double c, const std::vector<double>& cum, double h) {
    std::vector<double> G(f.size(), 0.0);
    for (std::size_t j = 0; j + 1 < f.size(); ++j) {
        const double r = std::exp(-lambda_h - c * (cum[j + 1] - cum[j]));
        G[j + 1] = r * G[j] + 0.5 * h * (g[j] * r + g[j + 1]);
    }
    return G;
}

std::vector<double> product(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) out[j] = a[j] * b[j];
    return out;
}

}  // namespace

RateFunction::RateFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
    if (knots_.empty() || knots_.size() != values_.size())
        throw DomainError("rate function needs matching, non-empty knots and values");
    for (std::size_t k = 0; k < knots_.size(); ++k) {
        if (!std::isfinite(knots_[k]) || !std::isfinite(values_[k]))
            throw DomainError("rate function entries must be finite");
        if (values_[k] < 0.0) throw DomainError("rate function values must be non-negative");
        if (k > 0 && knots_[k] <= knots_[k - 1])
            throw DomainError("rate function knots must be strictly increasing");
    }
}

RateFunction RateFunction::constant(double value) { return RateFunction({0.0}, {value}); }

double RateFunction::operator()(double a) const {
    if (a <= knots_.front()) return values_.front();
    if (a >= knots_.back()) return values_.back();
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), a);
    const std::size_t k = static_cast<std::size_t>(it - knots_.begin());
    const double t = (a - knots_[k - 1]) / (knots_[k] - knots_[k - 1]);
    return values_[k - 1] + t * (values_[k] - values_[k - 1]);
}

void AgeSpec::validate() const {
    if (!(m > 0.0) || !std::isfinite(m)) throw DomainError("maximum age m must be positive");
    if (N < 1) throw DomainError("N must be at least 1");
    if (!(tau >= 0.0 && tau <= 1.0)) throw DomainError("tau must lie in [0, 1]");
    if (!(q >= 0.0 && q <= 1.0)) throw DomainError("q must lie in [0, 1]");
    for (const RateFunction* r : {&beta1, &beta2, &eta1, &eta2}) {
        if (r->knots().front() < 0.0 || r->knots().back() > m)
            throw DomainError("rate knots must lie in [0, m]");
    }
}

AgeGrid::AgeGrid(const AgeSpec& spec) {
    spec.validate();
    h = spec.da();
    const auto n = static_cast<std::size_t>(spec.N) + 1;
    age.resize(n);
    beta1.resize(n);
    beta2.resize(n);
    eta1.resize(n);
    eta2.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        age[j] = j == n - 1 ? spec.m : static_cast<double>(j) * h;
        beta1[j] = spec.beta1(age[j]);
        beta2[j] = spec.beta2(age[j]);
        eta1[j] = spec.eta1(age[j]);
        eta2[j] = spec.eta2(age[j]);
    }
    cum_eta1 = num::cumulative_trapezoid(eta1, h);
    cum_eta2 = num::cumulative_trapezoid(eta2, h);
    eta1_mid.resize(n - 1);
    eta2_mid.resize(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double mid = 0.5 * (age[j] + age[j + 1]);
        eta1_mid[j] = spec.eta1(mid);
        eta2_mid[j] = spec.eta2(mid);
    }
}

std::vector<double> sample_profile(const AgeSpec& spec, const std::function<double(double)>& f) {
    const AgeGrid grid(spec);
    std::vector<double> out(grid.age.size());
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = f(grid.age[j]);
    return out;
}

std::string to_string(SteadyStateKind kind) {
    switch (kind) {
        case SteadyStateKind::trivial: return "trivial";
        case SteadyStateKind::disease_free: return "disease_free";
        case SteadyStateKind::positive: return "positive";
    }
    return "unknown";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::stable: return "stable";
        case Verdict::unstable: return "unstable";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

SteadyStateProfile trivial_steady_state(const AgeSpec& spec) {
    spec.validate();
    SteadyStateProfile ss;
    ss.kind = SteadyStateKind::trivial;
    ss.i_profile.assign(static_cast<std::size_t>(spec.N) + 1, 0.0);
    ss.u_profile = ss.i_profile;
    return ss;
}

SteadyStateProfile solve_disease_free(const AgeSpec& spec) {
    require_analysis_grid(spec);
    const AgeGrid g(spec);
    const double total_fertility = num::trapezoid(g.beta2, g.h);
    if (total_fertility <= 1.0)
        throw NonexistenceError("disease-free state needs ∫beta2 > 1");

    const auto renewal = [&](double U) {
        return num::trapezoid(weighted_exp(g.beta2, g.cum_eta2, U), g.h) - 1.0;
    };
    const double hi = num::expand_bracket(renewal, 0.0, 1.0);
    const double U = num::bisect(renewal, 0.0, hi).root;

    SteadyStateProfile ss;
    ss.kind = SteadyStateKind::disease_free;
    ss.U_star = U;
    ss.c1 = U;
    const auto shape = exp_profile(g.cum_eta2, U);
    ss.u0 = U / num::trapezoid(shape, g.h);
    ss.u_profile.resize(shape.size());
    for (std::size_t j = 0; j < shape.size(); ++j) ss.u_profile[j] = ss.u0 * shape[j];
    ss.i_profile.assign(shape.size(), 0.0);
    return ss;
}

std::vector<SteadyStateProfile> solve_positive_steady_state(const AgeSpec& spec) {
    require_analysis_grid(spec);
    if (!(spec.tau > 0.0)) throw DomainError("positive steady states need tau > 0");
    const AgeGrid g(spec);
    const double tau = spec.tau;
    if (tau * num::trapezoid(g.beta1, g.h) <= 1.0)
        throw NonexistenceError("positive steady state needs tau ∫beta1 > 1");

    const auto renewal = [&](double c) {
        return tau * num::trapezoid(weighted_exp(g.beta1, g.cum_eta1, c), g.h) - 1.0;
    };
    const double hi = num::expand_bracket(renewal, 0.0, 1.0);
    const double c1 = num::bisect(renewal, 0.0, hi).root;

    const auto shape1 = exp_profile(g.cum_eta1, c1);
    const auto shape2 = exp_profile(g.cum_eta2, c1);
    const double A1 = num::trapezoid(shape1, g.h);
    const double A2 = num::trapezoid(shape2, g.h);
    const double c2 = num::trapezoid(weighted_exp(g.beta2, g.cum_eta2, c1), g.h);
    const double c3 = spec.q * c2 / c1;
    const double c4 = (1.0 / tau - 1.0) * A2 / A1;

    const auto roots =
        num::real_quadratic_roots(c3, 1.0 - c2 - c1 * c3 + c4, c1 * c2 - c1);

    std::vector<SteadyStateProfile> out;
    const double snap = 1e-12 * c1;
    for (double I : roots) {
        if (std::abs(I) <= snap) I = 0.0;
        if (std::abs(c1 - I) <= snap) I = c1;
        if (I < 0.0 || I > c1) continue;
        SteadyStateProfile ss;
        ss.kind = SteadyStateKind::positive;
        ss.I_star = I;
        ss.U_star = c1 - I;
        ss.c1 = c1;
        ss.c2 = c2;
        ss.c3 = c3;
        ss.c4 = c4;
        ss.i0 = I / A1;
        ss.u0 = ss.U_star / A2;
        ss.i_profile.resize(shape1.size());
        ss.u_profile.resize(shape2.size());
        for (std::size_t j = 0; j < shape1.size(); ++j) {
            ss.i_profile[j] = ss.i0 * shape1[j];
            ss.u_profile[j] = ss.u0 * shape2[j];
        }
        out.push_back(std::move(ss));
    }
    std::sort(out.begin(), out.end(),
              [](const SteadyStateProfile& a, const SteadyStateProfile& b) { return a.I_star < b.I_star; });
    return out;
}

double SteadyStateResiduals::max() const {
    return std::max({infected_renewal, uninfected_renewal, infected_profile, uninfected_profile, totals});
}

SteadyStateResiduals steady_state_residuals(const SteadyStateProfile& ss, const AgeSpec& spec) {
    const AgeGrid g(spec);
    if (ss.i_profile.size() != g.age.size() || ss.u_profile.size() != g.age.size())
        throw DomainError("profile size does not match the age grid");
    const double c = ss.I_star + ss.U_star;
    const double ci = c > 0.0 ? ss.I_star / c : 0.0;

    SteadyStateResiduals r;
    const double B1 = num::trapezoid(product(g.beta1, ss.i_profile), g.h);
    const double B2 = num::trapezoid(product(g.beta2, ss.u_profile), g.h);
    r.infected_renewal = std::abs(ss.i_profile[0] - spec.tau * B1);
    r.uninfected_renewal =
        std::abs(ss.u_profile[0] - ((1.0 - spec.tau) * B1 + (1.0 - spec.q * ci) * B2));
    for (std::size_t j = 0; j < g.age.size(); ++j) {
        r.infected_profile = std::max(
            r.infected_profile, std::abs(ss.i_profile[j] - ss.i_profile[0] * std::exp(-c * g.cum_eta1[j])));
        r.uninfected_profile = std::max(
            r.uninfected_profile, std::abs(ss.u_profile[j] - ss.u_profile[0] * std::exp(-c * g.cum_eta2[j])));
    }
    r.totals = std::abs(ss.I_star - num::trapezoid(ss.i_profile, g.h)) +
               std::abs(ss.U_star - num::trapezoid(ss.u_profile, g.h));
    return r;
}

CharacteristicCoefficients characteristic_coefficients(double lambda, const SteadyStateProfile& ss,
                                                       const AgeSpec& spec) {
    const AgeGrid g(spec);
    if (ss.i_profile.size() != g.age.size() || ss.u_profile.size() != g.age.size())
        throw DomainError("profile size does not match the age grid");
    if (!std::isfinite(lambda)) throw DomainError("lambda must be finite");
    const double c = ss.I_star + ss.U_star;
    const double q = spec.q;

    const std::size_t n = g.age.size();
    std::vector<double> f1(n), f2(n), g1(n), g2(n);
    for (std::size_t j = 0; j < n; ++j) {
        f1[j] = std::exp(-lambda * g.age[j] - c * g.cum_eta1[j]);
        f2[j] = std::exp(-lambda * g.age[j] - c * g.cum_eta2[j]);
        g1[j] = g.eta1[j] * ss.i_profile[j];
        g2[j] = g.eta2[j] * ss.u_profile[j];
    }
    const auto F1J1 = scaled_running_integral(f1, g1, lambda * g.h, c, g.cum_eta1, g.h);
    const auto F2J2 = scaled_running_integral(f2, g2, lambda * g.h, c, g.cum_eta2, g.h);

    CharacteristicCoefficients k;
    k.a1 = num::trapezoid(f1, g.h);
    k.a2 = num::trapezoid(F1J1, g.h);
    k.a3 = num::trapezoid(f2, g.h);
    k.a4 = num::trapezoid(F2J2, g.h);
    k.a5 = num::trapezoid(product(g.beta1, f1), g.h);
    k.a6 = num::trapezoid(product(g.beta1, F1J1), g.h);
    k.a7 = num::trapezoid(product(g.beta2, f2), g.h);
    k.a9 = num::trapezoid(product(g.beta2, F2J2), g.h);
    k.beta2_u = num::trapezoid(product(g.beta2, ss.u_profile), g.h);

    const double ci = c > 0.0 ? q * ss.I_star / c : 0.0;
    const double ci_I = c > 0.0 ? q * ss.U_star / (c * c) : 0.0;   // ∂(qI/P)/∂I
    const double ci_U = c > 0.0 ? -q * ss.I_star / (c * c) : 0.0;  // ∂(qI/P)/∂U
    k.a8 = (spec.tau - 1.0) * k.a6 + (ci - 1.0) * k.a9 - ci_I * k.beta2_u;
    k.a10 = (spec.tau - 1.0) * k.a6 + (ci - 1.0) * k.a9 - ci_U * k.beta2_u;

    for (double v : {k.a1, k.a2, k.a3, k.a4, k.a5, k.a6, k.a7, k.a8, k.a9, k.a10}) {
        if (!std::isfinite(v)) throw RangeError("characteristic integrals overflow at this lambda");
    }
    return k;
}

num::Matrix characteristic_matrix(const CharacteristicCoefficients& k, const SteadyStateProfile& ss,
                                  const AgeSpec& spec) {
    const double c = ss.I_star + ss.U_star;
    const double ci = c > 0.0 ? spec.q * ss.I_star / c : 0.0;
    const double tau = spec.tau;
    return num::Matrix{
        {tau * k.a5 - 1.0, 0.0, -tau * k.a6, -tau * k.a6},
        {(1.0 - tau) * k.a5, k.a7 - ci * k.a7 - 1.0, k.a8, k.a10},
        {k.a1, 0.0, -k.a2 - 1.0, -k.a2},
        {0.0, k.a3, -k.a4, -k.a4 - 1.0},
    };
}

double evaluate_K(double lambda, const SteadyStateProfile& ss, const AgeSpec& spec) {
    const auto k = characteristic_coefficients(lambda, ss, spec);
    const double det = num::determinant(characteristic_matrix(k, ss, spec));
    if (!std::isfinite(det)) throw RangeError("characteristic determinant is not finite");
    return det;
}

StabilityVerdict instability_check(const SteadyStateProfile& ss, const AgeSpec& spec,
                                   double lambda_max) {
    if (!(lambda_max > 0.0) || !std::isfinite(lambda_max))
        throw DomainError("lambda_max must be positive");
    require_analysis_grid(spec);
    StabilityVerdict v;
    v.criterion = "characteristic_K0";
    const auto K = [&](double lambda) { return evaluate_K(lambda, ss, spec); };
    const double K0 = K(0.0);
    if (K0 >= -kKZeroTol) {
        v.verdict = Verdict::inconclusive;
        v.witness = K0;
        return v;
    }

    double lo_edge = 0.0;
    double hi_edge = lambda_max;
    for (int widen = 0; widen <= kMaxWidenings; ++widen) {
        const double step = (hi_edge - lo_edge) / kScanSteps;
        double prev = lo_edge;
        double Kprev = widen == 0 ? K0 : K(lo_edge);
        for (int s = 1; s <= kScanSteps; ++s) {
            const double lam = s == kScanSteps ? hi_edge : lo_edge + s * step;
            const double Klam = K(lam);
            if (Klam >= 0.0) {
                double root = lam;
                if (Klam != 0.0) {
                    root = num::bisect(K, prev, lam, {0.0, 200}).root;
                }
                if (!(std::abs(K(root)) < kRootTol))
                    throw InternalConsistencyError("K root bisection missed the tolerance");
                v.verdict = Verdict::unstable;
                v.witness = root;
                return v;
            }
            prev = lam;
            Kprev = Klam;
        }
        (void)Kprev;
        lo_edge = hi_edge;
        hi_edge *= 2.0;
    }
    throw InternalConsistencyError("K(0) < 0 but no positive real root was located");
}

StabilityVerdict trivial_stability(const AgeSpec& spec) {
    const AgeGrid g(spec);
    const double infected = spec.tau * num::trapezoid(g.beta1, g.h);
    const double uninfected = num::trapezoid(g.beta2, g.h);
    StabilityVerdict v;
    v.criterion = "trivial_integrals";
    if (infected > 1.0 + kEqualityTol || uninfected > 1.0 + kEqualityTol) {
        v.verdict = Verdict::unstable;
        v.witness = infected > 1.0 + kEqualityTol ? infected : uninfected;
    } else if (infected < 1.0 - kEqualityTol && uninfected < 1.0 - kEqualityTol) {
        v.verdict = Verdict::stable;
        v.witness = std::max(infected, uninfected);
    } else {
        v.verdict = Verdict::inconclusive;
        v.witness = std::max(infected, uninfected);
    }
    return v;
}

StabilityVerdict disease_free_instability(const AgeSpec& spec) {
    const auto ss = solve_disease_free(spec);
    const AgeGrid g(spec);
    const double value =
        spec.tau * num::trapezoid(weighted_exp(g.beta1, g.cum_eta1, ss.U_star), g.h);
    StabilityVerdict v;
    v.criterion = "disease_free_invasion";
    v.witness = value;
    v.verdict = value > 1.0 + kEqualityTol ? Verdict::unstable : Verdict::inconclusive;
    return v;
}

NetReproduction net_reproduction(double I, double U, const AgeSpec& spec) {
    const AgeGrid g(spec);
    const double c = I + U;
    const double ci = c > 0.0 ? spec.q * I / c : 0.0;
    NetReproduction r;
    r.R1 = num::trapezoid(weighted_exp(g.beta1, g.cum_eta1, c), g.h);
    r.R2 = (1.0 - ci) * num::trapezoid(weighted_exp(g.beta2, g.cum_eta2, c), g.h);
    return r;
}

ReproductionDerivatives reproduction_derivatives(const SteadyStateProfile& ss, const AgeSpec& spec) {
    const AgeGrid g(spec);
    const double I = ss.I_star;
    const double U = ss.U_star;
    const double c = I + U;
    if (!(c > 0.0)) throw DomainError("reproduction derivatives need I + U > 0");
    const double q = spec.q;

    const std::size_t n = g.age.size();
    std::vector<double> d1(n), d2(n);
    for (std::size_t j = 0; j < n; ++j) {
        d1[j] = g.beta1[j] * g.cum_eta1[j] * std::exp(-c * g.cum_eta1[j]);
        d2[j] = g.beta2[j] * g.cum_eta2[j] * std::exp(-c * g.cum_eta2[j]);
    }
    const double dR1 = -num::trapezoid(d1, g.h);
    const double moment = num::trapezoid(d2, g.h);
    const double B2 = num::trapezoid(weighted_exp(g.beta2, g.cum_eta2, c), g.h);
    const double survive = 1.0 - q * I / c;

    ReproductionDerivatives r;
    r.R1_I = dR1;
    r.R1_U = dR1;
    r.R2_I = -survive * moment - B2 * q * U / (c * c);
    r.R2_U = -survive * moment + B2 * q * I / (c * c);
    return r;
}

StabilityVerdict complete_transmission_instability(const SteadyStateProfile& ss, const AgeSpec& spec) {
    require_analysis_grid(spec);
    if (spec.tau != 1.0) throw DomainError("complete transmission check requires tau = 1");
    if (!(ss.I_star > 0.0 && ss.U_star > 0.0))
        throw DomainError("complete transmission check requires a strictly positive state");
    const auto d = reproduction_derivatives(ss, spec);
    const double value = d.condition();
    StabilityVerdict v;
    v.criterion = "complete_transmission_reproduction";
    v.witness = value;
    if (spec.q == 0.0) {
        v.verdict = Verdict::inconclusive;
        return v;
    }
    if (value < 0.0) {
        v.verdict = Verdict::unstable;
        return v;
    }
    if (!identically_zero(spec.beta1) && !identically_zero(spec.beta2) && !identically_zero(spec.eta1))
        throw InternalConsistencyError("reproduction determinant is non-negative at a positive state");
    v.verdict = Verdict::inconclusive;
    return v;
}

PdeSeries simulate_pde(const AgeSpec& spec, std::vector<double> i, std::vector<double> u, double T,
                       int snapshot_every) {
    const AgeGrid g(spec);
    const std::size_t n = g.age.size();
    if (i.size() != n || u.size() != n) throw DomainError("initial profiles must have N + 1 samples");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(i[j] >= 0.0) || !(u[j] >= 0.0) || !std::isfinite(i[j]) || !std::isfinite(u[j]))
            throw DomainError("initial profiles must be finite and non-negative");
    }
    if (!(T >= 0.0) || !std::isfinite(T)) throw DomainError("T must be finite and non-negative");
    if (snapshot_every < 0) throw DomainError("snapshot_every must be non-negative");

    const double h = g.h;
    const auto steps = static_cast<long long>(std::llround(T / h));
    const double tau = spec.tau;
    const double q = spec.q;
    const double infected_self = 1.0 - tau * g.beta1[0] * 0.5 * h;

    PdeSeries out;
    const auto record = [&](long long k) {
        out.times.push_back(static_cast<double>(k) * h);
        out.I.push_back(num::trapezoid(i, h));
        out.U.push_back(num::trapezoid(u, h));
        if (snapshot_every > 0 && k % snapshot_every == 0) {
            out.snapshot_times.push_back(out.times.back());
            out.i_snapshots.push_back(i);
            out.u_snapshots.push_back(u);
        }
    };
    record(0);

    for (long long k = 1; k <= steps; ++k) {
        const double I = out.I.back();
        const double P = I + out.U.back();
        for (std::size_t j = n - 1; j >= 1; --j) {
            i[j] = i[j - 1] * std::exp(-g.eta1_mid[j - 1] * P * h);
            u[j] = u[j - 1] * std::exp(-g.eta2_mid[j - 1] * P * h);
        }
        // Trapezoid boundary sums over the shifted nodes 1..N; the age-0
        // node enters implicitly through its half weight.
        double S1 = 0.0;
        double S2 = 0.0;
        for (std::size_t j = 1; j < n; ++j) {
            const double w = j == n - 1 ? 0.5 * h : h;
            S1 += w * g.beta1[j] * i[j];
            S2 += w * g.beta2[j] * u[j];
        }
        const double phi = P > 0.0 ? 1.0 - q * I / P : 1.0;
        const double uninfected_self = 1.0 - phi * g.beta2[0] * 0.5 * h;
        if (infected_self <= 0.0 || uninfected_self <= 0.0)
            throw DomainError("age grid too coarse for the renewal condition");
        i[0] = tau * S1 / infected_self;
        const double B1 = S1 + 0.5 * h * g.beta1[0] * i[0];
        u[0] = ((1.0 - tau) * B1 + phi * S2) / uninfected_self;
        record(k);
    }
    out.i_final = std::move(i);
    out.u_final = std::move(u);
    return out;
}

}  // namespace wolbdyn::age
