#include "wolbdyn/models.hpp"

#include "wolbdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace wolbdyn {

namespace {

void require_unit(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0))
        throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(v));
}

void require_cost(double v, const char* name) {
    if (!(v >= 1.0) || !std::isfinite(v))
        throw DomainError(std::string(name) + " must be >= 1, got " + std::to_string(v));
}

}  // namespace

void SingleStrainParams::validate() const {
    require_unit(tau, "tau");
    require_unit(q, "q");
    require_cost(eta, "eta");
    require_unit(mu, "mu");
}

SingleStrainParams SingleStrainParams::from_xi(double xi, double tau, double q) {
    if (!(xi > 0.0 && xi <= 1.0)) throw DomainError("xi must lie in (0,1]");
    SingleStrainParams p;
    p.tau = tau;
    p.q = q;
    p.eta = 1.0 / xi;
    p.validate();
    return p;
}

SingleStrainParams SingleStrainParams::fecundity(double mu, double tau, double q) {
    SingleStrainParams p;
    p.tau = tau;
    p.q = q;
    p.eta = 1.0;
    p.cost_mode = CostMode::fecundity;
    p.mu = mu;
    p.validate();
    return p;
}

void MultiStrainParams::validate() const {
    require_unit(tau_A, "tau_A");
    require_unit(tau_B, "tau_B");
    require_cost(eta_A, "eta_A");
    require_cost(eta_B, "eta_B");
    require_unit(q0A, "q0A");
    require_unit(q0B, "q0B");
    require_unit(q0AB, "q0AB");
    require_unit(qAB, "qAB");
    require_unit(qAAB, "qAAB");
    require_unit(qBA, "qBA");
    require_unit(qBAB, "qBAB");
}

MultiStrainParams simplified_compatible(double tau, double eta, double q0A, double q0B) {
    MultiStrainParams p;
    p.tau_A = p.tau_B = tau;
    p.eta_A = p.eta_B = eta;
    p.q0A = q0A;
    p.q0B = q0B;
    p.validate();
    return p;
}

MultiStrainParams mutually_incompatible(double tau, double eta, double q0, double qAB,
                                        double qBA) {
    MultiStrainParams p;
    p.tau_A = p.tau_B = tau;
    p.eta_A = p.eta_B = eta;
    p.q0A = p.q0B = q0;
    p.qAB = qAB;
    p.qBA = qBA;
    p.validate();
    return p;
}

MultiStrainParams double_infection(double tau_A, double tau_B, double eta_A, double eta_B,
                                   double q0A, double q0B) {
    MultiStrainParams p;
    p.tau_A = tau_A;
    p.tau_B = tau_B;
    p.eta_A = eta_A;
    p.eta_B = eta_B;
    p.q0A = q0A;
    p.q0B = q0B;
    p.qAB = p.qAAB = q0B;
    p.qBA = p.qBAB = q0A;
    p = with_product_escape(p);
    p.validate();
    return p;
}

MultiStrainParams with_product_escape(MultiStrainParams p) {
    p.q0AB = 1.0 - (1.0 - p.q0A) * (1.0 - p.q0B);
    return p;
}

bool is_simplified_compatible(const MultiStrainParams& p) {
    return p.qAB == 0.0 && p.qBA == 0.0 && p.qAAB == 0.0 && p.qBAB == 0.0 &&
           p.tau_A == p.tau_B && p.eta_A == p.eta_B;
}

bool is_mutually_incompatible(const MultiStrainParams& p) {
    return p.tau_A == p.tau_B && p.eta_A == p.eta_B && p.q0A == p.q0B;
}

State2 rhs_single_unchecked(State2 s, const SingleStrainParams& params) {
    const double p = s.i + s.u;
    if (p == 0.0) return {0.0, 0.0};
    const double ci = 1.0 - params.q * s.i / p - p;
    if (params.cost_mode == CostMode::fecundity) {
        return {(params.mu * params.tau - p) * s.i,
                params.mu * (1.0 - params.tau) * s.i + ci * s.u};
    }
    return {(params.tau - params.eta * p) * s.i, (1.0 - params.tau) * s.i + ci * s.u};
}

State2 rhs_single(State2 s, const SingleStrainParams& params) {
    if (!(s.i >= 0.0 && s.u >= 0.0)) throw DomainError("rhs_single: negative state component");
    return rhs_single_unchecked(s, params);
}

State4 rhs_multistrain_unchecked(State4 s, const MultiStrainParams& k) {
    const double p = s.total();
    if (p == 0.0) throw DomainError("rhs_multistrain: total population is zero");
    const double gA = 1.0 - k.qAB * s.i_B / p - k.qAAB * s.i_AB / p;
    const double gB = 1.0 - k.qBA * s.i_A / p - k.qBAB * s.i_AB / p;
    const double g0 = 1.0 - k.q0A * s.i_A / p - k.q0B * s.i_B / p - k.q0AB * s.i_AB / p;
    const double tA = k.tau_A;
    const double tB = k.tau_B;
    State4 d;
    d.i_AB = tA * tB * s.i_AB - k.eta_AB() * p * s.i_AB;
    d.i_A = tA * (1.0 - tB) * s.i_AB + tA * gA * s.i_A - k.eta_A * p * s.i_A;
    d.i_B = (1.0 - tA) * tB * s.i_AB + tB * gB * s.i_B - k.eta_B * p * s.i_B;
    d.u = (1.0 - tA) * (1.0 - tB) * s.i_AB + (1.0 - tA) * gA * s.i_A + (1.0 - tB) * gB * s.i_B +
          g0 * s.u - p * s.u;
    return d;
}

State4 rhs_multistrain(State4 s, const MultiStrainParams& params) {
    if (!(s.i_AB >= 0.0 && s.i_A >= 0.0 && s.i_B >= 0.0 && s.u >= 0.0))
        throw DomainError("rhs_multistrain: negative state component");
    return rhs_multistrain_unchecked(s, params);
}

double ratio_drift(std::span<const State4> trajectory) {
    if (trajectory.empty()) throw DomainError("ratio_drift: empty trajectory");
    auto ratio = [](const State4& s) {
        if (s.i_AB != 0.0) throw DomainError("ratio_drift: trajectory leaves i_AB == 0");
        const double infected = s.i_A + s.i_B;
        if (!(infected > 0.0)) throw DomainError("ratio_drift: i_A + i_B must stay positive");
        return s.i_A / infected;
    };
    const double r0 = ratio(trajectory.front());
    double drift = 0.0;
    for (const auto& s : trajectory) drift = std::max(drift, std::abs(ratio(s) - r0));
    return drift;
}

}  // namespace wolbdyn
