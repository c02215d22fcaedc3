#pragma once

// Scaled (t -> b t) vector fields of the unstructured Wolbachia models:
// the single-strain system with mortality or fecundity cost, and the
// two-strain system with a doubly infected class. All functions are pure.

#include <span>

namespace wolbdyn {

enum class CostMode { mortality, fecundity };

struct SingleStrainParams {
    double tau = 1.0;  // vertical transmission efficacy
    double q = 0.0;    // CI level
    double eta = 1.0;  // scaled infected mortality (d + D) / d
    CostMode cost_mode = CostMode::mortality;
    double mu = 1.0;  // reduced fecundity, fecundity mode only

    // Fitness parameter xi = 1 / eta.
    double xi() const { return 1.0 / eta; }

    // Throws DomainError unless every field lies in its range.
    void validate() const;

    static SingleStrainParams from_xi(double xi, double tau, double q);
    static SingleStrainParams fecundity(double mu, double tau, double q);
};

struct State2 {
    double i = 0.0;
    double u = 0.0;
};

// Seven incompatibility levels keyed as q<female><male>: e.g. qAB is the
// level for an A-infected female crossed with a B-carrying male.
struct MultiStrainParams {
    double tau_A = 1.0;
    double tau_B = 1.0;
    double eta_A = 1.0;
    double eta_B = 1.0;
    double q0A = 0.0;
    double q0B = 0.0;
    double q0AB = 0.0;
    double qAB = 0.0;
    double qAAB = 0.0;
    double qBA = 0.0;
    double qBAB = 0.0;

    // Mortalities of the two infections add up.
    double eta_AB() const { return eta_A + eta_B - 1.0; }

    void validate() const;
};

struct State4 {
    double i_AB = 0.0;
    double i_A = 0.0;
    double i_B = 0.0;
    double u = 0.0;

    double total() const { return i_AB + i_A + i_B + u; }
};

// Preset: no double infections, mutually compatible strains with equal
// transmission and cost; only the CI levels against uninfected differ.
MultiStrainParams simplified_compatible(double tau, double eta, double q0A, double q0B);

// Preset: singly infected strains mutually incompatible, one common level q0
// against uninfected females.
MultiStrainParams mutually_incompatible(double tau, double eta, double q0, double qAB,
                                        double qBA);

// Preset: a missing strain in the male acts the same regardless of other
// infections in the female (qAB = qAAB = q0B, qBA = qBAB = q0A), and the
// escape probabilities multiply for doubly infected males.
MultiStrainParams double_infection(double tau_A, double tau_B, double eta_A, double eta_B,
                                   double q0A, double q0B);

// Sets q0AB from 1 - q0AB = (1 - q0A)(1 - q0B).
MultiStrainParams with_product_escape(MultiStrainParams p);

bool is_simplified_compatible(const MultiStrainParams& p);
bool is_mutually_incompatible(const MultiStrainParams& p);

// Right-hand side of the single-strain model. (0,0) maps to (0,0).
// Throws DomainError for negative components.
State2 rhs_single(State2 s, const SingleStrainParams& params);

// Same formula without the sign check; used to evaluate residuals at
// equilibria that lie outside the biological domain.
State2 rhs_single_unchecked(State2 s, const SingleStrainParams& params);

// Right-hand side of the two-strain model. Throws DomainError for negative
// components or a zero total population.
State4 rhs_multistrain(State4 s, const MultiStrainParams& params);
State4 rhs_multistrain_unchecked(State4 s, const MultiStrainParams& params);

// Largest deviation of i_A / (i_A + i_B) from its initial value along a
// trajectory with i_AB == 0. Throws DomainError for an empty trajectory, a
// state with i_AB != 0, or i_A + i_B == 0.
double ratio_drift(std::span<const State4> trajectory);

}  // namespace wolbdyn
