#pragma once

// Age-structured infection model on a ∈ [0, m]: infected and uninfected
// densities transported along characteristics with density-dependent
// mortality and renewal (birth) boundary conditions carrying vertical
// transmission and cytoplasmic incompatibility.
//
// Everything is discretised on the uniform grid a_j = j m / N, j = 0..N.
// Age integrals use the composite trapezoid rule; nested integrals use the
// running trapezoid integral.

#include "wolbdyn/numerics.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace wolbdyn::age {

// Piecewise-linear, non-negative rate table; constant beyond the end knots.
class RateFunction {
public:
    RateFunction() : knots_{0.0}, values_{0.0} {}
    RateFunction(std::vector<double> knots, std::vector<double> values);

    static RateFunction constant(double value);

    double operator()(double a) const;
    const std::vector<double>& knots() const { return knots_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> knots_;
    std::vector<double> values_;
};

struct AgeSpec {
    double m = 1.0;
    int N = 400;
    RateFunction beta1;  // infected fertility
    RateFunction beta2;  // uninfected fertility
    RateFunction eta1;   // infected mortality weight
    RateFunction eta2;   // uninfected mortality weight
    double tau = 1.0;
    double q = 0.0;

    double da() const { return m / N; }
    // Throws DomainError on m <= 0, N < 1, knots outside [0, m] or tau/q
    // outside [0, 1].
    void validate() const;
};

// Rates sampled on the grid plus the running integrals of the mortality
// weights, shared by every operation below.
struct AgeGrid {
    explicit AgeGrid(const AgeSpec& spec);

    double h = 0.0;
    std::vector<double> age;
    std::vector<double> beta1, beta2, eta1, eta2;
    std::vector<double> cum_eta1, cum_eta2;  // ∫_0^a eta by running trapezoid
    std::vector<double> eta1_mid, eta2_mid;  // cell-midpoint rates, size N
};

std::vector<double> sample_profile(const AgeSpec& spec, const std::function<double(double)>& f);

enum class SteadyStateKind { trivial, disease_free, positive };

std::string to_string(SteadyStateKind kind);

struct SteadyStateProfile {
    SteadyStateKind kind = SteadyStateKind::trivial;
    std::vector<double> i_profile;
    std::vector<double> u_profile;
    double I_star = 0.0;
    double U_star = 0.0;
    double c1 = 0.0;  // I* + U*
    double c2 = 0.0;
    double c3 = 0.0;
    double c4 = 0.0;
    double i0 = 0.0;
    double u0 = 0.0;
};

SteadyStateProfile trivial_steady_state(const AgeSpec& spec);

// Unique disease-free state. Throws NonexistenceError when ∫beta2 <= 1 and
// DivergenceError when no finite U* solves the renewal equation.
SteadyStateProfile solve_disease_free(const AgeSpec& spec);

// Every steady state with I*, U* >= 0 on the infected branch, ascending in
// I*. Throws NonexistenceError when tau ∫beta1 <= 1. The list is empty when
// the quadratic for I* has no admissible real root.
std::vector<SteadyStateProfile> solve_positive_steady_state(const AgeSpec& spec);

struct SteadyStateResiduals {
    double infected_renewal = 0.0;    // |i*(0) - tau ∫ beta1 i*|
    double uninfected_renewal = 0.0;  // |u*(0) - boundary integral|
    double infected_profile = 0.0;    // max_a |i*(a) - i*(0) exp(-c ∫eta1)|
    double uninfected_profile = 0.0;
    double totals = 0.0;  // |I* - ∫i*| + |U* - ∫u*|

    double max() const;
};

SteadyStateResiduals steady_state_residuals(const SteadyStateProfile& ss, const AgeSpec& spec);

// Integrals entering the 4x4 characteristic matrix at a real lambda.
struct CharacteristicCoefficients {
    double a1 = 0, a2 = 0, a3 = 0, a4 = 0, a5 = 0, a6 = 0, a7 = 0, a8 = 0, a9 = 0, a10 = 0;
    double beta2_u = 0;  // ∫ beta2 u*
};

CharacteristicCoefficients characteristic_coefficients(double lambda, const SteadyStateProfile& ss,
                                                       const AgeSpec& spec);

// Coefficient matrix of the homogeneous system for (v(0), w(0), V, W).
num::Matrix characteristic_matrix(const CharacteristicCoefficients& k, const SteadyStateProfile& ss,
                                  const AgeSpec& spec);

// K(lambda) = det of the characteristic matrix. Throws RangeError when an
// intermediate overflows (lambda far below -min(eta) (I* + U*)).
double evaluate_K(double lambda, const SteadyStateProfile& ss, const AgeSpec& spec);

enum class Verdict { stable, unstable, inconclusive };

std::string to_string(Verdict v);

struct StabilityVerdict {
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> witness;
    std::string criterion;
};

// K(0) < 0 implies a positive real eigenvalue. The located root is the
// witness; the scan covers (0, lambda_max] and widens geometrically if the
// sign change lies further out.
StabilityVerdict instability_check(const SteadyStateProfile& ss, const AgeSpec& spec,
                                   double lambda_max);

StabilityVerdict trivial_stability(const AgeSpec& spec);

StabilityVerdict disease_free_instability(const AgeSpec& spec);

// Net reproduction numbers of the infected and uninfected classes at totals
// (I, U) for tau = 1.
struct NetReproduction {
    double R1 = 0.0;
    double R2 = 0.0;
};

NetReproduction net_reproduction(double I, double U, const AgeSpec& spec);

struct ReproductionDerivatives {
    double R1_I = 0.0;
    double R1_U = 0.0;
    double R2_I = 0.0;
    double R2_U = 0.0;

    double condition() const { return R1_I * R2_U - R1_U * R2_I; }
};

ReproductionDerivatives reproduction_derivatives(const SteadyStateProfile& ss, const AgeSpec& spec);

// Complete transmission (tau = 1): a negative Jacobian determinant of the
// net reproduction map means instability. Throws DomainError for tau != 1
// or a state that is not strictly positive, and InternalConsistencyError if
// the determinant is non-negative although q != 0 and beta1, beta2, eta1
// are not identically zero.
StabilityVerdict complete_transmission_instability(const SteadyStateProfile& ss, const AgeSpec& spec);

struct PdeSeries {
    std::vector<double> times;
    std::vector<double> I;
    std::vector<double> U;
    std::vector<double> snapshot_times;
    std::vector<std::vector<double>> i_snapshots;
    std::vector<std::vector<double>> u_snapshots;
    std::vector<double> i_final;
    std::vector<double> u_final;
};

// Characteristic stepping with dt = da up to T (rounded to whole steps).
// Initial profiles are grid samples (size N + 1). Snapshots of the profiles
// are stored every snapshot_every steps (0 = none).
PdeSeries simulate_pde(const AgeSpec& spec, std::vector<double> i_init, std::vector<double> u_init,
                       double T, int snapshot_every = 0);

}  // namespace wolbdyn::age
