#pragma once

// Equilibria of the unstructured models and their linear stability:
// closed-form roots of the single-strain system, parameter-region labels,
// the continuum of two-strain equilibria, the persistence threshold in tau,
// saddle separatrices, and Newton refinement for two-strain equilibria.

#include "wolbdyn/models.hpp"
#include "wolbdyn/numerics.hpp"

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace wolbdyn {

// |Re(lambda)| at or below this counts as a zero real part.
inline constexpr double kHyperbolicityTol = 1e-9;

enum class StabilityClass { stable_node_or_focus, saddle, unstable, nonhyperbolic, outside_domain };

std::string to_string(StabilityClass c);

struct EquilibriumReport {
    std::string name;
    std::variant<State2, State4> point;
    num::Matrix jacobian;  // 0x0 where the field is not differentiable (origin)
    std::vector<std::complex<double>> eigenvalues;
    StabilityClass classification = StabilityClass::nonhyperbolic;
};

StabilityClass classify(std::span<const std::complex<double>> eigenvalues, bool in_domain,
                        double tol = kHyperbolicityTol);

// Analytic Jacobian of rhs_single (either cost mode). Throws DomainError
// when i + u == 0.
num::Matrix jacobian_single(State2 s, const SingleStrainParams& params);

// Analytic Jacobian of rhs_multistrain, variables ordered (i_AB, i_A, i_B, u).
num::Matrix jacobian_multistrain(State4 s, const MultiStrainParams& params);

EquilibriumReport analyze_point(State2 s, const SingleStrainParams& params, std::string name);
EquilibriumReport analyze_point(State4 s, const MultiStrainParams& params, std::string name);

// Origin, disease-free point (0,1) and, where real, the two roots of the
// quadratic for i with u = tau * xi - i. Mortality cost mode only. Points
// with a negative coordinate are kept and labelled outside_domain.
std::vector<EquilibriumReport> single_equilibria(const SingleStrainParams& params);

// Fecundity-cost variant. Interior equilibria are located numerically on
// the segment i + u = mu * tau, u >= 0 (sign-change scan plus bisection).
std::vector<EquilibriumReport> fecundity_equilibria(const SingleStrainParams& params,
                                                    int scan_intervals = 2000);

enum class Region { A, B_only, C };

std::string to_string(Region r);

// Left-hand side of the existence condition for the interior roots.
double existence_discriminant(double xi, double tau, double q);

Region region_classify(double xi, double tau, double q);

// Interior root with the larger i (i2, u2 = tau xi - i2); empty when the
// quadratic has no real root.
std::optional<State2> upper_interior_root(double xi, double tau, double q);

struct ContinuumPoint {
    double i_A = 0.0;
    double i_B = 0.0;
    bool nonnegative = false;
};

// Explicit family of equilibria (i_A(u), i_B(u), u) of the simplified
// compatible system. Throws DomainError for u outside (0, tau*xi) or a
// non-simplified preset, SingularFormulaError when q0A == q0B.
ContinuumPoint continuum_equilibria(double u, const MultiStrainParams& params);

// Smallest tau for which some (xi, q) in (0,1]^2 lies in region C, using a
// (xi, q) grid of the given resolution and bisection on tau.
double tau_persistence_threshold(int grid_resolution);

// Stable manifold of a saddle, traced by integrating the time-reversed field
// from point +- eps * v_s (v_s the stable eigenvector). Each branch stops at
// arc_length or where it leaves the non-negative quadrant. The polyline runs
// from the end of one branch through the saddle to the end of the other.
std::vector<State2> saddle_separatrix(const SingleStrainParams& params,
                                      const EquilibriumReport& saddle, double arc_length,
                                      double eps = 1e-6);

struct NewtonOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

// Damped Newton on rhs_multistrain from a seed; falls back to
// Levenberg-Marquardt steps where the Jacobian is singular. Throws
// DivergenceError if the residual does not drop below tol.
State4 refine_multistrain_equilibrium(const MultiStrainParams& params, State4 seed,
                                      NewtonOptions opts = {});

// Disease-free point, the marginal single-strain equilibria on the i_A and
// i_B axes, and Newton refinements of the given seeds (duplicates dropped).
std::vector<EquilibriumReport> multistrain_equilibria(const MultiStrainParams& params,
                                                      std::span<const State4> seeds = {});

}  // namespace wolbdyn
