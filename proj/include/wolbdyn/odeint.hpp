#pragma once

// Explicit Runge-Kutta-Fehlberg 4(5) integration with PI step control for
// the small non-stiff vector fields of the unstructured models.

#include "wolbdyn/errors.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace wolbdyn::ode {

// Writes f(y) into dydt (same length as y).
using Rhs = std::function<void(std::span<const double> y, std::span<double> dydt)>;

enum class TerminalFlag { reached_T, converged, blow_up };

std::string to_string(TerminalFlag flag);

struct IntegratorConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double max_step = 0.5;
    // Early stop once ||f(y)||_inf < conv_tol; 0 disables the check.
    double conv_tol = 0.0;
    double T = 100.0;
    double initial_step = 1e-3;
    double min_step = 1e-14;
    double clip_tol = 1e-12;
    std::size_t max_steps = 50'000'000;

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    TerminalFlag terminal_flag = TerminalFlag::reached_T;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    const std::vector<double>& final_state() const { return states.back(); }
};

// Thrown when the step size falls below min_step; carries what was
// integrated so far.
class StiffnessFailure : public StiffnessError {
public:
    StiffnessFailure(const std::string& what, Trajectory partial)
        : StiffnessError(what), partial_(std::move(partial)) {}
    const Trajectory& partial() const { return partial_; }

private:
    Trajectory partial_;
};

double max_norm(std::span<const double> v);

// Adaptive integration from t = 0 to cfg.T. Components in (-clip_tol, 0)
// are clipped to zero after every accepted step; a step producing a
// component below -clip_tol is rejected and retried with a smaller step.
Trajectory integrate(const Rhs& rhs, std::vector<double> y0, const IntegratorConfig& cfg);

// Called after every accepted step; returning true ends the integration
// with flag reached_T (the horizon is truncated by the caller's criterion).
using StopObserver = std::function<bool(double t, std::span<const double> y)>;

Trajectory integrate(const Rhs& rhs, std::vector<double> y0, const IntegratorConfig& cfg,
                     const StopObserver& stop);

// Fixed-step integration with the fourth-order solution of the same
// Fehlberg tableau. T / h must be (close to) an integer.
std::vector<double> integrate_fixed(const Rhs& rhs, std::vector<double> y0, double T, double h);

// Observed convergence order log2(err(h) / err(h/2)) of the fixed-step
// kernel against a known solution at time T. Throws DomainError when either
// error is exactly zero.
double order_check(const Rhs& rhs, const std::vector<double>& y0, double T,
                   const std::vector<double>& exact, double h);

}  // namespace wolbdyn::ode
